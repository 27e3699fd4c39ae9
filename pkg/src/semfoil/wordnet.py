"""WNDB flat-file reader with antonym and hypernym queries.

Reads the ``index.{noun,verb,adj,adv}`` and ``data.{noun,verb,adj,adv}``
files of a WordNet 3.x database directory. Lookups are exact on the
lemma (lowercased, spaces as underscores), with a hyphen-to-underscore
fallback for hyphenated stems. No morphological normalization is applied:
the intended callers pass already-lemmatized concept stems.

The database is immutable after :func:`load_database`; synset records are
parsed on demand and cached, or all at once with ``eager=True``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

ANTONYM = "!"
HYPERNYM = "@"
INSTANCE_HYPERNYM = "@i"

_ADJ_MARKER_RE = re.compile(r"\((a|p|ip)\)$")


class WordnetError(Exception):
    """Missing database file or malformed database line."""


class Pos(Enum):
    NOUN = "n"
    VERB = "v"
    ADJ = "a"
    ADV = "r"

    @property
    def file_suffix(self) -> str:
        return {"n": "noun", "v": "verb", "a": "adj", "r": "adv"}[self.value]

    @classmethod
    def from_tag(cls, tag: str) -> "Pos":
        # 's' marks adjective satellites; they live in the adj files.
        if tag == "s":
            return cls.ADJ
        try:
            return cls(tag)
        except ValueError:
            raise WordnetError(f"unknown part-of-speech tag {tag!r}") from None


def pos_search_order(had_sense_suffix: bool) -> tuple[Pos, ...]:
    """Lookup order for stems taken from AMR concept labels.

    A ``-NN`` sense suffix marks a predicate, so verbs are tried first;
    bare labels are most often nominal.
    """
    if had_sense_suffix:
        return (Pos.VERB, Pos.ADJ)
    return (Pos.NOUN, Pos.ADJ, Pos.VERB, Pos.ADV)


@dataclass(frozen=True)
class LemmaKey:
    """Lowercased lemma (underscores for spaces) plus part of speech."""

    lemma: str
    pos: Pos

    def __post_init__(self):
        if not self.lemma:
            raise ValueError("empty lemma")
        normalized = self.lemma.lower().replace(" ", "_")
        object.__setattr__(self, "lemma", normalized)


@dataclass(frozen=True)
class Pointer:
    symbol: str
    offset: int
    pos: Pos
    source: int  # 1-based word number in the source synset; 0 = whole synset
    target: int


@dataclass(frozen=True)
class Synset:
    offset: int
    pos: Pos
    lemmas: tuple[str, ...]
    pointers: tuple[Pointer, ...]

    def words_lower(self) -> tuple[str, ...]:
        return tuple(w.lower() for w in self.lemmas)


class WordnetDb:
    """In-memory index over a WNDB directory. Read-only after load."""

    def __init__(self, path: Path, eager: bool = False):
        self.path = Path(path)
        self._index: dict[Pos, dict[str, tuple[int, ...]]] = {}
        self._data: dict[Pos, bytes] = {}
        self._synsets: dict[tuple[Pos, int], Synset] = {}
        for pos in Pos:
            self._index[pos] = self._load_index(pos)
            self._data[pos] = self._read_file(f"data.{pos.file_suffix}")
        if eager:
            for pos in Pos:
                for offsets in self._index[pos].values():
                    for offset in offsets:
                        self.synset_at(pos, offset)

    # -- file parsing ----------------------------------------------------

    def _read_file(self, name: str) -> bytes:
        target = self.path / name
        if not target.is_file():
            raise WordnetError(f"missing database file: {target}")
        return target.read_bytes()

    def _load_index(self, pos: Pos) -> dict[str, tuple[int, ...]]:
        name = f"index.{pos.file_suffix}"
        raw = self._read_file(name)
        table: dict[str, tuple[int, ...]] = {}
        for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
            if not line or line.startswith(" "):  # license header
                continue
            fields = line.split()
            try:
                lemma = fields[0]
                synset_cnt = int(fields[2])
                p_cnt = int(fields[3])
                tail = fields[6 + p_cnt :]
                offsets = tuple(int(x) for x in tail[:synset_cnt])
                if len(offsets) != synset_cnt:
                    raise IndexError
            except (IndexError, ValueError):
                raise WordnetError(f"{name}:{lineno}: malformed index line") from None
            table[lemma] = offsets
        return table

    def _parse_data_line(self, pos: Pos, offset: int) -> Synset:
        data = self._data[pos]
        if offset < 0 or offset >= len(data):
            raise WordnetError(
                f"data.{pos.file_suffix}: offset {offset} out of range"
            )
        end = data.find(b"\n", offset)
        line = data[offset : end if end != -1 else len(data)].decode("utf-8")
        name = f"data.{pos.file_suffix}"
        head = line.split("|", 1)[0]
        fields = head.split()
        try:
            if int(fields[0]) != offset:
                raise ValueError
            w_cnt = int(fields[3], 16)
            words = []
            for i in range(w_cnt):
                surface = fields[4 + 2 * i]
                words.append(_ADJ_MARKER_RE.sub("", surface))
            cursor = 4 + 2 * w_cnt
            p_cnt = int(fields[cursor])
            cursor += 1
            pointers = []
            for _ in range(p_cnt):
                symbol, raw_offset, pos_tag, st = fields[cursor : cursor + 4]
                pointers.append(
                    Pointer(
                        symbol=symbol,
                        offset=int(raw_offset),
                        pos=Pos.from_tag(pos_tag),
                        source=int(st[:2], 16),
                        target=int(st[2:], 16),
                    )
                )
                cursor += 4
        except (IndexError, ValueError):
            raise WordnetError(
                f"{name}: malformed synset record at offset {offset}"
            ) from None
        return Synset(
            offset=offset, pos=pos, lemmas=tuple(words), pointers=tuple(pointers)
        )

    # -- lookups ---------------------------------------------------------

    def synset_at(self, pos: Pos, offset: int) -> Synset:
        key = (pos, offset)
        cached = self._synsets.get(key)
        if cached is None:
            cached = self._parse_data_line(pos, offset)
            self._synsets[key] = cached
        return cached

    def _offsets_for(self, key: LemmaKey) -> tuple[int, ...]:
        table = self._index[key.pos]
        hit = table.get(key.lemma)
        if hit is None and "-" in key.lemma:
            hit = table.get(key.lemma.replace("-", "_"))
        return hit or ()

    def synsets(self, key: LemmaKey) -> tuple[Synset, ...]:
        return tuple(self.synset_at(key.pos, o) for o in self._offsets_for(key))

    def lemma_count(self, pos: Pos) -> int:
        return len(self._index[pos])

    def antonyms(self, key: LemmaKey) -> list[str]:
        """Antonym lemmas reached by ``!`` pointers from any sense of the key.

        Every ``!`` pointer of every synset containing the key is
        followed, regardless of which word anchors it, and all lemmas of
        the opposite synset are collected. Because antonym pointers are
        reciprocal between synsets, this relation is symmetric. Unknown
        lemmas yield an empty list.
        """
        found: list[str] = []
        for synset in self.synsets(key):
            for ptr in synset.pointers:
                if ptr.symbol != ANTONYM:
                    continue
                other = self.synset_at(ptr.pos, ptr.offset)
                found.extend(w for w in other.words_lower() if w != key.lemma)
        return _dedup(found)

    def hypernyms(self, key: LemmaKey, depth: int = 1) -> list[str]:
        """Lemmas of hypernym synsets up to ``depth`` levels above the key.

        Follows ``@`` and ``@i`` pointers. The query lemma itself is never
        returned. Unknown lemmas and top-of-hierarchy synsets yield [].
        """
        if depth < 1:
            raise ValueError("depth must be >= 1")
        found: list[str] = []
        frontier = list(self.synsets(key))
        seen: set[tuple[Pos, int]] = set()
        for _ in range(depth):
            parents: list[Synset] = []
            for synset in frontier:
                for ptr in synset.pointers:
                    if ptr.symbol not in (HYPERNYM, INSTANCE_HYPERNYM):
                        continue
                    ident = (ptr.pos, ptr.offset)
                    if ident in seen:
                        continue
                    seen.add(ident)
                    parents.append(self.synset_at(ptr.pos, ptr.offset))
            for parent in parents:
                found.extend(w for w in parent.words_lower() if w != key.lemma)
            if not parents:
                break
            frontier = parents
        return _dedup(found)


def _dedup(items: list[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def load_database(path, eager: bool = False) -> WordnetDb:
    """Open a WNDB directory. Raises :class:`WordnetError` when any of the
    eight index/data files is missing or malformed."""
    return WordnetDb(Path(path), eager=eager)


def antonyms(db: WordnetDb, key: LemmaKey) -> list[str]:
    return db.antonyms(key)


def hypernyms(db: WordnetDb, key: LemmaKey, depth: int = 1) -> list[str]:
    return db.hypernyms(key, depth=depth)
