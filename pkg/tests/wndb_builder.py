"""Writes small WNDB-format databases with correct byte offsets.

The builder renders data lines with placeholder offsets first; since
offsets are always 8 digits, line lengths are stable and real offsets can
be assigned from cumulative byte positions in a second pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

_POS_SUFFIX = {"n": "noun", "v": "verb", "a": "adj", "r": "adv"}

_HEADER = "  1 Fixture lexical database for the test suite.  \n  2 Layout follows the WNDB flat-file format.  \n"


@dataclass
class SynsetSpec:
    sid: str
    pos: str  # n v a r
    words: list[str]
    # (pointer_symbol, target_sid, source_word_number, target_word_number)
    pointers: list[tuple[str, str, int, int]] = field(default_factory=list)
    ss_type: str | None = None  # defaults to pos; 's' for adj satellites


def _data_line(spec: SynsetSpec, offset: int, offsets: dict[str, int], all_specs: dict[str, SynsetSpec]) -> str:
    parts = [f"{offset:08d}", "00", spec.ss_type or spec.pos, f"{len(spec.words):02x}"]
    for word in spec.words:
        parts.extend([word, "0"])
    parts.append(f"{len(spec.pointers):03d}")
    for symbol, target_sid, src, tgt in spec.pointers:
        target = all_specs[target_sid]
        parts.extend(
            [symbol, f"{offsets[target_sid]:08d}", target.pos, f"{src:02x}{tgt:02x}"]
        )
    if spec.pos == "v":
        parts.extend(["01", "+", "02", "00"])
    return " ".join(parts) + f" | fixture gloss for {spec.sid}  "


def build_wndb(specs: list[SynsetSpec], dest: Path) -> Path:
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    by_id = {s.sid: s for s in specs}
    if len(by_id) != len(specs):
        raise ValueError("duplicate synset id")

    offsets: dict[str, int] = {}
    per_pos: dict[str, list[SynsetSpec]] = {p: [] for p in _POS_SUFFIX}
    for spec in specs:
        per_pos[spec.pos].append(spec)

    # First pass with placeholder offsets fixes every line length.
    for pos, pos_specs in per_pos.items():
        cursor = len(_HEADER.encode())
        for spec in pos_specs:
            offsets[spec.sid] = cursor
            probe = {sid: 0 for sid in by_id}
            cursor += len(_data_line(spec, 0, probe, by_id).encode()) + 1

    for pos, suffix in _POS_SUFFIX.items():
        lines = [
            _data_line(spec, offsets[spec.sid], offsets, by_id)
            for spec in per_pos[pos]
        ]
        (dest / f"data.{suffix}").write_text(
            _HEADER + "".join(line + "\n" for line in lines), encoding="utf-8"
        )

        index: dict[str, list[SynsetSpec]] = {}
        for spec in per_pos[pos]:
            for word in spec.words:
                index.setdefault(word.lower(), []).append(spec)
        rows = []
        for lemma in sorted(index):
            members = index[lemma]
            symbols = sorted({p[0] for s in members for p in s.pointers})
            fields = [lemma, pos, str(len(members)), str(len(symbols))]
            fields.extend(symbols)
            fields.extend([str(len(members)), "0"])
            fields.extend(f"{offsets[s.sid]:08d}" for s in members)
            rows.append(" ".join(fields) + "  ")
        (dest / f"index.{suffix}").write_text(
            _HEADER + "".join(row + "\n" for row in rows), encoding="utf-8"
        )
    return dest


# A small but realistic lexicon: antonym pairs are symmetric at lemma
# level and the noun hierarchy is several levels deep, topping out at a
# pointerless synset.
MINI_WORDNET: list[SynsetSpec] = [
    # nouns
    SynsetSpec("snake_n", "n", ["snake", "serpent", "ophidian"], [("@", "reptile_n", 0, 0)]),
    SynsetSpec("reptile_n", "n", ["reptile", "reptilian"], [("@", "animal_n", 0, 0)]),
    SynsetSpec(
        "animal_n",
        "n",
        ["animal", "animate_being", "beast", "creature", "fauna"],
        [("@", "organism_n", 0, 0)],
    ),
    SynsetSpec("organism_n", "n", ["organism", "being"], [("@", "entity_n", 0, 0)]),
    SynsetSpec("entity_n", "n", ["entity"]),
    SynsetSpec("penguin_n", "n", ["penguin"], [("@", "bird_n", 0, 0)]),
    SynsetSpec("bird_n", "n", ["bird"], [("@", "animal_n", 0, 0)]),
    SynsetSpec("tiger_n", "n", ["tiger"], [("@", "big_cat_n", 0, 0)]),
    SynsetSpec("big_cat_n", "n", ["big_cat", "cat"], [("@", "animal_n", 0, 0)]),
    SynsetSpec("house_cat_n", "n", ["house_cat", "cat"], [("@", "big_cat_n", 0, 0)]),
    SynsetSpec("thing_n", "n", ["thing"], [("@", "attribute_n", 0, 0)]),
    SynsetSpec("attribute_n", "n", ["attribute"], [("@", "abstraction_n", 0, 0)]),
    SynsetSpec("abstraction_n", "n", ["abstraction", "abstract_entity"], [("@", "entity_n", 0, 0)]),
    SynsetSpec("day_n", "n", ["day", "daytime"], [("!", "night_n", 1, 1)]),
    SynsetSpec("night_n", "n", ["night", "nighttime"], [("!", "day_n", 1, 1)]),
    SynsetSpec(
        "man_n",
        "n",
        ["man", "adult_male"],
        [("!", "woman_n", 1, 1), ("@", "person_n", 0, 0)],
    ),
    SynsetSpec(
        "woman_n",
        "n",
        ["woman", "adult_female"],
        [("!", "man_n", 1, 1), ("@", "person_n", 0, 0)],
    ),
    SynsetSpec("person_n", "n", ["person", "individual", "someone"], [("@", "organism_n", 0, 0)]),
    # verbs
    SynsetSpec(
        "go_v",
        "v",
        ["go", "travel", "locomote"],
        [("!", "stop_v", 1, 1), ("@", "move_v", 0, 0)],
    ),
    SynsetSpec("stop_v", "v", ["stop", "halt"], [("!", "go_v", 1, 1)]),
    SynsetSpec("move_v", "v", ["move"]),
    SynsetSpec("bite_v", "v", ["bite", "seize_with_teeth"], [("@", "grip_v", 0, 0)]),
    SynsetSpec("grip_v", "v", ["grip"]),
    SynsetSpec(
        "increase_v", "v", ["increase"], [("!", "decrease_v", 1, 1), ("@", "change_v", 0, 0)]
    ),
    SynsetSpec(
        "decrease_v",
        "v",
        ["decrease", "diminish", "lessen"],
        [("!", "increase_v", 1, 1), ("@", "change_v", 0, 0)],
    ),
    SynsetSpec("change_v", "v", ["change"]),
    SynsetSpec("love_v", "v", ["love"], [("!", "hate_v", 1, 1)]),
    SynsetSpec("hate_v", "v", ["hate", "detest"], [("!", "love_v", 1, 1)]),
    # adjectives
    SynsetSpec("happy_a", "a", ["happy"], [("!", "unhappy_a", 1, 1)]),
    SynsetSpec("unhappy_a", "a", ["unhappy"], [("!", "happy_a", 1, 1)]),
    SynsetSpec(
        "big_a",
        "a",
        ["big", "large"],
        [("!", "little_a", 1, 1), ("!", "little_a", 2, 2)],
    ),
    SynsetSpec(
        "little_a",
        "a",
        ["little", "small"],
        [("!", "big_a", 1, 1), ("!", "big_a", 2, 2)],
    ),
    SynsetSpec("good_a", "a", ["good"], [("!", "bad_a", 1, 1)]),
    SynsetSpec("bad_a", "a", ["bad"], [("!", "good_a", 1, 1)]),
    SynsetSpec("new_a", "a", ["new"], [("!", "old_a", 1, 1)]),
    SynsetSpec("old_a", "a", ["old"], [("!", "new_a", 1, 1)]),
    SynsetSpec("glad_a", "a", ["glad"], [("&", "happy_a", 0, 0)], ss_type="s"),
    # adverbs
    SynsetSpec("well_r", "r", ["well"], [("!", "badly_r", 1, 1)]),
    SynsetSpec("badly_r", "r", ["badly", "poorly"], [("!", "well_r", 1, 1)]),
    SynsetSpec("so_r", "r", ["so"]),
]
