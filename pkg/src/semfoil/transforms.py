"""The five meaning-altering graph manipulations.

Each operation takes an immutable graph and a seed, picks its targets
uniformly among eligible candidates (sorted, so the draw is independent
of set iteration order), and returns the rewritten graph together with an
:class:`AppliedManipulation` audit record. Explicit ``target`` /
``replacement`` arguments bypass the seeded draw; they are the hook for a
human controller steering the rewrite.

Manipulations:

* PN - attach ``:polarity -`` to a node, flipping its truth value.
* RS - exchange the concept labels of two nodes (role confusion).
* US - delete a leaf node, removing semantic content.
* AR - replace a concept with a WordNet antonym, keeping the sense suffix.
* HS - replace a concept with a WordNet hypernym, raising abstraction.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Any, Sequence

from .graph import AmrGraph
from .wordnet import LemmaKey, WordnetDb, pos_search_order


class NotApplicable(Exception):
    """The manipulation has no eligible target in this graph."""


class NoManipulationApplicable(Exception):
    """None of the allowed manipulation types applies to the graph."""


class ManipulationType(str, Enum):
    PN = "PN"  # polarity negation
    RS = "RS"  # role swap
    US = "US"  # underspecification
    AR = "AR"  # antonym replacement
    HS = "HS"  # hypernym substitution


REQUIRED_PRONOUNS = frozenset({"i", "you", "he", "she", "it", "we", "they"})

DEFAULT_PRONOUNS = REQUIRED_PRONOUNS | frozenset(
    {
        "me",
        "him",
        "her",
        "us",
        "them",
        "mine",
        "yours",
        "his",
        "hers",
        "ours",
        "theirs",
        "myself",
        "yourself",
        "himself",
        "herself",
        "itself",
        "ourselves",
        "yourselves",
        "themselves",
        "this",
        "that",
        "these",
        "those",
        "who",
        "whom",
        "whose",
        "which",
        "what",
        "somebody",
        "someone",
        "something",
        "anybody",
        "anyone",
        "anything",
        "everybody",
        "everyone",
        "everything",
        "nobody",
        "nothing",
    }
)

# Structural AMR concepts that would yield degenerate rewrites.
DEFAULT_STRUCTURAL = frozenset(
    {"and", "or", "amr-unknown", "amr-choice", "multi-sentence", "name"}
)
DEFAULT_STRUCTURAL_SUFFIXES = ("-quantity", "-entity")

_SENSE_SUFFIX_RE = re.compile(r"^(.+)-(\d{2,3})$")


def split_sense_suffix(label: str) -> tuple[str, str]:
    """Split ``well-09`` into (``well``, ``-09``); no suffix gives ``""``."""
    m = _SENSE_SUFFIX_RE.match(label)
    if m:
        return m.group(1), f"-{m.group(2)}"
    return label, ""


@dataclass(frozen=True)
class EligibilityPolicy:
    """Concepts excluded from PN/AR/HS targeting."""

    pronouns: frozenset[str] = DEFAULT_PRONOUNS
    structural: frozenset[str] = DEFAULT_STRUCTURAL
    structural_suffixes: tuple[str, ...] = DEFAULT_STRUCTURAL_SUFFIXES

    def __post_init__(self):
        missing = REQUIRED_PRONOUNS - self.pronouns
        if missing:
            raise ValueError(f"pronoun set must include {sorted(missing)}")

    def excluded(self, concept: str) -> bool:
        stem, _ = split_sense_suffix(concept)
        for label in (concept, stem):
            if label in self.pronouns or label in self.structural:
                return True
            if any(label.endswith(sfx) for sfx in self.structural_suffixes):
                return True
        return False


DEFAULT_POLICY = EligibilityPolicy()


@dataclass(frozen=True)
class AppliedManipulation:
    """What changed: targets plus the replaced/added/removed triples."""

    kind: ManipulationType
    targets: tuple[str, ...]
    before: tuple
    after: tuple
    rng_seed: int = 0

    def __post_init__(self):
        if self.before == self.after:
            raise ValueError("manipulation changed nothing")

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "targets": list(self.targets),
            "before": _plain(self.before),
            "after": _plain(self.after),
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_json(cls, payload: dict[str, Any]) -> "AppliedManipulation":
        return cls(
            kind=ManipulationType(payload["kind"]),
            targets=tuple(payload["targets"]),
            before=_nested(payload["before"]),
            after=_nested(payload["after"]),
            rng_seed=int(payload.get("rng_seed", 0)),
        )


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def _nested(value):
    if isinstance(value, list):
        return tuple(_nested(v) for v in value)
    return value


def _pick(rng: random.Random, candidates: Sequence):
    return candidates[rng.randrange(len(candidates))]


def _check_target(graph: AmrGraph, target: str, eligible: Sequence[str], what: str) -> None:
    if target not in graph.variables:
        raise NotApplicable(f"{what}: unknown variable {target!r}")
    if target not in eligible:
        raise NotApplicable(f"{what}: variable {target!r} is not eligible")


def polarity_negation(
    graph: AmrGraph,
    seed: int,
    policy: EligibilityPolicy = DEFAULT_POLICY,
    target: str | None = None,
) -> tuple[AmrGraph, AppliedManipulation]:
    """Attach ``:polarity -`` to one eligible node.

    Eligible: non-pronoun, non-structural nodes not already negated.
    """
    eligible = [
        v
        for v in sorted(graph.variables)
        if not policy.excluded(graph.concept_of(v))
        and not graph.has_polarity_negation(v)
    ]
    if not eligible:
        raise NotApplicable("no node eligible for polarity negation")
    if target is not None:
        _check_target(graph, target, eligible, "polarity negation")
        chosen = target
    else:
        chosen = _pick(random.Random(seed), eligible)
    out = graph.with_attribute(chosen, ":polarity", "-")
    record = AppliedManipulation(
        kind=ManipulationType.PN,
        targets=(chosen,),
        before=(),
        after=((chosen, ":polarity", "-"),),
        rng_seed=seed,
    )
    out.validate()
    return out, record


def role_swap(
    graph: AmrGraph,
    seed: int,
    targets: tuple[str, str] | None = None,
) -> tuple[AmrGraph, AppliedManipulation]:
    """Exchange the concept labels of two nodes, keeping all edges.

    Only pairs with distinct labels are eligible, so the result is never
    triple-equal to the input.
    """
    pairs = [
        (u, v)
        for u, v in combinations(sorted(graph.variables), 2)
        if graph.concept_of(u) != graph.concept_of(v)
    ]
    if not pairs:
        raise NotApplicable("fewer than two distinct concept labels")
    if targets is not None:
        u, v = sorted(targets)
        if (u, v) not in pairs:
            raise NotApplicable(f"role swap: pair ({u}, {v}) is not eligible")
    else:
        u, v = _pick(random.Random(seed), pairs)
    cu, cv = graph.concept_of(u), graph.concept_of(v)
    out = graph.with_concept(u, cv).with_concept(v, cu)
    record = AppliedManipulation(
        kind=ManipulationType.RS,
        targets=(u, v),
        before=((u, cu), (v, cv)),
        after=((u, cv), (v, cu)),
        rng_seed=seed,
    )
    out.validate()
    return out, record


def underspecification(
    graph: AmrGraph,
    seed: int,
    target: str | None = None,
) -> tuple[AmrGraph, AppliedManipulation]:
    """Delete one non-root leaf with its attributes and incoming edges."""
    if len(graph.variables) < 2:
        raise NotApplicable("single-node graph")
    eligible = [v for v in graph.leaves() if v != graph.root]
    if not eligible:
        raise NotApplicable("no removable leaf")
    if target is not None:
        _check_target(graph, target, eligible, "underspecification")
        chosen = target
    else:
        chosen = _pick(random.Random(seed), eligible)
    removed = (
        (chosen, ":instance", graph.concept_of(chosen)),
        *sorted(e for e in graph.relations if chosen in (e[0], e[2])),
        *graph.attributes_of(chosen),
    )
    out = graph.without_variable(chosen)
    record = AppliedManipulation(
        kind=ManipulationType.US,
        targets=(chosen,),
        before=removed,
        after=(),
        rng_seed=seed,
    )
    out.validate()
    return out, record


def _lexical_candidates(
    db: WordnetDb,
    concept: str,
    query: str,
    hypernym_depth: int = 1,
) -> list[str]:
    """Single-token replacement labels for a concept, via WordNet.

    The stem drops any ``-NN`` sense suffix; hyphens map to underscores
    for the lookup. The first part of speech yielding usable lemmas wins:
    verbs first for suffixed predicates, nouns first otherwise.
    """
    stem, _ = split_sense_suffix(concept)
    lemma = stem.lower().replace("-", "_")
    for pos in pos_search_order(had_sense_suffix=concept != stem):
        try:
            key = LemmaKey(lemma, pos)
        except ValueError:
            return []
        if query == "antonyms":
            raw = db.antonyms(key)
        else:
            raw = db.hypernyms(key, depth=hypernym_depth)
        usable = [w for w in raw if "_" not in w and w != stem]
        if usable:
            return usable
    return []


def _substitute_concept(
    graph: AmrGraph,
    db: WordnetDb,
    seed: int,
    policy: EligibilityPolicy,
    target: str | None,
    replacement: str | None,
    kind: ManipulationType,
    query: str,
    hypernym_depth: int = 1,
) -> tuple[AmrGraph, AppliedManipulation]:
    if db is None:
        raise NotApplicable(f"{kind.value} requires a WordNet database")
    rng = random.Random(seed)
    candidates: dict[str, list[str]] = {}
    for v in sorted(graph.variables):
        concept = graph.concept_of(v)
        if policy.excluded(concept):
            continue
        found = _lexical_candidates(db, concept, query, hypernym_depth)
        if found:
            candidates[v] = found
    if not candidates:
        raise NotApplicable(f"no node with WordNet {query}")
    if target is not None:
        _check_target(graph, target, list(candidates), kind.value)
        chosen = target
    else:
        chosen = _pick(rng, sorted(candidates))
    old = graph.concept_of(chosen)
    stem, suffix = split_sense_suffix(old)
    if replacement is None:
        replacement = _pick(rng, candidates[chosen])
    elif replacement not in candidates[chosen]:
        raise NotApplicable(
            f"{kind.value}: {replacement!r} is not a WordNet {query[:-1]} of {stem!r}"
        )
    new = replacement + suffix
    out = graph.with_concept(chosen, new)
    record = AppliedManipulation(
        kind=kind,
        targets=(chosen,),
        before=(old,),
        after=(new,),
        rng_seed=seed,
    )
    out.validate()
    return out, record


def antonym_replacement(
    graph: AmrGraph,
    db: WordnetDb,
    seed: int,
    policy: EligibilityPolicy = DEFAULT_POLICY,
    target: str | None = None,
    replacement: str | None = None,
) -> tuple[AmrGraph, AppliedManipulation]:
    """Replace a concept with a WordNet antonym, preserving the suffix."""
    return _substitute_concept(
        graph, db, seed, policy, target, replacement, ManipulationType.AR, "antonyms"
    )


def hypernym_substitution(
    graph: AmrGraph,
    db: WordnetDb,
    seed: int,
    policy: EligibilityPolicy = DEFAULT_POLICY,
    target: str | None = None,
    replacement: str | None = None,
    depth: int = 1,
) -> tuple[AmrGraph, AppliedManipulation]:
    """Replace a concept with a WordNet hypernym lemma, preserving the suffix."""
    return _substitute_concept(
        graph,
        db,
        seed,
        policy,
        target,
        replacement,
        ManipulationType.HS,
        "hypernyms",
        hypernym_depth=depth,
    )


def apply_manipulation(
    kind: ManipulationType,
    graph: AmrGraph,
    db: WordnetDb | None,
    seed: int,
    policy: EligibilityPolicy = DEFAULT_POLICY,
) -> tuple[AmrGraph, AppliedManipulation]:
    if kind is ManipulationType.PN:
        return polarity_negation(graph, seed, policy)
    if kind is ManipulationType.RS:
        return role_swap(graph, seed)
    if kind is ManipulationType.US:
        return underspecification(graph, seed)
    if kind is ManipulationType.AR:
        return antonym_replacement(graph, db, seed, policy)
    if kind is ManipulationType.HS:
        return hypernym_substitution(graph, db, seed, policy)
    raise ValueError(f"unknown manipulation {kind!r}")


def apply_random(
    graph: AmrGraph,
    db: WordnetDb | None,
    seed: int,
    allowed: frozenset[ManipulationType] | set[ManipulationType] = frozenset(
        ManipulationType
    ),
    policy: EligibilityPolicy = DEFAULT_POLICY,
) -> tuple[AmrGraph, AppliedManipulation]:
    """Draw manipulation types without replacement until one applies.

    Types are sampled uniformly (seeded); each attempt gets a derived
    sub-seed so the whole procedure is a pure function of
    (graph, db, seed, allowed).
    """
    if not allowed:
        raise ValueError("allowed manipulation set is empty")
    rng = random.Random(seed)
    order = rng.sample(sorted(allowed, key=lambda m: m.value), len(allowed))
    failures = []
    for kind in order:
        sub_seed = rng.getrandbits(32)
        try:
            return apply_manipulation(kind, graph, db, sub_seed, policy)
        except NotApplicable as exc:
            failures.append(f"{kind.value}: {exc}")
    raise NoManipulationApplicable("; ".join(failures))
