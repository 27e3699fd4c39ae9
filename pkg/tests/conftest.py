import json
import os
from dataclasses import dataclass
from pathlib import Path

import pytest

from semfoil.backends import FixtureTransport, ModelBackends, request_hash
from semfoil.graph import AmrGraph, same_triples
from semfoil.penman import parse_penman, serialize_penman
from semfoil.transforms import (
    ManipulationType,
    antonym_replacement,
    apply_random,
    hypernym_substitution,
    polarity_negation,
    role_swap,
    underspecification,
)
from semfoil.wordnet import load_database

from wndb_builder import MINI_WORDNET, build_wndb

DATA_DIR = Path(__file__).parent / "data"

REAL_WNDB_CANDIDATES = (
    "node_modules/wordnet-db/dict",
    "data/wordnet/dict",
)


@pytest.fixture(scope="session")
def mini_wordnet_dir(tmp_path_factory) -> Path:
    dest = tmp_path_factory.mktemp("wndb")
    return build_wndb(MINI_WORDNET, dest)


@pytest.fixture(scope="session")
def mini_db(mini_wordnet_dir):
    return load_database(mini_wordnet_dir)


def find_real_wndb() -> Path | None:
    env = os.environ.get("SEMFOIL_WORDNET_DIR")
    candidates = [env] if env else []
    candidates.extend(REAL_WNDB_CANDIDATES)
    for candidate in candidates:
        path = Path(candidate)
        if (path / "index.verb").is_file():
            return path
    return None


@pytest.fixture(scope="session")
def real_db():
    path = find_real_wndb()
    if path is None:
        pytest.skip(
            "real WordNet database not found; set SEMFOIL_WORDNET_DIR to a WNDB dict directory"
        )
    return load_database(path)


# -- running-example world (recorded model outputs, replayed offline) ----


@dataclass(frozen=True)
class GoldenCase:
    kind: ManipulationType
    foil: str
    probs: tuple[float, float, float]
    manipulated: AmrGraph
    foil_graph: str
    seed: int  # apply_random seed reproducing this exact rewrite


@dataclass(frozen=True)
class GoldenWorld:
    pair_id: str
    source: str
    paraphrase: str
    source_graph: str
    graph: AmrGraph
    cases: dict[ManipulationType, GoldenCase]
    records: dict[str, dict]

    def transport(self) -> FixtureTransport:
        return FixtureTransport(self.records)

    def backends(self) -> ModelBackends:
        return ModelBackends(self.transport())

    def write_fixture(self, path) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8") as handle:
            for digest, response in sorted(self.records.items()):
                handle.write(
                    json.dumps({"request-hash": digest, "response": response}) + "\n"
                )
        return path


def _apply_recorded(kind, graph, db, spec):
    if kind is ManipulationType.PN:
        return polarity_negation(graph, seed=0, target=spec["target"])[0]
    if kind is ManipulationType.RS:
        return role_swap(graph, seed=0, targets=tuple(spec["targets"]))[0]
    if kind is ManipulationType.US:
        return underspecification(graph, seed=0, target=spec["target"])[0]
    if kind is ManipulationType.AR:
        return antonym_replacement(
            graph, db, seed=0, target=spec["target"], replacement=spec["replacement"]
        )[0]
    if kind is ManipulationType.HS:
        return hypernym_substitution(
            graph, db, seed=0, target=spec["target"], replacement=spec["replacement"]
        )[0]
    raise AssertionError(kind)


def _find_seed(graph, db, kind, expected, limit=100_000) -> int:
    for seed in range(limit):
        candidate, _ = apply_random(graph, db, seed, allowed={kind})
        if same_triples(candidate, expected):
            return seed
    raise AssertionError(f"no seed below {limit} reproduces the {kind.value} rewrite")


@pytest.fixture(scope="session")
def golden_world(mini_db) -> GoldenWorld:
    recording = json.loads((DATA_DIR / "running_example.json").read_text(encoding="utf-8"))
    source = recording["source"]
    source_graph = recording["source_graph"]
    graph = parse_penman(source_graph)

    records = {
        request_hash("parse", {"sentence": source}): {"graph": source_graph}
    }
    cases: dict[ManipulationType, GoldenCase] = {}
    for kind_name, spec in recording["manipulations"].items():
        kind = ManipulationType(kind_name)
        manipulated = _apply_recorded(kind, graph, mini_db, spec)
        foil_graph = serialize_penman(manipulated)
        records[request_hash("generate", {"graph": foil_graph})] = {
            "sentence": spec["foil"]
        }
        records[
            request_hash("nli", {"premise": source, "hypothesis": spec["foil"]})
        ] = {"probs": list(spec["probs"])}
        cases[kind] = GoldenCase(
            kind=kind,
            foil=spec["foil"],
            probs=tuple(spec["probs"]),
            manipulated=manipulated,
            foil_graph=foil_graph,
            seed=_find_seed(graph, mini_db, kind, manipulated),
        )
    return GoldenWorld(
        pair_id=recording["pair_id"],
        source=source,
        paraphrase=recording["paraphrase"],
        source_graph=source_graph,
        graph=graph,
        cases=cases,
        records=records,
    )
