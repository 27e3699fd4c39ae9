"""Foil induction: paraphrase pairs -> manipulated, NLI-filtered records.

For each input pair (s, p) the source sentence is parsed to a graph, one
manipulation is applied (seeded per pair, so edits to the pair list never
reshuffle other pairs), the rewritten graph is verbalized into the foil
f, and an NLI check between s and f decides retention. Every record keeps
the full audit trail: both graphs, the applied manipulation, and the NLI
probabilities.
"""

from __future__ import annotations

import ast
import csv
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .backends import ModelBackends, NliVerdict, TransportError
from .graph import GraphError
from .penman import PenmanError, parse_penman, serialize_penman
from .transforms import (
    DEFAULT_POLICY,
    AppliedManipulation,
    EligibilityPolicy,
    ManipulationType,
    NoManipulationApplicable,
    apply_random,
)

logger = logging.getLogger(__name__)

DATASETS = ("PAWS", "GPTP", "custom")


@dataclass(frozen=True)
class ParaphrasePair:
    id: str
    source: str
    paraphrase: str
    dataset: str = "custom"

    def __post_init__(self):
        if not self.source.strip() or not self.paraphrase.strip():
            raise ValueError(f"pair {self.id}: empty text")


@dataclass(frozen=True)
class FilterSpec:
    """Retain verdicts with the target label and probability in (low, high]."""

    name: str
    target_label: int
    prob_low: float
    prob_high: float

    def __post_init__(self):
        if not 0.0 <= self.prob_low <= self.prob_high <= 1.0:
            raise ValueError(
                f"filter {self.name}: bad interval ({self.prob_low}, {self.prob_high}]"
            )

    def admits(self, nli: NliVerdict) -> bool:
        if nli.label != self.target_label:
            return False
        return self.prob_low < nli.prob(self.target_label) <= self.prob_high


MAIN_FILTER = FilterSpec("main", target_label=-1, prob_low=0.90, prob_high=1.0)
NEUTRAL_ABLATION_FILTER = FilterSpec(
    "neutral-ablation", target_label=0, prob_low=0.50, prob_high=0.80
)
FILTERS = {f.name: f for f in (MAIN_FILTER, NEUTRAL_ABLATION_FILTER)}


def contradiction_filter(nli: NliVerdict, spec: FilterSpec) -> bool:
    """True iff the verdict passes the filter."""
    return spec.admits(nli)


@dataclass(frozen=True)
class FoilRecord:
    pair_id: str
    source: str
    paraphrase: str
    foil: str
    manipulation: AppliedManipulation
    source_graph: str
    foil_graph: str
    nli: NliVerdict
    retained: bool
    filter_name: str
    dataset: str = "custom"

    def __post_init__(self):
        if self.foil == self.source:
            raise ValueError(f"pair {self.pair_id}: foil equals source")

    def to_json(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "source": self.source,
            "paraphrase": self.paraphrase,
            "foil": self.foil,
            "manipulation": self.manipulation.to_json(),
            "source_graph": self.source_graph,
            "foil_graph": self.foil_graph,
            "nli": self.nli.to_json(),
            "retained": self.retained,
            "filter_name": self.filter_name,
            "dataset": self.dataset,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "FoilRecord":
        return cls(
            pair_id=payload["pair_id"],
            source=payload["source"],
            paraphrase=payload["paraphrase"],
            foil=payload["foil"],
            manipulation=AppliedManipulation.from_json(payload["manipulation"]),
            source_graph=payload["source_graph"],
            foil_graph=payload["foil_graph"],
            nli=NliVerdict.from_json(payload["nli"]),
            retained=bool(payload["retained"]),
            filter_name=payload["filter_name"],
            dataset=payload.get("dataset", "custom"),
        )


@dataclass(frozen=True)
class Failure:
    pair_id: str
    reason: str  # parse-fail | generate-fail | not-applicable | nli-fail
    detail: str


@dataclass
class InduceOptions:
    seed: int = 0
    allowed: frozenset[ManipulationType] = frozenset(ManipulationType)
    policy: EligibilityPolicy = DEFAULT_POLICY
    filter_spec: FilterSpec = MAIN_FILTER
    # which text the foil is checked against: the source (default) or the paraphrase
    nli_reference: str = "source"
    workers: int = 4

    def __post_init__(self):
        if self.nli_reference not in ("source", "paraphrase"):
            raise ValueError("nli_reference must be 'source' or 'paraphrase'")
        if not self.allowed:
            raise ValueError("allowed manipulation set is empty")
        self.allowed = frozenset(self.allowed)


@dataclass
class InduceResult:
    records: list[FoilRecord]
    failures: list[Failure]

    @property
    def retained(self) -> list[FoilRecord]:
        return [r for r in self.records if r.retained]


def pair_seed(global_seed: int, pair_id: str) -> int:
    """Stable per-pair seed: adding or removing other pairs never
    reshuffles this pair's draw."""
    digest = hashlib.sha256(pair_id.encode("utf-8")).digest()
    return (global_seed ^ int.from_bytes(digest[:8], "big")) & 0xFFFFFFFFFFFFFFFF


def transform_sentence(
    sentence: str,
    backends: ModelBackends,
    db,
    seed: int,
    allowed: Iterable[ManipulationType] = frozenset(ManipulationType),
    policy: EligibilityPolicy = DEFAULT_POLICY,
) -> tuple[str, AppliedManipulation, str, str]:
    """parse -> manipulate -> generate for one sentence.

    Returns (foil, manipulation, source graph, foil graph).
    """
    source_graph = backends.parse_text(sentence)
    graph = parse_penman(source_graph)
    manipulated, record = apply_random(
        graph, db, seed, allowed=frozenset(allowed), policy=policy
    )
    foil_graph = serialize_penman(manipulated)
    foil = backends.generate_text(foil_graph)
    return foil, record, source_graph, foil_graph


def induce_dataset(
    pairs: list[ParaphrasePair],
    backends: ModelBackends,
    db,
    options: InduceOptions,
) -> InduceResult:
    """Attempt one foil per pair; set ``retained`` by the configured filter.

    Failures are reported with reason codes instead of aborting the run;
    output order matches input order.
    """
    slots: list[FoilRecord | Failure | None] = [None] * len(pairs)

    def work(index: int) -> None:
        pair = pairs[index]
        seed = pair_seed(options.seed, pair.id)
        try:
            try:
                source_graph = backends.parse_text(pair.source)
                graph = parse_penman(source_graph)
            except (TransportError, PenmanError, GraphError) as exc:
                raise _Fail("parse-fail", str(exc)) from None
            try:
                manipulated, record = apply_random(
                    graph, db, seed, allowed=options.allowed, policy=options.policy
                )
            except NoManipulationApplicable as exc:
                raise _Fail("not-applicable", str(exc)) from None
            foil_graph = serialize_penman(manipulated)
            try:
                foil = backends.generate_text(foil_graph)
            except TransportError as exc:
                raise _Fail("generate-fail", str(exc)) from None
            if foil == pair.source:
                raise _Fail("generate-fail", "foil identical to source")
            reference = (
                pair.source if options.nli_reference == "source" else pair.paraphrase
            )
            try:
                verdict = backends.nli_check(reference, foil)
            except TransportError as exc:
                raise _Fail("nli-fail", str(exc)) from None
            slots[index] = FoilRecord(
                pair_id=pair.id,
                source=pair.source,
                paraphrase=pair.paraphrase,
                foil=foil,
                manipulation=record,
                source_graph=source_graph,
                foil_graph=foil_graph,
                nli=verdict,
                retained=options.filter_spec.admits(verdict),
                filter_name=options.filter_spec.name,
                dataset=pair.dataset,
            )
        except _Fail as fail:
            logger.warning("pair %s failed (%s): %s", pair.id, fail.reason, fail.detail)
            slots[index] = Failure(pair.id, fail.reason, fail.detail)

    if options.workers <= 1 or len(pairs) <= 1:
        for i in range(len(pairs)):
            work(i)
    else:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            for future in [pool.submit(work, i) for i in range(len(pairs))]:
                future.result()

    records = [s for s in slots if isinstance(s, FoilRecord)]
    failures = [s for s in slots if isinstance(s, Failure)]
    return InduceResult(records=records, failures=failures)


class _Fail(Exception):
    def __init__(self, reason: str, detail: str):
        super().__init__(detail)
        self.reason = reason
        self.detail = detail


# -- statistics ---------------------------------------------------------


@dataclass(frozen=True)
class StatsReport:
    total_attempted: int
    total_retained: int
    per_type_retained: dict[str, int] = field(default_factory=dict)
    per_type_percent: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "total_attempted": self.total_attempted,
            "total_retained": self.total_retained,
            "per_type_retained": dict(self.per_type_retained),
            "per_type_percent": dict(self.per_type_percent),
        }

    def format_table(self) -> str:
        headers = ["total"] + [m.value + " %" for m in ManipulationType]
        values = [str(self.total_retained)] + [
            f"{self.per_type_percent.get(m.value, 0.0):.1f}" for m in ManipulationType
        ]
        width = [max(len(h), len(v)) for h, v in zip(headers, values)]
        head = "  ".join(h.rjust(w) for h, w in zip(headers, width))
        body = "  ".join(v.rjust(w) for v, w in zip(values, width))
        return head + "\n" + body


def dataset_stats(records: list[FoilRecord]) -> StatsReport:
    """Retained totals and per-manipulation percentages over retained."""
    retained = [r for r in records if r.retained]
    counts: dict[str, int] = {}
    for record in retained:
        kind = record.manipulation.kind.value
        counts[kind] = counts.get(kind, 0) + 1
    total = len(retained)
    percent = {
        kind: 100.0 * n / total for kind, n in counts.items()
    } if total else {}
    return StatsReport(
        total_attempted=len(records),
        total_retained=total,
        per_type_retained=counts,
        per_type_percent=percent,
    )


# -- pair and record files ------------------------------------------------


def read_pairs_jsonl(path, dataset: str | None = None) -> list[ParaphrasePair]:
    """JSON-lines pairs. Accepted row shapes:

    * {"id", "source", "paraphrase"}
    * {"id", "sentence1", "sentence2"}            (PAWS-style)
    * {"text", "paraphrases": [...]}              (GPTP-style; first one)
    """
    pairs: list[ParaphrasePair] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            row = json.loads(line)
            pair_id = str(row.get("id", lineno))
            if "source" in row and "paraphrase" in row:
                source, para = row["source"], row["paraphrase"]
                tag = dataset or row.get("dataset", "custom")
            elif "sentence1" in row and "sentence2" in row:
                if "label" in row and int(row["label"]) != 1:
                    continue
                source, para = row["sentence1"], row["sentence2"]
                tag = dataset or "PAWS"
            elif "text" in row and row.get("paraphrases"):
                source, para = row["text"], row["paraphrases"][0]
                tag = dataset or "GPTP"
            else:
                raise ValueError(f"{path}:{lineno}: unrecognized pair row")
            pairs.append(
                ParaphrasePair(id=pair_id, source=source, paraphrase=para, dataset=tag)
            )
    return pairs


def read_paws_tsv(path, dataset: str = "PAWS") -> list[ParaphrasePair]:
    """PAWS-style TSV (id, sentence1, sentence2, label); keeps label == 1."""
    pairs: list[ParaphrasePair] = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle, delimiter="\t")
        required = {"id", "sentence1", "sentence2", "label"}
        if not required <= set(reader.fieldnames or ()):
            raise ValueError(f"{path}: expected columns {sorted(required)}")
        for row in reader:
            if str(row["label"]).strip() != "1":
                continue
            pairs.append(
                ParaphrasePair(
                    id=str(row["id"]),
                    source=row["sentence1"],
                    paraphrase=row["sentence2"],
                    dataset=dataset,
                )
            )
    return pairs


def read_gptp_csv(path, limit: int | None = None) -> list[ParaphrasePair]:
    """GPTP-style CSV with ``text`` and a stringified ``paraphrases`` list."""
    pairs: list[ParaphrasePair] = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if not {"text", "paraphrases"} <= set(reader.fieldnames or ()):
            raise ValueError(f"{path}: expected columns text, paraphrases")
        for i, row in enumerate(reader):
            if limit is not None and len(pairs) >= limit:
                break
            try:
                listed = ast.literal_eval(row["paraphrases"])
            except (ValueError, SyntaxError):
                continue
            if not listed:
                continue
            pairs.append(
                ParaphrasePair(
                    id=str(i),
                    source=row["text"],
                    paraphrase=str(listed[0]),
                    dataset="GPTP",
                )
            )
    return pairs


def read_pairs(path, dataset: str | None = None) -> list[ParaphrasePair]:
    suffix = Path(path).suffix.lower()
    if suffix == ".tsv":
        return read_paws_tsv(path, dataset=dataset or "PAWS")
    if suffix == ".csv":
        return read_gptp_csv(path)
    return read_pairs_jsonl(path, dataset=dataset)


# Source locations of the two public paraphrase corpora.
PAWS_X_EN_TEST_URL = (
    "https://huggingface.co/datasets/google-research-datasets/paws-x"
    "/resolve/main/x-final/en/test_2k.tsv"
)
GPTP_CSV_URL = (
    "https://huggingface.co/datasets/humarin/chatgpt-paraphrases"
    "/resolve/main/chatgpt_paraphrases.csv"
)


def download_paws(dest, url: str = PAWS_X_EN_TEST_URL, timeout: float = 60.0):
    import requests

    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    response = requests.get(url, timeout=timeout)
    response.raise_for_status()
    dest.write_bytes(response.content)
    return dest


def download_gptp(
    dest,
    url: str = GPTP_CSV_URL,
    max_bytes: int = 64_000_000,
    timeout: float = 60.0,
):
    """Stream the (large) paraphrase CSV and keep a leading slice.

    The last, possibly truncated line is dropped; the tolerant CSV reader
    skips any row whose paraphrase list fails to parse.
    """
    import io

    import requests

    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.BytesIO()
    with requests.get(url, stream=True, timeout=timeout) as response:
        response.raise_for_status()
        for chunk in response.iter_content(1 << 20):
            buffer.write(chunk)
            if buffer.tell() >= max_bytes:
                break
    data = buffer.getvalue()
    cut = data.rfind(b"\n")
    dest.write_bytes(data[: cut + 1] if cut != -1 else data)
    return dest


def write_records(records: Iterable[FoilRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def read_records(path) -> list[FoilRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                records.append(FoilRecord.from_json(json.loads(line)))
    return records
