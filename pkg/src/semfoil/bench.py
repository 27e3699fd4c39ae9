"""Evaluation metrics and the embedding-model benchmark harness.

Scores a model on (source, paraphrase, foil) triples: triplet accuracy
(strict sim(s,p) > sim(s,f)), rank-based ROC AUC over the dichotomized
pairs (exact Mann-Whitney statistic with half credit for ties), their
harmonic mean, and per-manipulation breakdowns. Also houses Spearman rank
correlation for ranking comparisons and bag-of-words Jaccard divergence
for corpus statistics.
"""

from __future__ import annotations

import csv
import json
import math
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .backends import Embedding, ModelBackends
from .stopwords import ENGLISH_STOPWORDS
from .transforms import ManipulationType

TYPE_ORDER = [m.value for m in ManipulationType]
AVG_KEY = "AVG"


@dataclass(frozen=True)
class SimilarityTriple:
    """Cosine similarities of one benchmark row."""

    sim_sp: float
    sim_sf: float
    type: ManipulationType

    def __post_init__(self):
        for value in (self.sim_sp, self.sim_sf):
            if not -1.0 - 1e-9 <= value <= 1.0 + 1e-9:
                raise ValueError(f"cosine similarity {value} outside [-1, 1]")


@dataclass(frozen=True)
class EvalReport:
    model_id: str
    tacc: float
    auc: float
    hmean: float
    per_type_tacc: dict[str, float]
    per_type_n: dict[str, int]
    n_triples: int

    def to_json(self) -> dict:
        return {
            "model_id": self.model_id,
            "tacc": self.tacc,
            "auc": self.auc,
            "hmean": self.hmean,
            "per_type_tacc": dict(self.per_type_tacc),
            "per_type_n": dict(self.per_type_n),
            "n_triples": self.n_triples,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "EvalReport":
        return cls(
            model_id=payload["model_id"],
            tacc=float(payload["tacc"]),
            auc=float(payload["auc"]),
            hmean=float(payload["hmean"]),
            per_type_tacc={k: float(v) for k, v in payload["per_type_tacc"].items()},
            per_type_n={k: int(v) for k, v in payload["per_type_n"].items()},
            n_triples=int(payload["n_triples"]),
        )


def _values(vector) -> Sequence[float]:
    return vector.values if isinstance(vector, Embedding) else vector


def cosine(a, b) -> float:
    """Cosine similarity of two equal-dimension, non-zero vectors."""
    va, vb = _values(a), _values(b)
    if len(va) != len(vb):
        raise ValueError(f"dimension mismatch: {len(va)} vs {len(vb)}")
    dot = sum(x * y for x, y in zip(va, vb))
    na = math.sqrt(sum(x * x for x in va))
    nb = math.sqrt(sum(y * y for y in vb))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for a zero vector")
    return dot / (na * nb)


def tacc(triples: Sequence[SimilarityTriple]) -> float:
    """Fraction of triples ranking the paraphrase strictly above the foil.

    Ties count as failures.
    """
    if not triples:
        raise ValueError("tacc of an empty triple set")
    wins = sum(1 for t in triples if t.sim_sp > t.sim_sf)
    return wins / len(triples)


def _average_ranks(scores: Sequence[float]) -> list[float]:
    order = sorted(range(len(scores)), key=scores.__getitem__)
    ranks = [0.0] * len(scores)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        rank = (i + j) / 2 + 1  # mean of 1-based ranks i+1..j+1
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def auc(pos: Sequence[float], neg: Sequence[float]) -> float:
    """Area under the ROC curve as the exact rank statistic.

    Equals P(pos > neg) + 0.5 * P(pos = neg) over all pairs, computed by
    average ranks in O(n log n); identical to trapezoidal ROC integration.
    """
    if not pos or not neg:
        raise ValueError("auc requires at least one score in each class")
    ranks = _average_ranks(list(pos) + list(neg))
    rank_sum = sum(ranks[: len(pos)])
    u = rank_sum - len(pos) * (len(pos) + 1) / 2
    return u / (len(pos) * len(neg))


def harmonic_mean(a: float, b: float) -> float:
    if a < 0 or b < 0:
        raise ValueError("harmonic mean of negative values")
    if a + b == 0:
        return 0.0
    return 2 * a * b / (a + b)


def per_type_tacc(triples: Sequence[SimilarityTriple]) -> dict[str, float]:
    """TACC restricted to each manipulation type, plus an unweighted AVG."""
    grouped: dict[str, list[SimilarityTriple]] = {}
    for t in triples:
        grouped.setdefault(t.type.value, []).append(t)
    out = {kind: tacc(members) for kind, members in grouped.items()}
    if out:
        out[AVG_KEY] = sum(out.values()) / len(out)
    return out


def spearman(rank_a: Sequence[float], rank_b: Sequence[float]) -> float:
    """Spearman rank correlation with average ranks for ties."""
    if len(rank_a) != len(rank_b):
        raise ValueError("rankings differ in length")
    if len(rank_a) < 2:
        raise ValueError("need at least two items")
    ra = _average_ranks([float(x) for x in rank_a])
    rb = _average_ranks([float(x) for x in rank_b])
    mean_a = sum(ra) / len(ra)
    mean_b = sum(rb) / len(rb)
    cov = sum((x - mean_a) * (y - mean_b) for x, y in zip(ra, rb))
    var_a = sum((x - mean_a) ** 2 for x in ra)
    var_b = sum((y - mean_b) ** 2 for y in rb)
    if var_a == 0 or var_b == 0:
        raise ValueError("constant ranking has no rank correlation")
    return cov / math.sqrt(var_a * var_b)


def tokens(text: str, use_stopwords_filter: bool = False) -> set[str]:
    """Lowercased, punctuation-stripped, whitespace-split token set."""
    lowered = text.lower()
    cleaned = "".join(
        c for c in lowered if not unicodedata.category(c).startswith("P")
    )
    out = set(cleaned.split())
    if use_stopwords_filter:
        out -= ENGLISH_STOPWORDS
    return out


def jaccard_similarity(a: str, b: str, use_stopwords_filter: bool = False) -> float:
    ta = tokens(a, use_stopwords_filter)
    tb = tokens(b, use_stopwords_filter)
    if not ta or not tb:
        raise ValueError("empty token set after tokenization")
    return len(ta & tb) / len(ta | tb)


def jaccard_divergence(a: str, b: str, use_stopwords_filter: bool = False) -> float:
    """1 - Jaccard similarity of the two bag-of-words token sets."""
    return 1.0 - jaccard_similarity(a, b, use_stopwords_filter)


def similarity_triples(
    records, backends: ModelBackends, model_id: str
) -> list[SimilarityTriple]:
    """Embed each distinct text once and compute per-record similarities."""
    texts: list[str] = []
    index: dict[str, int] = {}
    for record in records:
        for text in (record.source, record.paraphrase, record.foil):
            if text not in index:
                index[text] = len(texts)
                texts.append(text)
    vectors = backends.embed(texts, model_id=model_id)
    triples = []
    for record in records:
        s = vectors[index[record.source]]
        p = vectors[index[record.paraphrase]]
        f = vectors[index[record.foil]]
        triples.append(
            SimilarityTriple(
                sim_sp=cosine(s, p),
                sim_sf=cosine(s, f),
                type=record.manipulation.kind,
            )
        )
    return triples


def evaluate_model(records, backends: ModelBackends, model_id: str) -> EvalReport:
    """Score one embedding model on retained foil records."""
    records = [r for r in records if r.retained]
    if not records:
        raise ValueError("no retained records to evaluate")
    triples = similarity_triples(records, backends, model_id)
    t = tacc(triples)
    a = auc([x.sim_sp for x in triples], [x.sim_sf for x in triples])
    per_type = per_type_tacc(triples)
    counts: dict[str, int] = {}
    for triple in triples:
        counts[triple.type.value] = counts.get(triple.type.value, 0) + 1
    return EvalReport(
        model_id=model_id,
        tacc=t,
        auc=a,
        hmean=harmonic_mean(t, a),
        per_type_tacc=per_type,
        per_type_n=counts,
        n_triples=len(triples),
    )


# -- report files -------------------------------------------------------

METRIC_COLUMNS = ["model", "tacc", "auc", "hmean", "n_triples"]
PER_TYPE_COLUMNS = ["model"] + TYPE_ORDER + [AVG_KEY]


def write_report_json(report: EvalReport, path) -> None:
    Path(path).write_text(
        json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def read_report_json(path) -> EvalReport:
    return EvalReport.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def write_metric_matrix(reports: Iterable[EvalReport], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(METRIC_COLUMNS)
        for r in reports:
            writer.writerow(
                [r.model_id, f"{r.tacc:.6f}", f"{r.auc:.6f}", f"{r.hmean:.6f}", r.n_triples]
            )


def write_per_type_matrix(reports: Iterable[EvalReport], path) -> None:
    """Grouped-bar data: one row per model, one column per manipulation."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(PER_TYPE_COLUMNS)
        for r in reports:
            row = [r.model_id]
            for kind in TYPE_ORDER + [AVG_KEY]:
                value = r.per_type_tacc.get(kind)
                row.append("" if value is None else f"{value:.6f}")
            writer.writerow(row)


def macro_average(values: Sequence[float]) -> float:
    """Arithmetic mean across datasets: the AVG column of the headline
    results table (a mean of per-dataset harmonic means)."""
    if not values:
        raise ValueError("no values to average")
    return sum(values) / len(values)


def read_ranking_csv(path) -> dict[str, float]:
    """Two-column (model, score) CSV; a header row is permitted."""
    scores: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        for row in csv.reader(handle):
            if len(row) < 2:
                continue
            try:
                scores[row[0]] = float(row[1])
            except ValueError:
                continue  # header
    if not scores:
        raise ValueError(f"no (model, score) rows in {path}")
    return scores


def compare_rankings(a: dict[str, float], b: dict[str, float]) -> tuple[float, int]:
    """Spearman correlation over the models present in both rankings."""
    shared = sorted(set(a) & set(b))
    if len(shared) < 2:
        raise ValueError("fewer than two models shared between rankings")
    return spearman([a[m] for m in shared], [b[m] for m in shared]), len(shared)
