"""Clients for the four neural capabilities: parse, generate, NLI, embed.

The typed surface is :class:`ModelBackends`; underneath sits a transport
that answers per-item requests. :class:`HttpTransport` groups items into
wire batches for the JSON endpoints, :class:`FixtureTransport` replays
recorded responses for hermetic tests, :class:`RecordingTransport` writes
such recordings, and :class:`CachingTransport` adds a resumable on-disk
response cache. All of them key a logical request by a hash of its
canonical JSON, so cache and fixtures are invariant to batch grouping.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import requests

from .penman import PenmanError, parse_penman

DEFAULT_TIMEOUT = 60.0
DEFAULT_BATCH_SIZE = 16
DEFAULT_MAX_IN_FLIGHT = 8
DEFAULT_RETRIES = 2

BASE_URL_ENV = "SEMFOIL_BASE_URL"
DEFAULT_BASE_URL = "http://localhost:8470"

# Wire order of NLI classes; labels follow check(s, s') in {-1, 0, 1}.
NLI_CLASSES = ("contradiction", "neutral", "entailment")
NLI_LABELS = (-1, 0, 1)

CONTRADICTION, NEUTRAL, ENTAILMENT = NLI_LABELS


class TransportError(Exception):
    """Backend unreachable or returned an unusable response."""


class FixtureMiss(TransportError):
    """No recorded response for this request hash."""


class InvalidBackendGraph(TransportError):
    """The parser endpoint returned text that is not well-formed PENMAN."""


def load_wire_schema() -> dict:
    """The JSON Schema ($defs per endpoint) of the wire format, shipped
    with this package and shared with the model server's contract tests."""
    from importlib import resources

    text = resources.files("semfoil").joinpath("schemas/wire.json").read_text("utf-8")
    return json.loads(text)


def request_hash(endpoint: str, payload: dict) -> str:
    canonical = json.dumps(
        {"endpoint": endpoint, "payload": payload}, sort_keys=True, ensure_ascii=False
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class NliVerdict:
    """Three-way entailment verdict with class probabilities.

    ``label`` is -1 (contradiction), 0 (neutral), or +1 (entailment) and
    always equals the argmax of ``probs`` (ordered contradiction,
    neutral, entailment).
    """

    label: int
    probs: tuple[float, float, float]

    def __post_init__(self):
        if self.label not in NLI_LABELS:
            raise ValueError(f"label must be one of {NLI_LABELS}")
        if len(self.probs) != 3 or any(p < 0 for p in self.probs):
            raise ValueError("probs must be three non-negative reals")
        if abs(sum(self.probs) - 1.0) > 1e-6:
            raise ValueError(f"probs sum to {sum(self.probs)}, not 1")
        if NLI_LABELS[max(range(3), key=self.probs.__getitem__)] != self.label:
            raise ValueError("label must be the argmax class")

    @property
    def prob_of_label(self) -> float:
        return self.probs[NLI_LABELS.index(self.label)]

    def prob(self, label: int) -> float:
        return self.probs[NLI_LABELS.index(label)]

    @classmethod
    def from_probs(cls, probs) -> "NliVerdict":
        probs = tuple(float(p) for p in probs)
        if len(probs) != 3:
            raise ValueError("expected three class probabilities")
        label = NLI_LABELS[max(range(3), key=probs.__getitem__)]
        return cls(label=label, probs=probs)

    def to_json(self) -> dict:
        return {"label": self.label, "probs": list(self.probs)}

    @classmethod
    def from_json(cls, payload: dict) -> "NliVerdict":
        return cls(label=int(payload["label"]), probs=tuple(payload["probs"]))


@dataclass(frozen=True)
class Embedding:
    values: tuple[float, ...]
    model_id: str

    def __post_init__(self):
        if not self.values:
            raise ValueError("empty embedding")


class Transport(Protocol):
    def request(
        self, endpoint: str, items: list[dict], refresh: bool = False
    ) -> list[dict]: ...


_WIRE = {
    # endpoint: (request array key, item request key, response array key, item response key)
    "parse": ("sentences", "sentence", "graphs", "graph"),
    "generate": ("graphs", "graph", "sentences", "sentence"),
    "embed": ("texts", "text", "vectors", "vector"),
}


class HttpTransport:
    """JSON-over-HTTP transport with batching, bounded concurrency, and
    bounded retries (idempotent requests only)."""

    def __init__(
        self,
        base_url: str | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        batch_size: int = DEFAULT_BATCH_SIZE,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        retries: int = DEFAULT_RETRIES,
    ):
        self.base_url = (base_url or os.environ.get(BASE_URL_ENV) or DEFAULT_BASE_URL).rstrip("/")
        self.timeout = timeout
        self.batch_size = max(1, batch_size)
        self.max_in_flight = max(1, max_in_flight)
        self.retries = retries
        self._local = threading.local()

    def _session(self) -> requests.Session:
        session = getattr(self._local, "session", None)
        if session is None:
            session = requests.Session()
            self._local.session = session
        return session

    def _post(self, endpoint: str, body: dict) -> dict:
        url = f"{self.base_url}/{endpoint}"
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._session().post(url, json=body, timeout=self.timeout)
                response.raise_for_status()
                return response.json()
            except (requests.RequestException, ValueError) as exc:
                last = exc
                if attempt < self.retries:
                    time.sleep(0.2 * (attempt + 1))
        raise TransportError(f"POST {url} failed after {self.retries + 1} attempts: {last}")

    def _batch_body(self, endpoint: str, chunk: list[dict]) -> dict:
        if endpoint == "nli":
            return {"pairs": [[item["premise"], item["hypothesis"]] for item in chunk]}
        array_key, item_key, _, _ = _WIRE[endpoint]
        body = {array_key: [item[item_key] for item in chunk]}
        if endpoint == "embed":
            body["model"] = chunk[0]["model"]
        return body

    def _split_response(self, endpoint: str, chunk: list[dict], data: dict) -> list[dict]:
        if endpoint == "nli":
            rows, key = data.get("probs"), "probs"
        else:
            _, _, response_key, key = _WIRE[endpoint]
            rows = data.get(response_key)
        if not isinstance(rows, list) or len(rows) != len(chunk):
            raise TransportError(
                f"/{endpoint} answered {0 if not isinstance(rows, list) else len(rows)}"
                f" results for {len(chunk)} inputs"
            )
        return [{key: row} for row in rows]

    def request(self, endpoint: str, items: list[dict], refresh: bool = False) -> list[dict]:
        if not items:
            return []
        if endpoint == "embed":
            # one model per wire call
            groups: dict[str, list[int]] = {}
            for i, item in enumerate(items):
                groups.setdefault(item["model"], []).append(i)
        else:
            groups = {"": list(range(len(items)))}
        chunks: list[list[int]] = []
        for indexes in groups.values():
            for start in range(0, len(indexes), self.batch_size):
                chunks.append(indexes[start : start + self.batch_size])
        results: list[dict | None] = [None] * len(items)

        def run(chunk_indexes: list[int]) -> None:
            chunk = [items[i] for i in chunk_indexes]
            data = self._post(endpoint, self._batch_body(endpoint, chunk))
            for i, result in zip(chunk_indexes, self._split_response(endpoint, chunk, data)):
                results[i] = result

        if len(chunks) == 1:
            run(chunks[0])
        else:
            with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                for future in [pool.submit(run, c) for c in chunks]:
                    future.result()
        return [r for r in results if r is not None]


class FixtureTransport:
    """Replays recorded responses from JSON-lines of {request-hash, response}."""

    def __init__(self, records: dict[str, dict]):
        self.records = dict(records)

    @classmethod
    def load(cls, path) -> "FixtureTransport":
        records: dict[str, dict] = {}
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                row = json.loads(line)
                records[row["request-hash"]] = row["response"]
        return cls(records)

    def request(self, endpoint: str, items: list[dict], refresh: bool = False) -> list[dict]:
        out = []
        for item in items:
            digest = request_hash(endpoint, item)
            if digest not in self.records:
                raise FixtureMiss(
                    f"no recorded response for /{endpoint} request {json.dumps(item)[:200]}"
                )
            out.append(self.records[digest])
        return out


class RecordingTransport:
    """Forwards to a live transport and appends fixture JSON-lines."""

    def __init__(self, inner: Transport, path):
        self.inner = inner
        self.path = Path(path)
        self._lock = threading.Lock()

    def request(self, endpoint: str, items: list[dict], refresh: bool = False) -> list[dict]:
        responses = self.inner.request(endpoint, items, refresh=refresh)
        with self._lock, open(self.path, "a", encoding="utf-8") as handle:
            for item, response in zip(items, responses):
                handle.write(
                    json.dumps(
                        {
                            "request-hash": request_hash(endpoint, item),
                            "endpoint": endpoint,
                            "request": item,
                            "response": response,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        return responses


class CachingTransport:
    """Per-item disk cache keyed by (endpoint, request-hash).

    Entries are single JSON files written atomically (temp file + rename),
    so concurrent writers are safe and interrupted runs resume.
    """

    def __init__(self, inner: Transport, cache_dir):
        self.inner = inner
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, endpoint: str, digest: str) -> Path:
        return self.cache_dir / endpoint / digest[:2] / f"{digest}.json"

    def request(self, endpoint: str, items: list[dict], refresh: bool = False) -> list[dict]:
        digests = [request_hash(endpoint, item) for item in items]
        results: list[dict | None] = [None] * len(items)
        missing: list[int] = []
        for i, digest in enumerate(digests):
            path = self._path(endpoint, digest)
            if refresh or not path.is_file():
                missing.append(i)
                continue
            try:
                results[i] = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                missing.append(i)
        if missing:
            fresh = self.inner.request(
                endpoint, [items[i] for i in missing], refresh=refresh
            )
            for i, response in zip(missing, fresh):
                results[i] = response
                self._store(endpoint, digests[i], response)
        return [r for r in results if r is not None]

    def _store(self, endpoint: str, digest: str, response: dict) -> None:
        path = self._path(endpoint, digest)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, temp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(response, handle, ensure_ascii=False)
            os.replace(temp, path)
        except OSError:
            if os.path.exists(temp):
                os.unlink(temp)
            raise


class ModelBackends:
    """Typed operations over a transport, with response validation."""

    def __init__(self, transport: Transport, nli_symmetric: bool = False):
        self.transport = transport
        self.nli_symmetric = nli_symmetric

    # -- parsing -------------------------------------------------------

    def parse_texts(self, sentences: list[str]) -> list[str]:
        for sentence in sentences:
            if not sentence.strip():
                raise ValueError("cannot parse an empty sentence")
        items = [{"sentence": s} for s in sentences]
        responses = self.transport.request("parse", items)
        graphs: list[str] = []
        for item, response in zip(items, responses):
            graph = response.get("graph", "")
            try:
                parse_penman(graph)
            except PenmanError:
                # one bounded re-request, bypassing any cache
                response = self.transport.request("parse", [item], refresh=True)[0]
                graph = response.get("graph", "")
                try:
                    parse_penman(graph)
                except PenmanError as exc:
                    raise InvalidBackendGraph(
                        f"parser returned malformed PENMAN for {item['sentence']!r}: {exc}"
                    ) from None
            graphs.append(graph)
        return graphs

    def parse_text(self, sentence: str) -> str:
        return self.parse_texts([sentence])[0]

    # -- generation ----------------------------------------------------

    def generate_texts(self, graphs: list[str]) -> list[str]:
        for graph in graphs:
            parse_penman(graph)  # refuse to send malformed graphs
        responses = self.transport.request(
            "generate", [{"graph": g} for g in graphs]
        )
        sentences = [r.get("sentence", "") for r in responses]
        for graph, sentence in zip(graphs, sentences):
            if not sentence.strip():
                raise TransportError(f"empty generation for graph {graph[:80]!r}")
        return sentences

    def generate_text(self, graph: str) -> str:
        return self.generate_texts([graph])[0]

    # -- NLI -----------------------------------------------------------

    def nli_checks(self, pairs: list[tuple[str, str]]) -> list[NliVerdict]:
        for premise, hypothesis in pairs:
            if not premise.strip() or not hypothesis.strip():
                raise ValueError("NLI texts must be non-empty")
        items = [{"premise": p, "hypothesis": h} for p, h in pairs]
        responses = self.transport.request("nli", items)
        forward = [NliVerdict.from_probs(r["probs"]) for r in responses]
        if not self.nli_symmetric:
            return forward
        reverse_items = [{"premise": h, "hypothesis": p} for p, h in pairs]
        reverse = [
            NliVerdict.from_probs(r["probs"])
            for r in self.transport.request("nli", reverse_items)
        ]
        merged = []
        for fwd, rev in zip(forward, reverse):
            probs = tuple((a + b) / 2 for a, b in zip(fwd.probs, rev.probs))
            merged.append(NliVerdict.from_probs(probs))
        return merged

    def nli_check(self, premise: str, hypothesis: str) -> NliVerdict:
        return self.nli_checks([(premise, hypothesis)])[0]

    # -- embeddings ------------------------------------------------------

    def embed(self, texts: list[str], model_id: str) -> list[Embedding]:
        if not texts:
            raise ValueError("empty embedding batch")
        responses = self.transport.request(
            "embed", [{"model": model_id, "text": t} for t in texts]
        )
        vectors = [tuple(float(x) for x in r["vector"]) for r in responses]
        lengths = {len(v) for v in vectors}
        if len(lengths) != 1:
            raise TransportError(f"inconsistent embedding dimensions {sorted(lengths)}")
        return [Embedding(values=v, model_id=model_id) for v in vectors]


def build_transport(
    base_url: str | None = None,
    fixtures: str | None = None,
    record: str | None = None,
    cache_dir: str | None = None,
    timeout: float = DEFAULT_TIMEOUT,
    batch_size: int = DEFAULT_BATCH_SIZE,
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
) -> Transport:
    """Compose the transport stack: fixtures replace HTTP entirely;
    recording and caching wrap the live transport."""
    if fixtures:
        return FixtureTransport.load(fixtures)
    transport: Transport = HttpTransport(
        base_url=base_url,
        timeout=timeout,
        batch_size=batch_size,
        max_in_flight=max_in_flight,
    )
    if record:
        transport = RecordingTransport(transport, record)
    if cache_dir:
        transport = CachingTransport(transport, cache_dir)
    return transport
