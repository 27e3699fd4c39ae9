"""Model capabilities: parsing, generation, NLI, embedding.

Each capability is a callable object loaded once at startup. Real
checkpoints are loaded lazily per library (transformers,
sentence-transformers, amrlib); the ``stub`` identifier selects a
dependency-free deterministic implementation so the full wire contract
can run hermetically. A per-capability lock serializes inference, which
keeps single-GPU deployments safe under concurrent requests.
"""

from __future__ import annotations

import hashlib
import math
import re
import threading
from dataclasses import dataclass, field

from .config import STUB

NEGATORS = {"not", "no", "never", "n't", "nt"}

_WORD_RE = re.compile(r"[a-z0-9']+")


class ModelLoadError(RuntimeError):
    """A configured checkpoint could not be loaded at startup."""


class InvalidGraph(ValueError):
    """A /generate input is not a well-formed PENMAN graph."""


def check_penman(graph: str) -> None:
    """Minimal well-formedness check, independent of any client library:
    balanced parentheses outside quotes, at least one concept slash, and
    a parenthesized top level."""
    text = graph.strip()
    if not text.startswith("("):
        raise InvalidGraph("graph must start with '('")
    depth = 0
    in_string = False
    for ch in text:
        if ch == '"':
            in_string = not in_string
        elif not in_string:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth < 0:
                    raise InvalidGraph("unbalanced ')'")
    if in_string:
        raise InvalidGraph("unterminated string")
    if depth != 0:
        raise InvalidGraph("unbalanced '('")
    if "/" not in text:
        raise InvalidGraph("graph declares no concept")


def _words(sentence: str) -> list[str]:
    return _WORD_RE.findall(sentence.lower().replace("n't", " n't"))


# -- stub capabilities ----------------------------------------------------


class StubParser:
    """Deterministic sentence -> star-shaped graph encoding.

    The first content word becomes the root concept; every following word
    hangs off it under :opN. 'not' attaches as :polarity - on the word it
    precedes. The stub generator inverts this encoding exactly.
    """

    model_id = STUB

    def __call__(self, sentences: list[str]) -> list[str]:
        return [self._parse_one(s) for s in sentences]

    def _parse_one(self, sentence: str) -> str:
        words = _words(sentence)
        if not words:
            words = ["blank"]
        negated: set[int] = set()
        content: list[str] = []
        for word in words:
            if word in NEGATORS:
                negated.add(len(content))
                continue
            content.append(word)
        if not content:
            content = ["blank"]
        var_names: list[str] = []
        used: set[str] = set()
        for word in content:
            base = word[0] if word[0].isalpha() else "x"
            name = base
            k = 2
            while name in used:
                name = f"{base}{k}"
                k += 1
            used.add(name)
            var_names.append(name)
        parts = [f"({var_names[0]} / {content[0]}"]
        if 0 in negated:
            parts.append("    :polarity -")
        for i in range(1, len(content)):
            child = f"({var_names[i]} / {content[i]}"
            if i in negated:
                child += " :polarity -"
            child += ")"
            parts.append(f"    :op{i} {child}")
        return "\n".join(parts) + ")"


class StubGenerator:
    """Inverse of :class:`StubParser`: rebuilds the word sequence, realizes
    ``:polarity -`` as 'not', capitalizes, and adds a period.

    A small depth-tracking scan attributes each ``:polarity -`` to the
    node whose parentheses enclose it, wherever it sits among the
    node's children.
    """

    model_id = STUB

    _token_re = re.compile(r"\(\s*([^\s()\"/]+)\s*/\s*([^\s()\"]+)|\)|:polarity\s+-")

    def __call__(self, graphs: list[str]) -> list[str]:
        return [self._generate_one(g) for g in graphs]

    def _generate_one(self, graph: str) -> str:
        check_penman(graph)
        flat = " ".join(graph.split())
        nodes: list[tuple[str, bool]] = []  # (concept, negated), in order
        stack: list[int] = []  # node indexes enclosing the cursor
        for match in self._token_re.finditer(flat):
            token = match.group(0)
            if token == ")":
                if stack:
                    stack.pop()
            elif token.startswith(":polarity"):
                if stack:
                    concept, _ = nodes[stack[-1]]
                    nodes[stack[-1]] = (concept, True)
            else:
                stack.append(len(nodes))
                nodes.append((match.group(2), False))
        if not nodes:
            raise InvalidGraph("no concept nodes found")
        words: list[str] = []
        for concept, negated in nodes:
            if negated:
                words.append("not")
            words.append(concept.replace("-", " "))
        sentence = " ".join(words)
        return sentence[:1].upper() + sentence[1:] + "."


class StubNli:
    """Deterministic three-way verdict from token overlap and negation.

    Class order on the wire is contradiction, neutral, entailment.
    """

    model_id = STUB

    def __call__(self, pairs: list[tuple[str, str]]) -> list[list[float]]:
        return [self._score(p, h) for p, h in pairs]

    def _score(self, premise: str, hypothesis: str) -> list[float]:
        a = set(_words(premise))
        b = set(_words(hypothesis))
        neg_a = len(a & NEGATORS)
        neg_b = len(b & NEGATORS)
        content_a = a - NEGATORS
        content_b = b - NEGATORS
        union = content_a | content_b
        overlap = len(content_a & content_b) / len(union) if union else 1.0
        if neg_a != neg_b:
            c = 0.88 + 0.11 * overlap
            rest = 1.0 - c
            probs = [c, rest * 0.7, rest * 0.3]
        elif content_a == content_b:
            probs = [0.01, 0.03, 0.96]
        elif overlap >= 0.6:
            e = 0.55 + 0.40 * overlap
            rest = 1.0 - e
            probs = [rest * 0.3, rest * 0.7, e]
        else:
            n = 0.55 + 0.30 * (1.0 - overlap)
            rest = 1.0 - n
            probs = [rest * 0.5, n, rest * 0.5]
        total = sum(probs)
        return [p / total for p in probs]


class StubEmbedder:
    """Hash-seeded unit vectors: equal text, equal vector; 64 dimensions."""

    dimension = 64

    def __init__(self, model_id: str = STUB):
        self.model_id = model_id

    def __call__(self, texts: list[str]) -> list[list[float]]:
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> list[float]:
        values: list[float] = []
        counter = 0
        while len(values) < self.dimension:
            digest = hashlib.sha256(
                f"{self.model_id}\x00{text}\x00{counter}".encode("utf-8")
            ).digest()
            for i in range(0, len(digest) - 3, 4):
                raw = int.from_bytes(digest[i : i + 4], "big")
                values.append(raw / 2**31 - 1.0)
                if len(values) == self.dimension:
                    break
            counter += 1
        norm = math.sqrt(sum(v * v for v in values)) or 1.0
        return [v / norm for v in values]


# -- real model loaders -----------------------------------------------------


class TransformersNli:
    """Sequence-classification NLI with output reordered to the fixed
    (contradiction, neutral, entailment) wire order via id2label."""

    def __init__(self, model_id: str, device: str = "cpu"):
        try:
            import torch
            from transformers import (
                AutoModelForSequenceClassification,
                AutoTokenizer,
            )
        except ImportError as exc:
            raise ModelLoadError(
                f"transformers/torch not installed; cannot load {model_id!r}"
            ) from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_id)
            self.model = AutoModelForSequenceClassification.from_pretrained(model_id)
        except Exception as exc:
            raise ModelLoadError(f"cannot load NLI model {model_id!r}: {exc}") from exc
        self.model.to(device).eval()
        self.device = device
        self.model_id = model_id
        self._torch = torch
        id2label = {
            int(k): v.lower() for k, v in self.model.config.id2label.items()
        }
        order = []
        for wanted in ("contradiction", "neutral", "entailment"):
            matches = [i for i, name in id2label.items() if wanted in name]
            if len(matches) != 1:
                raise ModelLoadError(
                    f"{model_id!r}: cannot map labels {id2label} to "
                    "(contradiction, neutral, entailment)"
                )
            order.append(matches[0])
        self._order = order

    def __call__(self, pairs: list[tuple[str, str]]) -> list[list[float]]:
        torch = self._torch
        premises = [p for p, _ in pairs]
        hypotheses = [h for _, h in pairs]
        batch = self.tokenizer(
            premises, hypotheses, padding=True, truncation=True, return_tensors="pt"
        ).to(self.device)
        with torch.no_grad():
            logits = self.model(**batch).logits
        probs = torch.softmax(logits, dim=-1).cpu().tolist()
        return [[row[i] for i in self._order] for row in probs]


class SentenceEmbedder:
    def __init__(self, model_id: str, device: str = "cpu"):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadError(
                f"sentence-transformers not installed; cannot load {model_id!r}"
            ) from exc
        try:
            self.model = SentenceTransformer(model_id, device=device)
        except Exception as exc:
            raise ModelLoadError(
                f"cannot load embedding model {model_id!r}: {exc}"
            ) from exc
        self.model_id = model_id

    def __call__(self, texts: list[str]) -> list[list[float]]:
        return self.model.encode(
            texts, convert_to_numpy=True, normalize_embeddings=False
        ).tolist()


class AmrlibParser:
    def __init__(self, model_id: str, device: str = "cpu"):
        try:
            import amrlib
        except ImportError as exc:
            raise ModelLoadError(
                f"amrlib not installed; cannot load parser {model_id!r}"
            ) from exc
        try:
            self.model = amrlib.load_stog_model(model_dir=model_id, device=device)
        except Exception as exc:
            raise ModelLoadError(f"cannot load parser {model_id!r}: {exc}") from exc
        self.model_id = model_id

    def __call__(self, sentences: list[str]) -> list[str]:
        graphs = self.model.parse_sents(sentences, add_metadata=False)
        return [g if g else "(a / amr-empty)" for g in graphs]


class AmrlibGenerator:
    def __init__(self, model_id: str, device: str = "cpu"):
        try:
            import amrlib
        except ImportError as exc:
            raise ModelLoadError(
                f"amrlib not installed; cannot load generator {model_id!r}"
            ) from exc
        try:
            self.model = amrlib.load_gtos_model(model_dir=model_id, device=device)
        except Exception as exc:
            raise ModelLoadError(f"cannot load generator {model_id!r}: {exc}") from exc
        self.model_id = model_id

    def __call__(self, graphs: list[str]) -> list[str]:
        # beam decoding without sampling keeps outputs reproducible
        sentences, _ = self.model.generate(graphs, disable_progress=True)
        return sentences


# -- capability registry ----------------------------------------------------


@dataclass
class Capability:
    name: str
    runner: object | None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def loaded(self) -> bool:
        return self.runner is not None

    def run(self, payload):
        if self.runner is None:
            raise RuntimeError(f"{self.name} model not loaded")
        with self.lock:
            return self.runner(payload)


class CapabilitySet:
    """All four capabilities plus the embedder allow-list."""

    def __init__(self, config):
        self.config = config
        self.parser = Capability(
            "parser", self._load(config.parser_model, StubParser, AmrlibParser)
        )
        self.generator = Capability(
            "generator",
            self._load(config.generator_model, StubGenerator, AmrlibGenerator),
        )
        self.nli = Capability(
            "nli", self._load(config.nli_model, StubNli, TransformersNli)
        )
        self.embedders: dict[str, Capability] = {}
        for model_id in config.embedder_models:
            runner = (
                StubEmbedder(model_id)
                if model_id == STUB
                else SentenceEmbedder(model_id, device=config.device)
            )
            self.embedders[model_id] = Capability(f"embedder:{model_id}", runner)

    def _load(self, model_id, stub_cls, real_cls):
        if model_id is None:
            return None
        if model_id == STUB:
            return stub_cls()
        return real_cls(model_id, device=self.config.device)

    def inventory(self) -> dict:
        return {
            "parser": self.config.parser_model,
            "generator": self.config.generator_model,
            "nli": self.config.nli_model,
            "embedders": sorted(self.embedders),
            "device": self.config.device,
        }
