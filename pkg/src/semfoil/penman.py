"""PENMAN notation: parsing, serialization, and corpus IO.

Parsing normalizes inverse roles (``:ARG0-of`` and friends, with the
conventional ``:consist-of`` exemption) into forward edges, collapses
reentrant mentions into a single instance triple, and reports syntax
errors with line/column positions. Serialization is deterministic:
children are ordered by (role, target) and reentrancies are emitted as
bare variable references after the first mention.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

from .graph import AmrGraph, Attribute, GraphError, Instance, Relation

PenmanText = str

CONSIST_OF = ":consist-of"

_ATOM_RE = re.compile(r'[^\s()"/]+')
_METADATA_PREFIX = "# ::"


class PenmanError(ValueError):
    """Malformed PENMAN input, with 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def is_inverse_role(role: str) -> bool:
    """True for invertible ``-of`` roles; ``:consist-of`` is a plain role."""
    return role.endswith("-of") and role != CONSIST_OF and len(role) > len(":-of")


def invert_role(role: str) -> str:
    return role[: -len("-of")] if is_inverse_role(role) else role + "-of"


@dataclass(frozen=True)
class _Token:
    kind: str  # lparen rparen slash role string atom
    text: str
    line: int
    column: int


def _tokenize(text: str, line_offset: int = 0) -> Iterator[_Token]:
    line = 1 + line_offset
    column = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            column = 1
            i += 1
            continue
        if ch.isspace():
            column += 1
            i += 1
            continue
        if ch == "(":
            yield _Token("lparen", "(", line, column)
            i += 1
            column += 1
        elif ch == ")":
            yield _Token("rparen", ")", line, column)
            i += 1
            column += 1
        elif ch == "/":
            yield _Token("slash", "/", line, column)
            i += 1
            column += 1
        elif ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise PenmanError("unterminated string constant", line, column)
                j += 1
            if j >= n:
                raise PenmanError("unterminated string constant", line, column)
            yield _Token("string", text[i : j + 1], line, column)
            column += j + 1 - i
            i = j + 1
        elif ch == ":":
            m = _ATOM_RE.match(text, i)
            assert m is not None
            yield _Token("role", m.group(), line, column)
            column += m.end() - i
            i = m.end()
        else:
            m = _ATOM_RE.match(text, i)
            if m is None:
                raise PenmanError(f"unexpected character {ch!r}", line, column)
            yield _Token("atom", m.group(), line, column)
            column += m.end() - i
            i = m.end()


class _Parser:
    def __init__(self, tokens: list[_Token], strip_wiki: bool):
        self.tokens = tokens
        self.pos = 0
        self.strip_wiki = strip_wiki
        self.instances: list[Instance] = []
        self.declared: set[str] = set()
        self.relations: list[Relation] = []
        self.attributes: list[Attribute] = []
        # Bare atoms resolve after all declarations are known.
        self.pending: list[tuple[str, str, _Token, bool]] = []

    def _fail(self, message: str, token: _Token | None = None) -> PenmanError:
        if token is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            return PenmanError(message, last.line, last.column + len(last.text))
        return PenmanError(message, token.line, token.column)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok is None:
            raise self._fail(f"unexpected end of input, expected {what}")
        if tok.kind != kind:
            raise self._fail(f"expected {what}, found {tok.text!r}", tok)
        self.pos += 1
        return tok

    def parse(self) -> AmrGraph:
        root = self.parse_node()
        trailing = self.peek()
        if trailing is not None:
            raise self._fail("trailing input after graph", trailing)
        relations = list(self.relations)
        attributes = list(self.attributes)
        for role, src, token, inverse in self.pending:
            if token.text in self.declared:
                edge = (token.text, role[: -len("-of")], src) if inverse else (src, role, token.text)
                relations.append(edge)
            elif inverse:
                raise self._fail(
                    f"inverse role {role} references undeclared variable {token.text!r}",
                    token,
                )
            else:
                attributes.append((src, role, token.text))
        return AmrGraph(
            root=root,
            instances=frozenset(self.instances),
            relations=frozenset(relations),
            attributes=frozenset(attributes),
        )

    def parse_node(self) -> str:
        self.take("lparen", "'('")
        var_tok = self.take("atom", "a variable")
        var = var_tok.text
        self.take("slash", "'/'")
        concept_tok = self.take("atom", "a concept")
        if var in self.declared:
            raise self._fail(f"duplicate concept for variable {var!r}", concept_tok)
        self.declared.add(var)
        self.instances.append((var, concept_tok.text))
        while True:
            tok = self.peek()
            if tok is None:
                raise self._fail("unexpected end of input, expected ':role' or ')'")
            if tok.kind == "rparen":
                self.pos += 1
                return var
            if tok.kind != "role":
                raise self._fail(f"expected ':role' or ')', found {tok.text!r}", tok)
            self.pos += 1
            self.parse_argument(var, tok)

    def parse_argument(self, src: str, role_tok: _Token) -> None:
        role = role_tok.text
        inverse = is_inverse_role(role)
        skip = self.strip_wiki and role == ":wiki"
        tok = self.peek()
        if tok is None:
            raise self._fail(f"missing value for role {role}")
        if tok.kind == "lparen":
            # Node-valued :wiki is never stripped; only constants are.
            child = self.parse_node()
            if inverse:
                self.relations.append((child, role[: -len("-of")], src))
            else:
                self.relations.append((src, role, child))
        elif tok.kind == "string":
            self.pos += 1
            if skip:
                return
            if inverse:
                raise self._fail(
                    f"inverse role {role} cannot take a constant", tok
                )
            self.attributes.append((src, role, tok.text))
        elif tok.kind == "atom":
            self.pos += 1
            if not skip:
                self.pending.append((role, src, tok, inverse))
        else:
            raise self._fail(
                f"expected a node, variable, or constant after {role}", tok
            )


def split_metadata(text: str) -> tuple[tuple[str, ...], str, int]:
    """Split leading comment lines from the graph body.

    Returns (metadata lines, body, number of lines preceding the body).
    Only ``# ::`` lines are kept as metadata; other comment lines are
    dropped. They are never interpreted.
    """
    metadata: list[str] = []
    body_lines: list[str] = []
    offset = 0
    in_header = True
    for idx, line in enumerate(text.splitlines()):
        stripped = line.strip()
        if in_header and (not stripped or stripped.startswith("#")):
            if stripped.startswith(_METADATA_PREFIX):
                metadata.append(stripped)
            offset = idx + 1
            continue
        in_header = False
        body_lines.append(line)
    return tuple(metadata), "\n".join(body_lines), offset


def parse_penman(text: PenmanText, strip_wiki: bool = False) -> AmrGraph:
    """Parse one graph from PENMAN notation.

    Raises :class:`PenmanError` with position information on malformed
    input, a duplicated concept, or an undeclared variable under an
    inverse role. The result satisfies all AmrGraph invariants.
    """
    metadata, body, offset = split_metadata(text)
    if not body.strip():
        raise PenmanError("empty input", 1 + offset, 1)
    tokens = list(_tokenize(body, line_offset=offset))
    graph = _Parser(tokens, strip_wiki=strip_wiki).parse()
    graph = graph.replace(metadata=metadata)
    graph.validate()
    return graph


def serialize_penman(graph: AmrGraph, indent: int = 4) -> PenmanText:
    """Render a graph in canonical PENMAN form.

    Deterministic: children of each node are ordered by (role, target);
    every variable is introduced with ``/`` exactly once, at its first
    depth-first mention, and later mentions are bare references. An edge
    is emitted with an ``-of``-inverted role only when the traversal must
    cross it against its direction; valid root-reachable graphs therefore
    serialize without inverse roles.
    """
    graph.validate()
    incident: dict[str, list[tuple[str, str, Relation, str]]] = {
        v: [] for v in graph.variables
    }
    for edge in graph.relations:
        src, role, tgt = edge
        incident[src].append((role, tgt, edge, "fwd"))
        incident[tgt].append((invert_role(role), src, edge, "back"))
    for attr in graph.attributes:
        var, role, value = attr
        incident[var].append((role, value, attr, "attr"))
    introduced: set[str] = set()
    emitted: set[tuple] = set()

    def render(var: str, depth: int) -> str:
        introduced.add(var)
        parts = [f"({var} / {graph.concepts[var]}"]
        pad = "\n" + " " * (indent * (depth + 1))
        for role, target, edge, kind in sorted(
            incident[var], key=lambda c: (c[0], c[1])
        ):
            if edge in emitted:
                continue
            if kind == "back" and edge[0] in introduced:
                # The source's own visit emits this edge forward.
                continue
            emitted.add(edge)
            if kind == "attr" or target in introduced:
                parts.append(f"{pad}{role} {target}")
            else:
                parts.append(f"{pad}{role} {render(target, depth + 1)}")
        return "".join(parts) + ")"

    body = render(graph.root, 0)
    leftover = graph.variables - introduced
    if leftover:  # pragma: no cover - validate() rejects this first
        raise GraphError(f"unreachable from root: {', '.join(sorted(leftover))}")
    if graph.metadata:
        return "\n".join(graph.metadata) + "\n" + body
    return body


def to_triples(graph: AmrGraph) -> list[tuple[str, str, str]]:
    """Flat triple view with instances under ``:instance``."""
    graph.validate()
    return graph.triples()


def iter_corpus(stream: TextIO, strip_wiki: bool = False) -> Iterator[AmrGraph]:
    """Yield graphs from blank-line-separated PENMAN blocks."""
    block: list[str] = []
    start_line = 0
    line_no = 0

    def flush() -> Iterator[AmrGraph]:
        if any(line.strip() for line in block):
            text = "\n".join(block)
            try:
                yield parse_penman(text, strip_wiki=strip_wiki)
            except PenmanError as exc:
                raise PenmanError(
                    f"(corpus block starting at line {start_line + 1}) {exc}",
                    exc.line,
                    exc.column,
                ) from None

    for line_no, line in enumerate(stream):
        if not line.strip():
            yield from flush()
            block = []
            start_line = line_no + 1
        else:
            if not block:
                start_line = line_no
            block.append(line.rstrip("\n"))
    yield from flush()


def load_corpus(path, strip_wiki: bool = False) -> list[AmrGraph]:
    with open(path, encoding="utf-8") as handle:
        return list(iter_corpus(handle, strip_wiki=strip_wiki))


def dump_corpus(graphs: Iterable[AmrGraph], stream: TextIO) -> None:
    for i, graph in enumerate(graphs):
        if i:
            stream.write("\n")
        stream.write(serialize_penman(graph))
        stream.write("\n")
