"""Immutable AMR graph value type.

An :class:`AmrGraph` is a rooted, directed graph over variables. Each
variable carries exactly one concept label (its *instance*). Edges between
variables are *relations*; edges from a variable to a constant (a number,
a quoted string, or a bare symbol such as ``-``) are *attributes*.

Graphs are immutable after construction; all mutating operations return a
new graph. Equality compares root and triple sets, never metadata.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

Instance = tuple[str, str]
Relation = tuple[str, str, str]
Attribute = tuple[str, str, str]
Triple = tuple[str, str, str]

INSTANCE_ROLE = ":instance"

_VAR_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_-]*\Z")


class GraphError(ValueError):
    """An AmrGraph invariant does not hold."""


@dataclass(frozen=True, eq=True)
class AmrGraph:
    """Rooted AMR graph as instance/relation/attribute triple sets.

    ``metadata`` holds opaque ``# ::``-prefixed provenance lines from the
    source file. It never takes part in equality or hashing.
    """

    root: str
    instances: frozenset[Instance]
    relations: frozenset[Relation]
    attributes: frozenset[Attribute]
    metadata: tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def build(
        cls,
        root: str,
        instances: Iterable[Instance],
        relations: Iterable[Relation] = (),
        attributes: Iterable[Attribute] = (),
        metadata: Iterable[str] = (),
        check: bool = True,
    ) -> "AmrGraph":
        g = cls(
            root=root,
            instances=frozenset(instances),
            relations=frozenset(relations),
            attributes=frozenset(attributes),
            metadata=tuple(metadata),
        )
        if check:
            g.validate()
        return g

    # -- derived views -------------------------------------------------

    @cached_property
    def concepts(self) -> dict[str, str]:
        """Variable -> concept label. Assumes unique variables."""
        return {var: concept for var, concept in sorted(self.instances)}

    @cached_property
    def variables(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.instances)

    @cached_property
    def out_edges(self) -> dict[str, tuple[Relation, ...]]:
        out: dict[str, list[Relation]] = {v: [] for v in self.variables}
        for src, role, tgt in sorted(self.relations):
            out[src].append((src, role, tgt))
        return {v: tuple(es) for v, es in out.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[Relation, ...]]:
        inc: dict[str, list[Relation]] = {v: [] for v in self.variables}
        for src, role, tgt in sorted(self.relations):
            inc[tgt].append((src, role, tgt))
        return {v: tuple(es) for v, es in inc.items()}

    def concept_of(self, var: str) -> str:
        try:
            return self.concepts[var]
        except KeyError:
            raise GraphError(f"unknown variable {var!r}") from None

    def attributes_of(self, var: str) -> tuple[Attribute, ...]:
        return tuple(a for a in sorted(self.attributes) if a[0] == var)

    def leaves(self) -> tuple[str, ...]:
        """Variables with no outgoing relation edges, in sorted order."""
        return tuple(v for v in sorted(self.variables) if not self.out_edges.get(v))

    def has_polarity_negation(self, var: str) -> bool:
        return (var, ":polarity", "-") in self.attributes

    # -- invariants ----------------------------------------------------

    def validate(self) -> None:
        """Raise :class:`GraphError` on the first violated invariant."""
        if not self.instances:
            raise GraphError("graph has no instances")
        seen: dict[str, str] = {}
        for var, concept in sorted(self.instances):
            if not _VAR_RE.match(var):
                raise GraphError(f"invalid variable id {var!r}")
            if var in seen:
                raise GraphError(f"duplicate concept for variable {var!r}")
            seen[var] = concept
        if self.root not in seen:
            raise GraphError(f"root {self.root!r} has no instance")
        for src, role, tgt in sorted(self.relations):
            for endpoint in (src, tgt):
                if endpoint not in seen:
                    raise GraphError(
                        f"relation ({src}, {role}, {tgt}) references "
                        f"undeclared variable {endpoint!r}"
                    )
        for src, role, _ in sorted(self.attributes):
            if src not in seen:
                raise GraphError(
                    f"attribute on undeclared variable {src!r} ({role})"
                )
        unreachable = self.variables - self._connected_from_root()
        if unreachable:
            names = ", ".join(sorted(unreachable))
            raise GraphError(f"unreachable from root: {names}")

    def _connected_from_root(self) -> set[str]:
        """Variables connected to the root through relation edges.

        Edge direction is disregarded: a parser may normalize an inverse
        role into an edge pointing back toward the root, and such graphs
        are still serializable (the edge is re-inverted on output).
        """
        neighbors: dict[str, set[str]] = {v: set() for v in self.variables}
        for src, _, tgt in self.relations:
            neighbors.setdefault(src, set()).add(tgt)
            neighbors.setdefault(tgt, set()).add(src)
        seen = {self.root}
        stack = [self.root]
        while stack:
            for nxt in neighbors.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    # -- functional updates --------------------------------------------

    def replace(self, **changes) -> "AmrGraph":
        fields = {
            "root": self.root,
            "instances": self.instances,
            "relations": self.relations,
            "attributes": self.attributes,
            "metadata": self.metadata,
        }
        fields.update(changes)
        return AmrGraph(
            root=fields["root"],
            instances=frozenset(fields["instances"]),
            relations=frozenset(fields["relations"]),
            attributes=frozenset(fields["attributes"]),
            metadata=tuple(fields["metadata"]),
        )

    def with_concept(self, var: str, concept: str) -> "AmrGraph":
        old = self.concept_of(var)
        instances = (self.instances - {(var, old)}) | {(var, concept)}
        return self.replace(instances=instances)

    def with_attribute(self, var: str, role: str, value: str) -> "AmrGraph":
        self.concept_of(var)
        return self.replace(attributes=self.attributes | {(var, role, value)})

    def without_variable(self, var: str) -> "AmrGraph":
        """Drop a variable with its instance, attributes, and incident edges."""
        concept = self.concept_of(var)
        if var == self.root:
            raise GraphError("cannot remove the root variable")
        return self.replace(
            instances=self.instances - {(var, concept)},
            relations=frozenset(
                e for e in self.relations if var not in (e[0], e[2])
            ),
            attributes=frozenset(a for a in self.attributes if a[0] != var),
        )

    def fresh_variable(self, base: str) -> str:
        """A variable id not present in the graph, derived from ``base``.

        Collisions are resolved by a numeric suffix so merged or
        synthesized nodes keep readable names.
        """
        stem = base[:1].lower() if base[:1].isalpha() else "x"
        if stem not in self.variables:
            return stem
        n = 2
        while f"{stem}{n}" in self.variables:
            n += 1
        return f"{stem}{n}"

    # -- triple views ----------------------------------------------------

    def triples(self) -> list[Triple]:
        """All triples with instances rendered under ``:instance``.

        Order is deterministic: instances in depth-first introduction
        order, then relations, then attributes, each sorted by source
        introduction order, role, and target.
        """
        order = self._dfs_order()
        pos = {v: i for i, v in enumerate(order)}
        out: list[Triple] = [(v, INSTANCE_ROLE, self.concepts[v]) for v in order]
        out.extend(
            sorted(self.relations, key=lambda e: (pos[e[0]], e[1], pos[e[2]]))
        )
        out.extend(
            sorted(self.attributes, key=lambda a: (pos[a[0]], a[1], a[2]))
        )
        return out

    def _dfs_order(self) -> list[str]:
        """Depth-first variable order from the root, children sorted by
        (role, target), backward edges traversed where needed. Matches the
        introduction order used by the serializer."""
        incident: dict[str, list[tuple[str, str, str, bool]]] = {
            v: [] for v in self.variables
        }
        for src, role, tgt in self.relations:
            incident[src].append((role, tgt, src, True))
            incident[tgt].append((role + "-of", src, tgt, False))
        order: list[str] = []
        seen: set[str] = set()

        def visit(v: str) -> None:
            seen.add(v)
            order.append(v)
            for role, other, _, _ in sorted(incident.get(v, ())):
                if other not in seen:
                    visit(other)

        visit(self.root)
        for v in sorted(self.variables - seen):  # tolerate invalid graphs
            visit(v)
        return order

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples())


def same_triples(a: AmrGraph, b: AmrGraph) -> bool:
    """Triple-set equality: root, instances, relations, and attributes."""
    return (
        a.root == b.root
        and a.instances == b.instances
        and a.relations == b.relations
        and a.attributes == b.attributes
    )
