"""Directed acyclic graphs over named variables.

Dag values are immutable; edge operations return new graphs and refuse
anything that would close a cycle, so a Dag in hand is always valid.
Node declaration order is significant: it drives every deterministic
tie-break downstream (topological order, search move ordering).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import CycleError, GraphError

Edge = tuple[str, str]


@dataclass(frozen=True)
class Dag:
    nodes: tuple[str, ...]
    edges: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", frozenset(self.edges))
        if len(set(self.nodes)) != len(self.nodes):
            raise GraphError("duplicate node names")
        known = set(self.nodes)
        for p, c in self.edges:
            if p not in known or c not in known:
                raise GraphError(f"edge ({p!r}, {c!r}) references unknown node")
            if p == c:
                raise GraphError(f"self-loop on {p!r}")
        # raises CycleError if the edge set is cyclic
        self.topological_order()

    def _check_node(self, name: str) -> None:
        if name not in self.nodes:
            raise GraphError(f"unknown node {name!r}")

    def parents(self, node: str) -> frozenset[str]:
        self._check_node(node)
        return frozenset(p for p, c in self.edges if c == node)

    def children(self, node: str) -> frozenset[str]:
        self._check_node(node)
        return frozenset(c for p, c in self.edges if p == node)

    def has_path(self, src: str, dst: str) -> bool:
        """True iff a directed path src -> ... -> dst exists (src == dst counts)."""
        if src == dst:
            return True
        stack = [src]
        seen = {src}
        while stack:
            cur = stack.pop()
            for p, c in self.edges:
                if p == cur and c not in seen:
                    if c == dst:
                        return True
                    seen.add(c)
                    stack.append(c)
        return False

    def add_edge(self, parent: str, child: str) -> "Dag":
        self._check_node(parent)
        self._check_node(child)
        if parent == child:
            raise GraphError(f"self-loop on {parent!r}")
        if (parent, child) in self.edges:
            raise GraphError(f"edge ({parent!r}, {child!r}) already present")
        if self.has_path(child, parent):
            raise CycleError(f"adding ({parent!r}, {child!r}) would create a cycle")
        return Dag(self.nodes, self.edges | {(parent, child)})

    def remove_edge(self, parent: str, child: str) -> "Dag":
        if (parent, child) not in self.edges:
            raise GraphError(f"edge ({parent!r}, {child!r}) not present")
        return Dag(self.nodes, self.edges - {(parent, child)})

    def reverse_edge(self, parent: str, child: str) -> "Dag":
        return self.remove_edge(parent, child).add_edge(child, parent)

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; among ready nodes the earliest-declared wins."""
        indeg = {n: 0 for n in self.nodes}
        for _, c in self.edges:
            indeg[c] += 1
        order: list[str] = []
        remaining = list(self.nodes)
        while remaining:
            ready = next((n for n in remaining if indeg[n] == 0), None)
            if ready is None:
                raise CycleError("graph contains a directed cycle")
            order.append(ready)
            remaining.remove(ready)
            for p, c in self.edges:
                if p == ready:
                    indeg[c] -= 1
        return order


@dataclass(frozen=True)
class EdgeConstraints:
    """Expert-supplied edges; protected from deletion/reversal unless removable."""

    required_edges: frozenset[Edge] = field(default_factory=frozenset)
    removable: bool = False

    def __post_init__(self):
        object.__setattr__(self, "required_edges", frozenset(self.required_edges))

    def validate(self, nodes: Iterable[str]) -> None:
        known = set(nodes)
        for p, c in self.required_edges:
            if p not in known or c not in known:
                raise GraphError(f"required edge ({p!r}, {c!r}) references unknown node")
        # acyclicity of the required set alone; CycleError if it fails
        Dag(tuple(known), self.required_edges)
