"""Qualitative EVPI orderings read off the diagram's topology.

An ordering-graph edge ``X -> Y`` asserts EVPI(X) >= EVPI(Y) for the chosen
decision. It is added only when ``Y`` is d-separated from the value node by
``X`` and neither node descends from the decision. Nodes in the zero set are
d-separated from the value node by the decision itself and have EVPI 0.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import InvalidCost, InvalidQuery, NodeNotFound, NonCanonicalQuery
from .graph_core import NodeId, NodeKind
from .model import InfluenceDiagram, MappingVariableRecord, canonicalize, is_canonical


class Relation(str, enum.Enum):
    GREATER_OR_EQUAL = "greater-or-equal"
    LESS_OR_EQUAL = "less-or-equal"
    ZERO = "zero"
    UNORDERED = "unordered"


@dataclass(frozen=True)
class OrderingEdge:
    """One weak-dominance conclusion and the d-separation query that justified it.

    ``via`` is the decision node between the two chance nodes, or None when
    they are adjacent.
    """

    tail: NodeId
    head: NodeId
    via: NodeId | None
    separated: tuple[NodeId, ...]
    target: tuple[NodeId, ...]
    given: tuple[NodeId, ...]

    @property
    def premise(self) -> str:
        def fmt(ns):
            return "{" + ", ".join(ns) + "}"

        return f"d_separated({fmt(self.separated)}, {fmt(self.target)}, {fmt(self.given)})"

    @property
    def rule(self) -> str:
        return "adjacent" if self.via is None else f"via decision {self.via}"


@dataclass(frozen=True, eq=False)
class OrderingGraph:
    decision: NodeId
    value_node: NodeId
    nodes: tuple[NodeId, ...]
    edges: tuple[OrderingEdge, ...]
    zero_set: frozenset[NodeId]
    reformulation: tuple[MappingVariableRecord, ...] = ()
    _reach: dict = field(init=False, repr=False)

    def __post_init__(self):
        succ = {n: [] for n in self.nodes}
        for e in self.edges:
            succ[e.tail].append(e.head)
        reach = {}
        for n in self.nodes:
            seen, queue = set(), deque(succ[n])
            while queue:
                m = queue.popleft()
                if m not in seen:
                    seen.add(m)
                    queue.extend(succ[m])
            reach[n] = frozenset(seen)
        object.__setattr__(self, "_reach", reach)

    def _check(self, x):
        if x not in self._reach:
            raise NodeNotFound(x)

    def pairs(self) -> set[tuple[NodeId, NodeId]]:
        return {(e.tail, e.head) for e in self.edges}

    def reachable(self, x: NodeId) -> frozenset[NodeId]:
        self._check(x)
        return self._reach[x]

    def equivalence_classes(self) -> list[tuple[NodeId, ...]]:
        """Groups of two or more nodes that dominate each other, hence share one EVPI."""
        out, placed = [], set()
        for n in self.nodes:
            if n in placed:
                continue
            group = tuple(m for m in self.nodes if m == n or (m in self._reach[n] and n in self._reach[m]))
            placed.update(group)
            if len(group) > 1:
                out.append(group)
        return out

    def dominates(self, x: NodeId, y: NodeId) -> Relation:
        self._check(x)
        self._check(y)
        if x == y or y in self._reach[x]:
            return Relation.GREATER_OR_EQUAL
        if x in self._reach[y]:
            return Relation.LESS_OR_EQUAL
        if x in self.zero_set:
            return Relation.ZERO
        return Relation.UNORDERED


def dominates(g: OrderingGraph, x: NodeId, y: NodeId) -> Relation:
    return g.dominates(x, y)


def _outside_decision(m: InfluenceDiagram, decisions: Iterable[NodeId], nodes: Iterable[NodeId]) -> bool:
    below = set()
    for d in decisions:
        below |= m.dag.descendants(d)
    return not below.intersection(nodes)


def zero_evpi_nodes(m: InfluenceDiagram, a: NodeId) -> frozenset[NodeId]:
    """Chance nodes d-separated from the value node by ``a``; their EVPI for ``a`` is zero."""
    m.require_decision(a)
    if not is_canonical(m, a):
        raise NonCanonicalQuery(f"model is not canonical w.r.t. {a!r}; canonicalize it first")
    v = m.value_node
    return frozenset(x for x in m.chance_nodes if m.dag.d_separated({x}, {v}, {a}))


def _candidates(m: InfluenceDiagram, x: NodeId):
    """Chance nodes adjacent to ``x`` or one decision away from it, with the mediating decision."""
    g = m.dag
    seen = {}
    for y in g.children(x) + g.parents(x):
        if g.kind(y) is NodeKind.CHANCE:
            seen.setdefault(y, None)
    for d in g.children(x):
        if g.kind(d) is NodeKind.DECISION:
            for y in g.children(d):
                if g.kind(y) is NodeKind.CHANCE and y != x:
                    seen.setdefault(y, d)
    for d in g.parents(x):
        if g.kind(d) is NodeKind.DECISION:
            for y in g.parents(d):
                if g.kind(y) is NodeKind.CHANCE and y != x:
                    seen.setdefault(y, d)
    return sorted(seen.items(), key=lambda kv: g.rank(kv[0]))


def build_ordering(m: InfluenceDiagram, a: NodeId) -> OrderingGraph:
    """Ordering graph of EVPI for decision ``a``.

    The model is first put in canonical form w.r.t. ``a`` when needed. Each
    chance node is compared only with chance nodes adjacent to it or
    separated from it by a single decision node.
    """
    m.require_decision(a)
    canon, records = canonicalize(m, a)
    v = canon.value_node
    g = canon.dag
    below = g.descendants(a)
    nodes = canon.chance_nodes

    edges = []
    for x in nodes:
        if x in below:
            continue
        for y, via in _candidates(canon, x):
            if y in below:
                continue
            if g.d_separated({y}, {v}, {x}):
                edges.append(OrderingEdge(x, y, via, (y,), (v,), (x,)))

    zero = zero_evpi_nodes(canon, a)
    return OrderingGraph(a, v, nodes, tuple(edges), zero, tuple(records))


def set_dominance(
    m: InfluenceDiagram,
    a_set: Iterable[NodeId],
    x_set: Iterable[NodeId],
    y_set: Iterable[NodeId],
) -> Relation:
    """Compare the joint EVPI of two disjoint chance sets for the decisions ``a_set``."""
    a_set, x_set, y_set = set(a_set), set(x_set), set(y_set)
    for n in a_set:
        m.require_decision(n)
    for n in x_set | y_set:
        if m.dag.kind(n) is not NodeKind.CHANCE:
            raise InvalidQuery(f"{n!r} is not a chance node")
    if x_set & y_set:
        raise InvalidQuery("chance sets must be disjoint")
    if not x_set or not y_set:
        raise InvalidQuery("chance sets must be non-empty")

    v = {m.value_node}
    sep = m.dag.d_separated
    if _outside_decision(m, a_set, x_set | y_set):
        if sep(y_set, v, x_set):
            return Relation.GREATER_OR_EQUAL
        if sep(x_set, v, y_set):
            return Relation.LESS_OR_EQUAL
    if sep(x_set, v, a_set):
        return Relation.ZERO
    return Relation.UNORDERED


@dataclass(frozen=True)
class NevpiRefinement:
    strict: tuple[tuple[NodeId, NodeId], ...]
    equal_cost: tuple[tuple[NodeId, NodeId], ...]


def nevpi_refine(g: OrderingGraph, costs: Mapping[NodeId, float]) -> NevpiRefinement:
    """Strict NEVPI conclusions from weak EVPI dominance plus a cost gap.

    A pair ``(x, y)`` with EVPI(x) >= EVPI(y) and cost(x) < cost(y) has
    NEVPI(x) > NEVPI(y). Weakly ordered pairs with equal costs keep their weak
    relation and are listed in ``equal_cost``. Missing costs count as zero.
    """
    for n, c in costs.items():
        if not c >= 0:
            raise InvalidCost(f"cost of {n!r} must be non-negative, got {c}")
    strict, equal = [], []
    for x in g.nodes:
        for y in g.nodes:
            if x == y or g.dominates(x, y) is not Relation.GREATER_OR_EQUAL:
                continue
            cx, cy = costs.get(x, 0.0), costs.get(y, 0.0)
            if cx < cy:
                strict.append((x, y))
            elif cx == cy:
                equal.append((x, y))
    return NevpiRefinement(tuple(strict), tuple(equal))
