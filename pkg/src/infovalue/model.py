"""Influence diagrams: tables, validation and canonical-form reformulation.

All tables share one indexing contract: rows enumerate joint parent
configurations in mixed radix with the first listed parent most significant,
so a table with parents ``(P, Q)`` has rows ``(p0,q0), (p0,q1), ..., (p1,q0), ...``.
That is C order, and ``table.reshape(parent_sizes + (child_size,))`` indexes it
directly.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import InvalidQuery, NodeNotFound, UnsupportedReformulation
from .graph_core import Dag, NodeId, NodeKind
from .utility import Linear, UtilityCurve

log = logging.getLogger(__name__)

TABLE_TOLERANCE = 1e-9


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d table, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Cpt:
    """Conditional table of ``child`` given ``parent_order``, one row per parent configuration."""

    child: NodeId
    parent_order: tuple[NodeId, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parent_order", tuple(self.parent_order))
        object.__setattr__(self, "table", _frozen_array(self.table, 2))


@dataclass(frozen=True, eq=False)
class CeTable:
    """Certain equivalent of every joint configuration of the value node's parents."""

    parent_order: tuple[NodeId, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parent_order", tuple(self.parent_order))
        object.__setattr__(self, "table", _frozen_array(self.table, 1))


@dataclass(frozen=True)
class Violation:
    kind: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.location}: {self.message}"


@dataclass(frozen=True)
class MappingVariableRecord:
    """Bookkeeping for one chance node converted during canonicalization.

    The converted node keeps its id and becomes deterministic, so
    ``deterministic_node == original``; tables referring to it stay valid.
    """

    original: NodeId
    decision: NodeId
    mapping_node: NodeId
    deterministic_node: NodeId
    functions: tuple[tuple[int, ...], ...]  # state k of the mapping node -> original state per decision state


@dataclass(frozen=True, eq=False)
class InfluenceDiagram:
    dag: Dag
    domains: Mapping[NodeId, tuple[str, ...]]
    cpts: Mapping[NodeId, Cpt]
    value_ce: CeTable
    curve: UtilityCurve = field(default_factory=Linear)
    costs: Mapping[NodeId, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "domains", MappingProxyType({k: tuple(v) for k, v in self.domains.items()}))
        object.__setattr__(self, "cpts", MappingProxyType(dict(self.cpts)))
        object.__setattr__(self, "costs", MappingProxyType({k: float(v) for k, v in self.costs.items()}))

    @property
    def value_node(self) -> NodeId:
        values = self.dag.nodes_of_kind(NodeKind.VALUE)
        if not values:
            raise NodeNotFound("<value node>")
        return values[0]

    @property
    def chance_nodes(self) -> tuple[NodeId, ...]:
        return self.dag.nodes_of_kind(NodeKind.CHANCE)

    @property
    def decision_nodes(self) -> tuple[NodeId, ...]:
        return self.dag.nodes_of_kind(NodeKind.DECISION)

    @property
    def uncertain_nodes(self) -> tuple[NodeId, ...]:
        """Chance and deterministic nodes, i.e. every node carrying a table."""
        return tuple(n for n in self.dag.nodes if self.dag.kind(n) in (NodeKind.CHANCE, NodeKind.DETERMINISTIC))

    def size(self, node: NodeId) -> int:
        return len(self.domains[node])

    def cost(self, node: NodeId) -> float:
        return self.costs.get(node, 0.0)

    def cpt_array(self, node: NodeId) -> np.ndarray:
        cpt = self.cpts[node]
        shape = tuple(self.size(p) for p in cpt.parent_order) + (self.size(node),)
        return cpt.table.reshape(shape)

    def ce_array(self) -> np.ndarray:
        shape = tuple(self.size(p) for p in self.value_ce.parent_order)
        return self.value_ce.table.reshape(shape)

    def require_decision(self, a: NodeId) -> None:
        if self.dag.kind(a) is not NodeKind.DECISION:
            raise InvalidQuery(f"{a!r} is not a decision node")


def _rows(m: InfluenceDiagram, parents) -> int:
    return math.prod(len(m.domains.get(p, ())) for p in parents)


def validate(m: InfluenceDiagram) -> list[Violation]:
    """Every violated structural or numeric invariant of ``m``; empty means valid."""
    out: list[Violation] = []
    g = m.dag

    values = g.nodes_of_kind(NodeKind.VALUE)
    if len(values) != 1:
        out.append(Violation("StructureViolation", "model", f"expected exactly one value node, found {len(values)}"))
    for v in values:
        for c in g.children(v):
            out.append(Violation("StructureViolation", f"edge {v}->{c}", "value node must not have outgoing edges"))

    for n in g.nodes:
        kind = g.kind(n)
        if kind is NodeKind.VALUE:
            continue
        states = m.domains.get(n)
        if states is None:
            out.append(Violation("DomainViolation", f"node {n}", "missing domain"))
            continue
        if len(states) < 2 and kind is not NodeKind.DETERMINISTIC:
            out.append(Violation("DomainViolation", f"node {n}", "domain needs at least two states"))
        if len(set(states)) != len(states):
            out.append(Violation("DomainViolation", f"node {n}", "duplicate state labels"))

    for n in m.domains:
        if n not in g:
            out.append(Violation("StructureViolation", f"node {n}", "domain given for an undeclared node"))
    if any(v.kind == "DomainViolation" and "missing" in v.message for v in out):
        return out

    for n in g.nodes:
        kind = g.kind(n)
        cpt = m.cpts.get(n)
        if kind is NodeKind.DECISION:
            if cpt is not None:
                out.append(Violation("StructureViolation", f"node {n}", "decision nodes carry no table"))
            continue
        if kind not in (NodeKind.CHANCE, NodeKind.DETERMINISTIC):
            continue
        if cpt is None:
            out.append(Violation("StructureViolation", f"node {n}", "missing probability table"))
            continue
        out.extend(_check_cpt(m, n, cpt, deterministic=kind is NodeKind.DETERMINISTIC))

    for n in m.cpts:
        if n not in g or g.kind(n) not in (NodeKind.CHANCE, NodeKind.DETERMINISTIC):
            out.append(Violation("StructureViolation", f"node {n}", "table given for a node without one"))

    if len(values) == 1:
        v = values[0]
        ce = m.value_ce
        if set(ce.parent_order) != set(g.parents(v)) or len(ce.parent_order) != len(g.parents(v)):
            out.append(Violation("StructureViolation", f"node {v}",
                                 f"ce table parents {list(ce.parent_order)} differ from graph parents {list(g.parents(v))}"))
        elif len(ce.table) != _rows(m, ce.parent_order):
            out.append(Violation("ShapeViolation", f"node {v}",
                                 f"ce table has {len(ce.table)} rows, expected {_rows(m, ce.parent_order)}"))
        if not np.all(np.isfinite(ce.table)):
            out.append(Violation("RangeViolation", f"node {v}", "ce entries must be finite"))

    for n, c in m.costs.items():
        if n not in g or g.kind(n) not in (NodeKind.CHANCE, NodeKind.DETERMINISTIC):
            out.append(Violation("CostViolation", f"cost {n}", "costs apply to chance nodes only"))
        elif not (c >= 0 and math.isfinite(c)):
            out.append(Violation("CostViolation", f"cost {n}", f"cost must be finite and non-negative, got {c}"))
    return out


def _check_cpt(m, n, cpt, deterministic):
    out = []
    parents = m.dag.parents(n)
    if cpt.child != n:
        out.append(Violation("StructureViolation", f"node {n}", f"table is labelled for {cpt.child!r}"))
    if set(cpt.parent_order) != set(parents) or len(cpt.parent_order) != len(parents):
        out.append(Violation("StructureViolation", f"node {n}",
                             f"table parents {list(cpt.parent_order)} differ from graph parents {list(parents)}"))
        return out
    expected = (_rows(m, cpt.parent_order), m.size(n))
    if cpt.table.shape != expected:
        out.append(Violation("ShapeViolation", f"node {n}", f"table shape {cpt.table.shape}, expected {expected}"))
        return out
    t = cpt.table
    for r in range(t.shape[0]):
        row = t[r]
        where = f"node {n} row {r}"
        if not np.all(np.isfinite(row)) or np.any(row < 0) or np.any(row > 1):
            out.append(Violation("RangeViolation", where, "probabilities must lie in [0, 1]"))
        elif abs(row.sum() - 1.0) > TABLE_TOLERANCE:
            out.append(Violation("NormalizationViolation", where, f"row sums to {row.sum():.12g}"))
        elif deterministic and not np.all((row == 0) | (row == 1)):
            out.append(Violation("RangeViolation", where, "deterministic rows must be 0/1"))
    return out


def is_canonical(m: InfluenceDiagram, a: NodeId | None = None) -> bool:
    """No chance node descends from ``a`` (from any decision when ``a`` is None)."""
    if a is None:
        decisions = m.decision_nodes
    else:
        m.require_decision(a)
        decisions = (a,)
    for d in decisions:
        if any(m.dag.kind(n) is NodeKind.CHANCE for n in m.dag.descendants(d)):
            return False
    return True


def _function_labels(decision_states, child_states, functions):
    labels = [",".join(f"{d}:{child_states[k]}" for d, k in zip(decision_states, f)) for f in functions]
    if len(set(labels)) != len(labels):
        labels = [f"f{i}" for i in range(len(functions))]
    return tuple(labels)


def _fresh_id(m, base):
    name, i = base, 1
    while name in m.dag:
        i += 1
        name = f"{base}#{i}"
    return name


def canonicalize(m: InfluenceDiagram, a: NodeId) -> tuple[InfluenceDiagram, list[MappingVariableRecord]]:
    """Reformulate ``m`` so no chance node descends from decision ``a``.

    Each chance child ``X`` of ``a`` turns into a deterministic node with
    parents ``(a, X(a))``. The new chance root ``X(a)`` ranges over every
    function from the states of ``a`` to the states of ``X``; it inherits the
    remaining parents of ``X``, and its table treats the responses to different
    decision states as independent. Expected utility is preserved for every
    policy. Only direct children of ``a`` are handled.

    Raises:
        UnsupportedReformulation: a chance descendant of ``a`` is not a direct child.
    """
    m.require_decision(a)
    if is_canonical(m, a):
        return m, []

    g = m.dag
    below = g.descendants(a)
    chance_desc = [n for n in g.nodes if n in below and g.kind(n) is NodeKind.CHANCE]
    direct = set(g.children(a))
    deep = [n for n in chance_desc if n not in direct]
    if deep:
        raise UnsupportedReformulation(
            f"chance nodes {deep} descend from {a!r} through other nodes; only direct children can be reformulated"
        )

    nodes = []
    edges = set(g.edges)
    domains = dict(m.domains)
    cpts = dict(m.cpts)
    records = []
    n_dec = m.size(a)
    to_convert = set(chance_desc)

    for n in g.nodes:
        if n not in to_convert:
            nodes.append((n, g.kind(n)))
            continue
        cpt = m.cpts[n]
        others = tuple(p for p in cpt.parent_order if p != a)
        mapping = _fresh_id(m, f"{n}({a})")
        k = m.size(n)
        functions = tuple(itertools.product(range(k), repeat=n_dec))

        # move a to the front so cond[d, *others] is p(n | a=d, others)
        arr = m.cpt_array(n)
        pos = cpt.parent_order.index(a)
        cond = np.moveaxis(arr, pos, 0)
        other_shape = cond.shape[1:-1]
        prior = np.ones(other_shape + (len(functions),))
        for j, f in enumerate(functions):
            col = np.ones(other_shape)
            for d, state in enumerate(f):
                col = col * cond[d, ..., state]
            prior[..., j] = col

        det = np.zeros((n_dec, len(functions), k))
        for j, f in enumerate(functions):
            for d, state in enumerate(f):
                det[d, j, state] = 1.0

        nodes.append((mapping, NodeKind.CHANCE))
        nodes.append((n, NodeKind.DETERMINISTIC))
        for p in others:
            edges.discard((p, n))
            edges.add((p, mapping))
        edges.add((mapping, n))
        domains[mapping] = _function_labels(m.domains[a], m.domains[n], functions)
        cpts[mapping] = Cpt(mapping, others, prior.reshape(-1, len(functions)))
        cpts[n] = Cpt(n, (a, mapping), det.reshape(-1, k))
        records.append(MappingVariableRecord(n, a, mapping, n, functions))
        log.debug("converted %s into deterministic node with mapping variable %s", n, mapping)

    dag = Dag(nodes, sorted(edges, key=lambda e: (e[1], e[0])))
    out = replace(m, dag=dag, domains=domains, cpts=cpts)
    if not is_canonical(out, a):
        raise UnsupportedReformulation(f"reformulation w.r.t. {a!r} left chance descendants in place")
    return out, records
