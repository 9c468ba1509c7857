"""Seeded random influence diagrams for tests and the consistency check."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .graph_core import Dag, NodeKind
from .model import CeTable, Cpt, InfluenceDiagram
from .utility import Linear, UtilityCurve


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _pick(rng, pool, prob, cap):
    chosen = [p for p in pool if rng.random() < prob]
    if len(chosen) > cap:
        keep = sorted(rng.choice(len(chosen), size=cap, replace=False))
        chosen = [chosen[i] for i in keep]
    return chosen


def _assemble(rng, order, kinds, parents, domains, value_parents, curve, ce_low=0.0, ce_high=100.0):
    nodes = [(n, kinds[n]) for n in order] + [("V", NodeKind.VALUE)]
    edges = [(p, n) for n in order for p in parents[n]] + [(p, "V") for p in value_parents]
    cpts = {}
    for n in order:
        if kinds[n] is NodeKind.CHANCE:
            rows = int(np.prod([len(domains[p]) for p in parents[n]]))
            cpts[n] = Cpt(n, tuple(parents[n]), rng.dirichlet(np.ones(len(domains[n])), size=rows))
    rows = int(np.prod([len(domains[p]) for p in value_parents]))
    ce = CeTable(tuple(value_parents), rng.uniform(ce_low, ce_high, size=rows))
    return InfluenceDiagram(Dag(nodes, edges), domains, cpts, ce, curve)


def random_diagram(
    seed=None,
    *,
    n_chance: int = 4,
    n_decisions: int = 1,
    n_actions: int = 2,
    n_states: int = 2,
    edge_prob: float = 0.4,
    max_parents: int = 3,
    max_info: int = 2,
    curve: UtilityCurve | None = None,
) -> InfluenceDiagram:
    """A random diagram that is canonical w.r.t. every decision.

    Chance nodes ``X1..Xn`` form a random DAG. Decisions (``A`` when there is
    one, else ``A1..Ak``) observe a few chance nodes and possibly the previous
    decision, and feed only the value node ``V``. The value node also depends
    on a random non-empty subset of chance nodes. CPT rows are uniform
    Dirichlet draws and certain equivalents are uniform on [0, 100].
    """
    rng = _rng(seed)
    chance = [f"X{i + 1}" for i in range(n_chance)]
    decisions = ["A"] if n_decisions == 1 else [f"A{i + 1}" for i in range(n_decisions)]
    kinds = {c: NodeKind.CHANCE for c in chance} | {d: NodeKind.DECISION for d in decisions}
    domains = {c: tuple(f"s{k}" for k in range(n_states)) for c in chance}
    domains |= {d: tuple(f"a{k}" for k in range(n_actions)) for d in decisions}

    parents = {}
    for i, c in enumerate(chance):
        parents[c] = _pick(rng, chance[:i], edge_prob, max_parents)
    for i, d in enumerate(decisions):
        info = _pick(rng, chance, 0.3, max_info)
        if i > 0 and rng.random() < 0.5:
            info.append(decisions[i - 1])
        parents[d] = info

    value_parents = [c for c in chance if rng.random() < 0.5]
    if chance and not value_parents:
        value_parents = [chance[int(rng.integers(n_chance))]]
    value_parents = decisions + value_parents
    return _assemble(rng, chance + decisions, kinds, parents, domains, value_parents, curve or Linear())


def random_chain(seed=None, *, length: int = 4, n_actions: int = 2, n_states: int = 2,
                 curve: UtilityCurve | None = None) -> InfluenceDiagram:
    """Directed chain ``Xn -> ... -> X2 -> X1 -> V`` plus a decision ``A -> V``.

    Nodes are numbered outward from the value node, so ``X1`` is its parent.
    """
    rng = _rng(seed)
    chance = [f"X{i + 1}" for i in range(length)]
    kinds = {c: NodeKind.CHANCE for c in chance} | {"A": NodeKind.DECISION}
    domains = {c: tuple(f"s{k}" for k in range(n_states)) for c in chance}
    domains["A"] = tuple(f"a{k}" for k in range(n_actions))
    parents = {c: [chance[i + 1]] if i + 1 < length else [] for i, c in enumerate(chance)}
    parents["A"] = []
    return _assemble(rng, chance + ["A"], kinds, parents, domains, ["A", "X1"], curve or Linear())


def random_noncanonical(seed=None, **kwargs) -> InfluenceDiagram:
    """A random single-decision diagram with one extra edge ``A -> X``.

    ``X`` is a chance node with no chance children that ``A`` does not observe,
    so the edge keeps the graph acyclic and ``X`` is a direct child of ``A``.
    """
    rng = _rng(seed)
    kwargs.setdefault("n_decisions", 1)
    while True:
        m = random_diagram(rng, **kwargs)
        (a,) = m.decision_nodes
        g = m.dag
        info = set(g.parents(a))
        options = [x for x in m.chance_nodes
                   if x not in info and not any(g.kind(c) is NodeKind.CHANCE for c in g.children(x))]
        if options:
            break
    x = options[int(rng.integers(len(options)))]
    old = m.cpts[x]
    order = old.parent_order + (a,)
    rows = old.table.shape[0] * m.size(a)
    cpts = dict(m.cpts)
    cpts[x] = Cpt(x, order, rng.dirichlet(np.ones(m.size(x)), size=rows))
    return replace(m, dag=g.with_edges(added=[(a, x)]), cpts=cpts)


def random_bayes_net(seed=None, *, n_nodes: int = 5, n_states: int = 2, edge_prob: float = 0.5,
                     max_parents: int = 3) -> InfluenceDiagram:
    """Chance nodes only (the value node has no parents); used for independence checks."""
    rng = _rng(seed)
    chance = [f"X{i + 1}" for i in range(n_nodes)]
    kinds = {c: NodeKind.CHANCE for c in chance}
    domains = {c: tuple(f"s{k}" for k in range(n_states)) for c in chance}
    parents = {c: _pick(rng, chance[:i], edge_prob, max_parents) for i, c in enumerate(chance)}
    return _assemble(rng, chance, kinds, parents, domains, [], Linear())
