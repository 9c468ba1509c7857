"""Exact evaluation of influence diagrams by enumeration.

Every quantity here is computed from the full joint table over chance,
deterministic and decision nodes, so models are expected to be desk-sized.
The enumeration budget is counted in scenario-policy evaluations: joint table
size times the number of policy combinations tried.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .errors import (
    BracketError,
    IncompleteAssignment,
    InvalidModel,
    InvalidQuery,
    ModelTooLarge,
    NonCanonicalQuery,
    WouldCreateCycle,
)
from .graph_core import NodeId, NodeKind
from .model import InfluenceDiagram, validate

log = logging.getLogger(__name__)

DEFAULT_CAP = 2**24
BISECTION_TOL = 1e-9
BISECTION_MAX_ITER = 200


@dataclass(frozen=True)
class DecisionRule:
    """Action index for every joint state of ``parents`` (mixed radix, first parent most significant)."""

    decision: NodeId
    parents: tuple[NodeId, ...]
    sizes: tuple[int, ...]
    actions: tuple[int, ...]

    def action(self, parent_states: Mapping[NodeId, int]) -> int:
        index = 0
        for p, size in zip(self.parents, self.sizes):
            index = index * size + parent_states[p]
        return self.actions[index]


@dataclass(frozen=True)
class Policy:
    rules: tuple[DecisionRule, ...]

    def __getitem__(self, decision: NodeId) -> DecisionRule:
        for r in self.rules:
            if r.decision == decision:
                return r
        raise KeyError(decision)

    def __iter__(self):
        return iter(self.rules)

    @property
    def key(self) -> tuple[int, ...]:
        """Concatenated action tables; policies compare lexicographically on this."""
        return tuple(itertools.chain.from_iterable(r.actions for r in self.rules))

    def to_dict(self) -> dict:
        return {r.decision: {"parents": list(r.parents), "actions": list(r.actions)} for r in self.rules}


class EvpiMethod(str, enum.Enum):
    CLOSED_FORM = "closed-form"
    BISECTION = "bisection"


@dataclass(frozen=True)
class EvpiReport:
    decision: NodeId
    observed: tuple[NodeId, ...]
    value: float
    method: EvpiMethod
    residual: float
    iterations: int
    eu_with: float
    eu_without: float
    ce_with: float
    ce_without: float
    raw_value: float

    def to_dict(self) -> dict:
        return {
            "decision": self.decision,
            "observed": list(self.observed),
            "evpi": self.value,
            "method": self.method.value,
            "residual": self.residual,
            "iterations": self.iterations,
            "eu_with": self.eu_with,
            "eu_without": self.eu_without,
            "ce_with": self.ce_with,
            "ce_without": self.ce_without,
        }


def require_valid(m: InfluenceDiagram) -> None:
    problems = validate(m)
    if problems:
        raise InvalidModel(problems)


class _Evaluator:
    """Joint-table view of one diagram, shared by every solver entry point."""

    def __init__(self, m: InfluenceDiagram, cap: int = DEFAULT_CAP):
        self.m = m
        self.cap = cap
        self.axes = tuple(n for n in m.dag.nodes if m.dag.kind(n) is not NodeKind.VALUE)
        self.pos = {n: i for i, n in enumerate(self.axes)}
        self.shape = tuple(m.size(n) for n in self.axes)
        self.size = math.prod(self.shape)
        if self.size > cap:
            raise ModelTooLarge(cap, self.size)

        prob = np.ones(self.shape)
        for n in m.uncertain_nodes:
            prob = prob * self.expand(m.cpt_array(n), m.cpts[n].parent_order + (n,))
        self.prob = prob
        self.decisions = m.decision_nodes
        self.info = {d: m.dag.parents(d) for d in self.decisions}
        self._indicators: dict[tuple[NodeId, tuple[int, ...]], np.ndarray] = {}

    def expand(self, arr: np.ndarray, variables: tuple[NodeId, ...]) -> np.ndarray:
        """Broadcastable view of ``arr`` (axes ordered as ``variables``) against the joint table."""
        order = sorted(range(len(variables)), key=lambda i: self.pos[variables[i]])
        arr = np.transpose(np.asarray(arr, dtype=float), order)
        shape = [1] * len(self.axes)
        for v in variables:
            shape[self.pos[v]] = self.m.size(v)
        return arr.reshape(shape)

    def utility(self, shift: float = 0.0) -> np.ndarray:
        return np.asarray(self.m.curve(self.m.ce_array() - shift), dtype=float)

    def weighted(self, util: np.ndarray) -> np.ndarray:
        return self.prob * self.expand(util, self.m.value_ce.parent_order)

    def n_states(self, d: NodeId) -> int:
        return math.prod(self.m.size(p) for p in self.info[d])

    def n_rules(self, d: NodeId) -> int:
        return self.m.size(d) ** self.n_states(d)

    def rules(self, d: NodeId) -> Iterator[tuple[int, ...]]:
        return itertools.product(range(self.m.size(d)), repeat=self.n_states(d))

    def indicator(self, d: NodeId, actions: tuple[int, ...]) -> np.ndarray:
        key = (d, actions)
        ind = self._indicators.get(key)
        if ind is None:
            parents = self.info[d]
            table = np.asarray(actions, dtype=int).reshape(tuple(self.m.size(p) for p in parents))
            ind = self.expand((table[..., None] == np.arange(self.m.size(d))).astype(float), parents + (d,))
            if len(self._indicators) < 4096:
                self._indicators[key] = ind
        return ind

    def rule(self, d: NodeId, actions) -> DecisionRule:
        parents = self.info[d]
        return DecisionRule(d, parents, tuple(self.m.size(p) for p in parents), tuple(int(a) for a in actions))

    def expected_utility(self, policy: Policy, util: np.ndarray) -> float:
        t = self.weighted(util)
        for d in self.decisions:
            rule = policy[d]
            if rule.parents != self.info[d] or len(rule.actions) != self.n_states(d):
                raise InvalidQuery(f"policy rule for {d!r} does not match its informational parents")
            t = t * self.indicator(d, tuple(rule.actions))
        return float(t.sum())

    def optimize(self, util: np.ndarray) -> tuple[Policy, float]:
        """Maximize expected utility over all policies.

        The last declared decision is optimized state by state for each
        combination of the other decisions' rules, which is exact: with the
        other rules fixed, expected utility is a sum of independent terms, one
        per information state of that decision. Other rules are enumerated in
        lexicographic order and only strict improvements are kept, so the
        returned policy is the lexicographically smallest maximizer.
        """
        w = self.weighted(util)
        if not self.decisions:
            return Policy(()), float(w.sum())

        last, others = self.decisions[-1], self.decisions[:-1]
        combos = math.prod(self.n_rules(d) for d in others)
        if combos * self.size > self.cap:
            raise ModelTooLarge(self.cap, combos * self.size)

        keep = self.info[last] + (last,)
        by_axis = sorted(keep, key=self.pos.__getitem__)
        drop = tuple(i for i, n in enumerate(self.axes) if n not in keep)
        perm = [by_axis.index(v) for v in keep]
        k_last = self.m.size(last)

        best_eu, best = -math.inf, None
        for combo in itertools.product(*(self.rules(d) for d in others)):
            t = w
            for d, actions in zip(others, combo):
                t = t * self.indicator(d, actions)
            g = np.transpose(t.sum(axis=drop), perm).reshape(-1, k_last)
            eu = float(g.max(axis=1).sum())
            if best is None or eu > best_eu:
                best_eu, best = eu, (combo, g.argmax(axis=1))

        combo, choice = best
        rules = [self.rule(d, a) for d, a in zip(others, combo)]
        rules.append(self.rule(last, choice))
        return Policy(tuple(rules)), best_eu


def all_policies(m: InfluenceDiagram) -> Iterator[Policy]:
    """Every policy of ``m`` in lexicographic order (brute force; small models only)."""
    ev = _Evaluator(m, cap=math.inf)
    for combo in itertools.product(*(ev.rules(d) for d in ev.decisions)):
        yield Policy(tuple(ev.rule(d, a) for d, a in zip(ev.decisions, combo)))


def joint_probability(m: InfluenceDiagram, s: Mapping[NodeId, int]) -> float:
    """Chain-rule product of table entries for one full scenario."""
    p = 1.0
    for n in m.uncertain_nodes:
        if n not in s:
            raise IncompleteAssignment(f"no state given for {n!r}")
        cpt = m.cpts[n]
        missing = [q for q in cpt.parent_order if q not in s]
        if missing:
            raise IncompleteAssignment(f"no state given for {missing} (parents of {n!r})")
        index = tuple(s[q] for q in cpt.parent_order) + (s[n],)
        p *= float(m.cpt_array(n)[index])
    return p


def expected_utility(m: InfluenceDiagram, pol: Policy, *, cap: int = DEFAULT_CAP) -> float:
    ev = _Evaluator(m, cap)
    return ev.expected_utility(pol, ev.utility())


def solve(m: InfluenceDiagram, *, cap: int = DEFAULT_CAP) -> tuple[Policy, float]:
    """Optimal policy and its expected utility (maximum over all policies)."""
    require_valid(m)
    ev = _Evaluator(m, cap)
    return ev.optimize(ev.utility())


def certain_equivalent(m: InfluenceDiagram, *, cap: int = DEFAULT_CAP) -> float:
    _, eu = solve(m, cap=cap)
    return float(m.curve.inverse(eu))


def _as_nodes(x) -> tuple[NodeId, ...]:
    if isinstance(x, str):
        return (x,)
    return tuple(dict.fromkeys(x))


def with_observation(m: InfluenceDiagram, x: NodeId | Iterable[NodeId], a: NodeId) -> InfluenceDiagram:
    """Copy of ``m`` in which every node of ``x`` is observed before deciding ``a``."""
    m.require_decision(a)
    xs = _as_nodes(x)
    below = m.dag.descendants(a)
    added = []
    for n in xs:
        if m.dag.kind(n) is not NodeKind.CHANCE:
            raise InvalidQuery(f"{n!r} is not a chance node")
        if n in below:
            raise WouldCreateCycle(f"{n!r} descends from {a!r}; observing it before {a!r} would close a loop")
        if (n, a) not in m.dag.edges:
            added.append((n, a))
    if not added:
        return m
    return replace(m, dag=m.dag.with_edges(added=added))


def _bisect_decreasing(h: Callable[[float], float], lo: float, hi: float, xtol: float, ftol: float, max_iter: int):
    """Root of a non-increasing ``h`` on ``[lo, hi]``; returns (root, |h(root)|, iterations)."""
    h_lo = h(lo)
    if h_lo <= 0:
        if h_lo < -ftol:
            raise BracketError(f"h({lo}) = {h_lo} < 0: no root in bracket")
        return lo, abs(h_lo), 0
    h_hi = h(hi)
    if h_hi > ftol:
        raise BracketError(f"h({hi}) = {h_hi} > 0: no root in bracket")

    mid, h_mid = lo, h_lo
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        h_mid = h(mid)
        if h_mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= xtol and abs(h_mid) <= ftol:
            return mid, abs(h_mid), it
    else:
        it = max_iter
    if abs(h_mid) > ftol:
        log.warning("bisection stopped after %d iterations with residual %g", it, abs(h_mid))
    return mid, abs(h_mid), it


def evpi(
    m: InfluenceDiagram,
    a: NodeId,
    x: NodeId | Iterable[NodeId],
    *,
    method: EvpiMethod | str | None = None,
    tol: float = BISECTION_TOL,
    max_iter: int = BISECTION_MAX_ITER,
    cap: int = DEFAULT_CAP,
) -> EvpiReport:
    """Expected value of perfect information on ``x`` before decision ``a``.

    The value is the price that makes buying the observation exactly as good
    as deciding without it. Curves with the delta property get the closed form
    ``ce(with) - ce(without)`` unless ``method="bisection"`` is forced; other
    curves solve the indifference equation by bisection on the price. For a
    set ``x`` the joint value of observing all of it is returned.

    Raises:
        NonCanonicalQuery: some node of ``x`` descends from ``a``.
    """
    require_valid(m)
    m.require_decision(a)
    xs = _as_nodes(x)
    if not xs:
        raise InvalidQuery("nothing to observe")
    below = m.dag.descendants(a)
    bad = [n for n in xs if n in below]
    if bad:
        raise NonCanonicalQuery(
            f"{bad} descend from {a!r}, so their value of information is undefined; "
            f"reformulate with canonicalize(m, {a!r}) and query the mapping variables"
        )
    method = EvpiMethod(method) if method is not None else None
    if method is EvpiMethod.CLOSED_FORM and not m.curve.delta_property:
        raise InvalidQuery("closed form needs a curve with the delta property")

    base = _Evaluator(m, cap)
    informed = _Evaluator(with_observation(m, xs, a), cap)
    _, eu_without = base.optimize(base.utility())
    _, eu_with = informed.optimize(informed.utility())
    ce_without = float(m.curve.inverse(eu_without))
    ce_with = float(m.curve.inverse(eu_with))

    def indifference(rho: float) -> float:
        return informed.optimize(informed.utility(rho))[1] - eu_without

    if method is None:
        method = EvpiMethod.CLOSED_FORM if m.curve.delta_property else EvpiMethod.BISECTION
    if method is EvpiMethod.CLOSED_FORM:
        raw = ce_with - ce_without
        residual, iterations = abs(indifference(raw)), 0
    else:
        ce = m.value_ce.table
        span = float(ce.max() - ce.min()) if ce.size else 0.0
        raw, residual, iterations = _bisect_decreasing(indifference, 0.0, span, tol, tol, max_iter)

    value = raw
    if raw < 0:
        level = logging.WARNING if raw < -tol else logging.DEBUG
        log.log(level, "clamped EVPI %g to 0 for %s before %s", raw, xs, a)
        value = 0.0
    return EvpiReport(a, xs, value, method, residual, iterations, eu_with, eu_without, ce_with, ce_without, raw)


def nevpi(m: InfluenceDiagram, a: NodeId, x: NodeId | Iterable[NodeId], **kwargs) -> float:
    """EVPI minus the cost of acquiring the information (summed for a set)."""
    report = evpi(m, a, x, **kwargs)
    return report.value - sum(m.cost(n) for n in report.observed)
