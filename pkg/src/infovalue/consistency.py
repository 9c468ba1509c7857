"""Check qualitative orderings against exact numeric EVPI on random models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .generate import random_diagram
from .model import InfluenceDiagram
from .ordering import OrderingGraph, build_ordering
from .solver import evpi

REPORT_SCHEMA = "infovalue.check/1"


@dataclass
class ConsistencyReport:
    trials: int
    seed: int
    max_chance: int
    tolerance: float
    models_generated: int = 0
    edges_checked: int = 0
    zero_set_checked: int = 0
    violations: list[dict] = field(default_factory=list)
    zero_violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.zero_violations

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "trials": self.trials,
            "seed": self.seed,
            "max_chance": self.max_chance,
            "tolerance": self.tolerance,
            "models_generated": self.models_generated,
            "edges_checked": self.edges_checked,
            "zero_set_checked": self.zero_set_checked,
            "violations": self.violations,
            "zero_violations": self.zero_violations,
            "ok": self.ok,
        }


def trial_seeds(seed: int, trials: int) -> list[int]:
    """Independent per-trial seeds, fixed by the master seed alone."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(trials)]


def trial_model(trial_seed: int, max_chance: int) -> InfluenceDiagram:
    rng = np.random.default_rng(trial_seed)
    n_chance = int(rng.integers(2, max(2, max_chance) + 1))
    n_actions = int(rng.integers(2, 5))
    return random_diagram(rng, n_chance=n_chance, n_decisions=1, n_actions=n_actions)


def run_check(
    trials: int = 200,
    seed: int = 0,
    max_chance: int = 6,
    *,
    tolerance: float = 1e-9,
    builder: Callable[[InfluenceDiagram, str], OrderingGraph] = build_ordering,
) -> ConsistencyReport:
    """Generate ``trials`` models and test every ordering edge and zero-set member.

    ``builder`` is swappable so a deliberately broken ordering can be fed in
    as a negative control.
    """
    report = ConsistencyReport(trials, seed, max_chance, tolerance)
    for s in trial_seeds(seed, trials):
        m = trial_model(s, max_chance)
        report.models_generated += 1
        (a,) = m.decision_nodes
        g = builder(m, a)
        values = {x: evpi(m, a, x).value for x in g.nodes}
        for e in g.edges:
            report.edges_checked += 1
            vx, vy = values[e.tail], values[e.head]
            if vx < vy - tolerance:
                report.violations.append(
                    {"seed": s, "edge": [e.tail, e.head], "evpi_x": vx, "evpi_y": vy}
                )
        for x in sorted(g.zero_set, key=g.nodes.index):
            report.zero_set_checked += 1
            if values[x] > tolerance:
                report.zero_violations.append({"seed": s, "node": x, "evpi": values[x]})
    return report
