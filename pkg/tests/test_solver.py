import math
from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infovalue import (
    CeTable,
    EvpiMethod,
    Exponential,
    IncompleteAssignment,
    InvalidQuery,
    ModelTooLarge,
    NonCanonicalQuery,
    TabulatedMonotone,
    WouldCreateCycle,
    all_policies,
    certain_equivalent,
    evpi,
    expected_utility,
    joint_probability,
    load,
    nevpi,
    solve,
    with_observation,
)
from infovalue.generate import random_diagram
from oracles import linear_evpi, max_eu, observe

MODELS = Path(__file__).resolve().parent.parent / "models"

# brute-force EVPI per chance node for decision A, computed with oracles.linear_evpi
SEVEN_CHANCE_EVPI = {
    "X1": 0.0,
    "X2": 24.8906142914,
    "X3": 17.386049702,
    "X4": 1.4314958,
    "X5": 8.32300322,
    "X6": 0.0,
    "X7": 0.86567,
}


@pytest.fixture
def symmetric():
    return load(MODELS / "symmetric.json")


def test_symmetric_model(symmetric):
    pol, eu = solve(symmetric)
    assert eu == 50.0
    assert pol["A"].actions == (0,)  # tie between actions: smallest index wins
    report = evpi(symmetric, "A", "X")
    assert report.value == 50.0
    assert report.method is EvpiMethod.CLOSED_FORM
    assert report.residual == 0.0


def test_symmetric_model_exponential_has_analytic_evpi(symmetric):
    r = 40.0
    m = replace(symmetric, curve=Exponential(r))
    # without the observation the lottery is 100 or 0 with even odds; with it, 100 for sure
    ce_without = -r * math.log(1 - 0.5 * (1 - math.exp(-100 / r)))
    report = evpi(m, "A", "X")
    assert report.value == pytest.approx(100 - ce_without, abs=1e-10)
    assert certain_equivalent(m) == pytest.approx(ce_without, abs=1e-10)


def test_seven_chance_values_frozen():
    m = load(MODELS / "seven_chance.json")
    for x, expected in SEVEN_CHANCE_EVPI.items():
        assert evpi(m, "A", x).value == pytest.approx(expected, abs=1e-9)


def test_ties_pick_lexicographically_smallest_policy():
    m = random_diagram(5, n_chance=2)
    flat = replace(m, value_ce=CeTable(m.value_ce.parent_order, [7.0] * len(m.value_ce.table)))
    pol, eu = solve(flat)
    assert eu == pytest.approx(7.0)
    assert set(pol.key) == {0}


def test_optimum_equals_best_enumerated_policy():
    m = random_diagram(11, n_chance=3, n_decisions=2)
    pol, eu = solve(m)
    scored = [(expected_utility(m, p), p.key) for p in all_policies(m)]
    best = max(s for s, _ in scored)
    assert eu == pytest.approx(best, abs=1e-12)
    assert pol.key == min(k for s, k in scored if s >= best - 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 2), st.integers(2, 3))
def test_solver_matches_brute_force(seed, n_decisions, n_actions):
    m = random_diagram(seed, n_chance=3, n_decisions=n_decisions, n_actions=n_actions, max_info=1)
    assert solve(m)[1] == pytest.approx(max_eu(m), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 2))
def test_evpi_matches_brute_force(seed, n_decisions):
    # kept small: the oracle enumerates every policy of the informed model
    m = random_diagram(seed, n_chance=3, n_decisions=n_decisions, max_info=1)
    for x in m.chance_nodes:
        for a in m.decision_nodes:
            assert evpi(m, a, x).value == pytest.approx(max(0.0, linear_evpi(m, [x], a)), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bisection_root_solves_the_indifference_equation(seed):
    curve = TabulatedMonotone(((0, 0), (30, 0.6), (70, 0.9), (100, 1.0)))
    m = random_diagram(seed, n_chance=3, curve=curve, max_info=1)
    base = max_eu(m)
    for x in m.chance_nodes:
        report = evpi(m, "A", x)
        assert report.method is EvpiMethod.BISECTION
        assert report.iterations <= 200
        if report.raw_value > 0:
            # paying the price for the observation leaves the decision maker indifferent
            assert max_eu(observe(m, [x], "A"), shift=report.value) == pytest.approx(base, abs=1e-9)


def test_forced_bisection_agrees_with_closed_form():
    m = replace(random_diagram(8, n_chance=4), curve=Exponential(60.0))
    for x in m.chance_nodes:
        closed = evpi(m, "A", x)
        bis = evpi(m, "A", x, method="bisection")
        assert bis.value == pytest.approx(closed.value, abs=1e-6)
        assert bis.residual <= 1e-9


def test_closed_form_refused_without_delta_property():
    m = replace(random_diagram(2), curve=TabulatedMonotone(((0, 0), (100, 1))))
    with pytest.raises(InvalidQuery):
        evpi(m, "A", "X1", method="closed-form")


def test_joint_evpi_dominates_singletons():
    m = random_diagram(21, n_chance=4)
    joint = evpi(m, "A", ["X1", "X2"]).value
    assert joint >= evpi(m, "A", "X1").value - 1e-12
    assert joint >= evpi(m, "A", "X2").value - 1e-12
    assert joint == pytest.approx(linear_evpi(m, ["X1", "X2"], "A"), abs=1e-9)


def test_nevpi_subtracts_summed_cost():
    m = load(MODELS / "seven_chance.json")
    assert nevpi(m, "A", "X2") == pytest.approx(SEVEN_CHANCE_EVPI["X2"] - 2.0, abs=1e-9)
    assert nevpi(m, "A", ["X2", "X3"]) == pytest.approx(evpi(m, "A", ["X2", "X3"]).value - 3.5)


def test_observation_errors():
    m = load(MODELS / "noncanonical.json")
    with pytest.raises(NonCanonicalQuery):
        evpi(m, "A", "X")
    with pytest.raises(WouldCreateCycle):
        with_observation(m, "X", "A")
    # W is already observed: nothing changes and nothing is gained
    assert with_observation(m, "W", "A") is m
    assert evpi(m, "A", "W").value == 0.0


def test_model_too_large():
    m = random_diagram(0, n_chance=6, n_states=3)
    with pytest.raises(ModelTooLarge):
        solve(m, cap=100)


def test_joint_probability(symmetric):
    assert joint_probability(symmetric, {"X": 1}) == 0.5
    with pytest.raises(IncompleteAssignment):
        joint_probability(symmetric, {})
