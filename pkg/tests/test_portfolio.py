import math

import numpy as np
import pytest

from microgrid_planner.core import MicrogridSpec, Portfolio, UserSpec, validate_dispatch, validate_portfolio
from microgrid_planner.dispatch import solve_central
from microgrid_planner.instances import make_rng, random_instance, random_investment_instance
from microgrid_planner.portfolio import budget_sweep, expected_operating_cost, overall_cost, solve_ep1
from microgrid_planner.scenarios import Scenario

COSTS = (6.0, 8.0, 3.0)


@pytest.fixture
def small():
    return random_investment_instance(make_rng())


def test_expected_cost_singleton(small):
    spec, scen = small
    s = scen[0].with_pi(1.0)
    p = Portfolio(0.5, 0.5, 0.5)
    assert expected_operating_cost(p, spec, [s]) == pytest.approx(solve_central(spec, p, s).objective, rel=1e-12)


def test_expected_cost_weights(small):
    spec, scen = small
    a, b = scen[0].with_pi(0.3), scen[1].with_pi(0.7)
    p = Portfolio(0.4, 0.2, 0.3)
    f1 = solve_central(spec, p, a).objective
    f2 = solve_central(spec, p, b).objective
    assert expected_operating_cost(p, spec, [a, b]) == pytest.approx(0.3 * f1 + 0.7 * f2, rel=1e-12)


def test_expected_cost_saturated():
    y = np.array([1.0, 1.0, 1.0])
    u = UserSpec(np.zeros(3), np.full(3, 2.0), 3.0, y)
    spec = MicrogridSpec((u,), np.ones(3))
    scen = [Scenario(np.full(3, 0.5), np.full(3, 0.5), 0.5), Scenario(np.full(3, 0.2), np.full(3, 0.9), 0.5)]
    assert expected_operating_cost(Portfolio(100.0, 100.0), spec, scen) == pytest.approx(0.0, abs=1e-9)


def test_zero_budget(small):
    spec, scen = small
    sol = solve_ep1(spec, scen, *COSTS, budget=0.0)
    assert np.all(sol.portfolio.capacities == 0)
    expect = spec.days * expected_operating_cost(Portfolio(), spec, scen)
    assert sol.overall_cost == pytest.approx(expect, rel=1e-9)


def test_dominated_investment(small):
    spec, scen = small
    sol = solve_ep1(spec, scen, 1e6, 1e6, 1e6)
    assert np.all(sol.portfolio.capacities <= 1e-6)


def test_decomposition_and_constraints(small):
    spec, scen = small
    sol = solve_ep1(spec, scen, *COSTS, budget=15.0)
    recomputed = sol.portfolio.capital_cost + spec.days * sum(
        s.pi * solve_central(spec, sol.portfolio, s).objective for s in scen)
    assert sol.overall_cost == pytest.approx(recomputed, abs=1e-6)
    assert sol.overall_cost == pytest.approx(overall_cost(sol.portfolio, spec, scen), abs=1e-6)
    assert validate_portfolio(sol.portfolio) == []
    for s, d in zip(scen, sol.dispatch):
        assert validate_dispatch(d, spec, sol.portfolio, s) == []


def test_ep1_beats_candidates(small):
    spec, scen = small
    sol = solve_ep1(spec, scen, *COSTS, budget=15.0)
    rng = make_rng(3)
    for _ in range(40):
        a = rng.uniform(0, 1, 3) * 15.0 / np.array(COSTS) / 3
        cand = overall_cost(Portfolio(*a, *COSTS, budget=15.0), spec, scen)
        assert sol.overall_cost <= cand + 1e-9 * cand


def test_first_order_optimality(small):
    spec, scen = small
    sol = solve_ep1(spec, scen, *COSTS)
    base = sol.overall_cost
    h = 1e-4
    for k in range(3):
        for sign in (1, -1):
            a = sol.portfolio.capacities.copy()
            a[k] += sign * h
            if a[k] < 0:
                continue
            assert overall_cost(Portfolio(*a, *COSTS), spec, scen) >= base - 1e-8 * base


def test_budget_sweep_monotone_convex(small):
    spec, scen = small
    budgets = [0.0, 3.0, 6.0, 9.0, 12.0, 30.0, 60.0]
    sols = budget_sweep(spec, scen, budgets, *COSTS)
    costs = np.array([s.overall_cost for s in sols])
    assert np.all(np.diff(costs) <= 1e-9 * costs[0])
    # convex on the evenly spaced part of the sweep
    assert np.all(np.diff(costs[:5], 2) >= -1e-7 * costs[0])
    free = solve_ep1(spec, scen, *COSTS)
    for B, s in zip(budgets, sols):
        spend = s.capital_cost
        assert spend <= B + 1e-9
        if B > free.capital_cost * (1 + 1e-6):
            assert np.allclose(s.portfolio.capacities, free.portfolio.capacities, rtol=1e-5, atol=1e-7)
        else:
            assert spend == pytest.approx(B, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_demand_response_never_hurts(seed):
    spec, scen = random_investment_instance(make_rng(seed))
    with_dr = solve_ep1(spec, scen, *COSTS, budget=15.0)
    without = solve_ep1(spec, scen, *COSTS, budget=15.0, demand_response=False)
    assert with_dr.overall_cost <= without.overall_cost + 1e-9
    assert np.allclose(without.dispatch[0].loads, spec.preferred_matrix(), atol=1e-9)


def test_to_dict(small):
    spec, scen = small
    d = solve_ep1(spec, scen, *COSTS).to_dict()
    assert d["budget"] is None
    assert d["overall_cost"] == pytest.approx(d["capital_cost"] + d["days"] * d["expected_operating_cost"])
    assert len(d["dispatch"]) == 2


def test_days_override(small):
    spec, scen = small
    a = solve_ep1(spec, scen, *COSTS, days=1)
    b = solve_ep1(spec, scen, *COSTS, days=50)
    assert a.days == 1 and b.days == 50
    assert a.capital_cost <= b.capital_cost + 1e-9


def test_infinite_budget_default(small):
    spec, scen = small
    assert math.isinf(solve_ep1(spec, scen, *COSTS).portfolio.budget)


def test_random_24h_instance_validates():
    spec, p, s = random_instance(make_rng(9), n_users=3)
    sol = solve_ep1(spec, [s], 50.0, 40.0, 10.0, budget=200.0, days=30)
    assert validate_portfolio(sol.portfolio) == []
    assert validate_dispatch(sol.dispatch[0], spec, sol.portfolio, s) == []
