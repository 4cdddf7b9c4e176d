import itertools

import numpy as np
import pytest

from microgrid_planner.core import ModelError, Portfolio
from microgrid_planner.dispatch import solve_central
from microgrid_planner.instances import make_rng, random_instance, random_investment_instance
from microgrid_planner.portfolio import solve_ep1
from microgrid_planner.robust import (
    UncertaintySet,
    actual_operator_cost,
    adjusted_scenario,
    error_sweep,
    solve_rp1,
    solve_rp2,
    worst_case_errors,
)
from microgrid_planner.scenarios import Scenario

COSTS = (6.0, 8.0, 3.0)


def test_symmetric_bounds_hit_lower():
    d = np.full((1, 4), 0.1)
    es, ew = worst_case_errors(UncertaintySet.symmetric(d, 2 * d), 0)
    assert np.all(es == -0.1) and np.all(ew == -0.2)


def test_zero_set_reduces_to_nominal(rng):
    spec, p, scen = random_instance(rng)
    u = UncertaintySet.zero(1, spec.horizon)
    es, ew = worst_case_errors(u, 0)
    assert np.all(es == 0) and np.all(ew == 0)
    a, b = solve_rp2(spec, p, scen, u), solve_central(spec, p, scen)
    assert a.objective == b.objective
    assert np.array_equal(a.loads, b.loads)


def test_total_forecast_loss(rng):
    spec, p, scen = random_instance(rng)
    u = UncertaintySet.symmetric(scen.solar[None, :], scen.wind[None, :])
    rp2 = solve_rp2(spec, p, scen, u)
    dark = solve_central(spec, Portfolio(0.0, 0.0, p.alpha_e), scen)
    assert rp2.objective == pytest.approx(dark.objective, rel=1e-9)


def test_worst_case_independent_of_supply(rng):
    u = UncertaintySet.symmetric(rng.uniform(0, 0.2, (2, 5)), rng.uniform(0, 0.2, (2, 5)))
    scen = Scenario(rng.uniform(0, 1, 5), rng.uniform(0, 1, 5))
    p = Portfolio(3.0, 4.0)
    es, ew = worst_case_errors(u, 1)
    for _ in range(30):
        Q = rng.uniform(0, 10, 5)
        worst = actual_operator_cost(Q, p, scen, es, ew, 0.1)
        for e in rng.uniform(0, 1, (10, 2, 5)):
            s_err = u.solar_lo[1] + e[0] * (u.solar_hi[1] - u.solar_lo[1])
            w_err = u.wind_lo[1] + e[1] * (u.wind_hi[1] - u.wind_lo[1])
            assert actual_operator_cost(Q, p, scen, s_err, w_err, 0.1) <= worst + 1e-12


def test_corner_enumeration(rng):
    scen = Scenario(rng.uniform(0, 1, 3), rng.uniform(0, 1, 3))
    lo_s, lo_w = -rng.uniform(0, 0.3, 3), -rng.uniform(0, 0.3, 3)
    hi_s, hi_w = rng.uniform(0, 0.3, 3), rng.uniform(0, 0.3, 3)
    u = UncertaintySet(lo_s[None], hi_s[None], lo_w[None], hi_w[None])
    p = Portfolio(5.0, 5.0)
    Q = rng.uniform(2, 8, 3)
    values = []
    for corner in itertools.product((0, 1), repeat=6):
        c = np.array(corner)
        es = np.where(c[:3] == 0, lo_s, hi_s)
        ew = np.where(c[3:] == 0, lo_w, hi_w)
        values.append(actual_operator_cost(Q, p, scen, es, ew, 0.05))
    assert max(values) == pytest.approx(values[0], abs=1e-15)
    assert actual_operator_cost(Q, p, scen, *worst_case_errors(u, 0), 0.05) == values[0]


def test_adjusted_clamped():
    s = Scenario([0.05, 0.95], [0.5, 0.0])
    adj = adjusted_scenario(s, [-0.1, 0.1], [0.0, -0.2])
    assert np.array_equal(adj.solar, [0.0, 1.0])
    assert np.array_equal(adj.wind, [0.5, 0.0])


def test_set_validation():
    with pytest.raises(ModelError):
        UncertaintySet(np.ones((1, 2)), np.zeros((1, 2)), np.zeros((1, 2)), np.zeros((1, 2)))
    with pytest.raises(ModelError):
        UncertaintySet(np.zeros((1, 2)), np.zeros((1, 3)), np.zeros((1, 2)), np.zeros((1, 2)))
    with pytest.raises(ModelError):
        UncertaintySet.symmetric(-np.ones((1, 2)), np.ones((1, 2)))
    with pytest.raises(ModelError):
        UncertaintySet.from_relative([Scenario([0.5], [0.5])], 150)
    with pytest.raises(ModelError):
        worst_case_errors(UncertaintySet.zero(2, 3), 2)


def test_relative_bounds():
    s = [Scenario([0.5, 0.2], [0.4, 0.0], 1.0)]
    u = UncertaintySet.from_relative(s, 10)
    assert np.allclose(u.solar_lo, [[-0.05, -0.02]])
    assert np.allclose(u.wind_hi, [[0.04, 0.0]])


@pytest.mark.parametrize("seed", range(5))
def test_rp2_dominates_p2(seed):
    rng = make_rng(seed)
    spec, p, scen = random_instance(rng, horizon=6)
    u = UncertaintySet.symmetric(rng.uniform(0, 0.3, (1, 6)), rng.uniform(0, 0.3, (1, 6)))
    assert solve_rp2(spec, p, scen, u).objective >= solve_central(spec, p, scen).objective - 1e-12


def test_rp1_zero_error_matches_ep1():
    spec, scen = random_investment_instance(make_rng())
    a = solve_rp1(spec, scen, UncertaintySet.zero(2, spec.horizon), *COSTS, budget=15.0)
    b = solve_ep1(spec, scen, *COSTS, budget=15.0)
    assert np.array_equal(a.portfolio.capacities, b.portfolio.capacities)
    assert a.overall_cost == b.overall_cost


def test_rp1_cost_grows_with_width():
    spec, scen = random_investment_instance(make_rng(1))
    res = error_sweep(spec, scen, [0, 5, 10, 20], *COSTS, budget=15.0)
    costs = [s.overall_cost for _, s in res]
    assert np.all(np.diff(costs) >= -1e-9)


def test_size_mismatch():
    spec, scen = random_investment_instance(make_rng())
    with pytest.raises(ModelError):
        solve_rp1(spec, scen, UncertaintySet.zero(3, spec.horizon), *COSTS)
    with pytest.raises(ModelError):
        solve_rp1(spec, scen, UncertaintySet.zero(2, spec.horizon + 1), *COSTS)
