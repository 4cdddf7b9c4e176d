"""Capacity investment: capital cost plus expected operating cost over the horizon."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import formulation
from ._qp import solve_qp
from .core import (
    COST_SOLAR,
    COST_STORAGE,
    COST_WIND,
    DispatchSolution,
    MicrogridSpec,
    Portfolio,
)
from .dispatch import SolverConfig, _require_preferred_feasible, solve_central
from .scenarios import Scenario, ScenarioSet


@dataclass
class InvestmentSolution:
    portfolio: Portfolio
    expected_operating_cost: float
    days: int
    dispatch: list[DispatchSolution] = field(default_factory=list)
    demand_response: bool = True
    solver_status: str = ""

    @property
    def capital_cost(self) -> float:
        return self.portfolio.capital_cost

    @property
    def overall_cost(self) -> float:
        return self.capital_cost + self.days * self.expected_operating_cost

    def to_dict(self) -> dict:
        p = self.portfolio
        return {
            "alpha_s": p.alpha_s,
            "alpha_w": p.alpha_w,
            "alpha_e": p.alpha_e,
            "c_s": p.c_s,
            "c_w": p.c_w,
            "c_e": p.c_e,
            "budget": p.budget if math.isfinite(p.budget) else None,
            "days": self.days,
            "demand_response": self.demand_response,
            "capital_cost": self.capital_cost,
            "expected_operating_cost": self.expected_operating_cost,
            "overall_cost": self.overall_cost,
            "solver_status": self.solver_status,
            "dispatch": [d.to_dict() for d in self.dispatch],
        }


def expected_operating_cost(
    portfolio: Portfolio,
    spec: MicrogridSpec,
    scenarios: ScenarioSet | Sequence[Scenario],
    cfg: SolverConfig | None = None,
    demand_response: bool = True,
) -> float:
    """Probability-weighted optimal daily operating cost."""
    return float(
        sum(s.pi * solve_central(spec, portfolio, s, cfg, demand_response).objective for s in scenarios)
    )


def solve_ep1(
    spec: MicrogridSpec,
    scenarios: ScenarioSet | Sequence[Scenario],
    c_s: float = COST_SOLAR,
    c_w: float = COST_WIND,
    c_e: float = COST_STORAGE,
    budget: float = math.inf,
    days: int | None = None,
    cfg: SolverConfig | None = None,
    demand_response: bool = True,
) -> InvestmentSolution:
    """Optimal capacities from the single-level joint model over all scenarios.

    Capacities and every scenario's schedule are optimized together in one
    convex QP.  The reported per-scenario schedules are then re-solved at the
    optimal capacities, so the cost breakdown is exactly reproducible.
    """
    days = spec.days if days is None else days
    scenarios = list(scenarios)
    spec.check_feasible()
    fixed = None
    if not demand_response:
        _require_preferred_feasible(spec)
        fixed = spec.preferred_matrix().sum(axis=0)
    template = Portfolio(0.0, 0.0, 0.0, c_s, c_w, c_e, budget)
    qp = formulation.build(
        spec, scenarios, [s.pi for s in scenarios], template, invest=True, fixed_load=fixed, days=days
    )
    res = solve_qp(*qp.args(), what="joint investment")

    alpha = np.maximum(res.z[:3], 0.0)
    alpha[alpha < 1e-9 * max(1.0, alpha.max())] = 0.0
    spend = float(template.unit_costs @ alpha)
    if spend > budget:
        alpha *= budget / spend
    best = template.with_capacities(*map(float, alpha))

    dispatch = [solve_central(spec, best, s, cfg, demand_response) for s in scenarios]
    expected = float(sum(s.pi * d.objective for s, d in zip(scenarios, dispatch)))
    return InvestmentSolution(best, expected, days, dispatch, demand_response, res.status)


def overall_cost(
    portfolio: Portfolio,
    spec: MicrogridSpec,
    scenarios: ScenarioSet | Sequence[Scenario],
    days: int | None = None,
    demand_response: bool = True,
) -> float:
    """Capital cost plus ``days`` times the expected operating cost at fixed capacities."""
    days = spec.days if days is None else days
    return portfolio.capital_cost + days * expected_operating_cost(portfolio, spec, scenarios, None, demand_response)


def budget_sweep(
    spec: MicrogridSpec,
    scenarios: ScenarioSet | Sequence[Scenario],
    budgets: Sequence[float],
    c_s: float = COST_SOLAR,
    c_w: float = COST_WIND,
    c_e: float = COST_STORAGE,
    days: int | None = None,
    demand_response: bool = True,
) -> list[InvestmentSolution]:
    return [
        solve_ep1(spec, scenarios, c_s, c_w, c_e, B, days, demand_response=demand_response) for B in budgets
    ]
