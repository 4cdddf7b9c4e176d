"""Worst-case operation and investment under bounded renewable forecast errors.

Actual per-unit output is ``clamp(eta + e, 0, 1)`` with ``e`` in a per-hour box.
The operator's grid cost is non-increasing in ``e``, so the worst case sits at
the lower bounds whatever the schedule is; the robust problems are therefore
the nominal ones solved against the pessimistic profiles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    COST_SOLAR,
    COST_STORAGE,
    COST_WIND,
    DispatchSolution,
    MicrogridSpec,
    ModelError,
    Portfolio,
)
from .dispatch import SolverConfig, solve_central
from .portfolio import InvestmentSolution, solve_ep1
from .scenarios import Scenario, ScenarioSet


@dataclass(frozen=True)
class UncertaintySet:
    """Per scenario and hour error bounds; arrays of shape ``(S, T)``."""

    solar_lo: np.ndarray
    solar_hi: np.ndarray
    wind_lo: np.ndarray
    wind_hi: np.ndarray

    def __post_init__(self):
        arrs = []
        for name in ("solar_lo", "solar_hi", "wind_lo", "wind_hi"):
            a = np.array(getattr(self, name), dtype=float, ndmin=2)
            if not np.all(np.isfinite(a)):
                raise ModelError(f"{name} must be finite")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            arrs.append(a)
        if len({a.shape for a in arrs}) != 1:
            raise ModelError("error bound arrays must share one shape")
        if np.any(self.solar_lo > self.solar_hi) or np.any(self.wind_lo > self.wind_hi):
            raise ModelError("error lower bound exceeds upper bound")

    @property
    def n_scenarios(self) -> int:
        return self.solar_lo.shape[0]

    @classmethod
    def zero(cls, n_scenarios: int, horizon: int) -> "UncertaintySet":
        z = np.zeros((n_scenarios, horizon))
        return cls(z, z, z, z)

    @classmethod
    def symmetric(cls, solar_delta, wind_delta) -> "UncertaintySet":
        s = np.asarray(solar_delta, dtype=float)
        w = np.asarray(wind_delta, dtype=float)
        if np.any(s < 0) or np.any(w < 0):
            raise ModelError("error half-widths must be non-negative")
        return cls(-s, s, -w, w)

    @classmethod
    def from_relative(cls, scenarios: ScenarioSet | Sequence[Scenario], pct: float) -> "UncertaintySet":
        """Symmetric bounds of ``pct`` percent of each hour's forecast."""
        if not 0 <= pct <= 100:
            raise ModelError("error percentage must lie in [0, 100]")
        frac = pct / 100.0
        solar = np.array([s.solar for s in scenarios])
        wind = np.array([s.wind for s in scenarios])
        return cls.symmetric(frac * solar, frac * wind)


def worst_case_errors(uset: UncertaintySet, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Errors maximizing the actual grid cost in scenario ``index``: the lower bounds."""
    if not 0 <= index < uset.n_scenarios:
        raise ModelError(f"scenario index {index} out of range")
    return uset.solar_lo[index].copy(), uset.wind_lo[index].copy()


def adjusted_scenario(scenario: Scenario, e_solar, e_wind) -> Scenario:
    """Scenario with the realized profiles ``clamp(eta + e, 0, 1)``."""
    solar = np.clip(scenario.solar + np.asarray(e_solar, dtype=float), 0.0, 1.0)
    wind = np.clip(scenario.wind + np.asarray(e_wind, dtype=float), 0.0, 1.0)
    return Scenario(solar, wind, scenario.pi)


def actual_operator_cost(Q, portfolio: Portfolio, scenario: Scenario, e_solar, e_wind, beta_o: float) -> float:
    """Grid cost of supplying ``Q`` when the forecasts are off by ``(e_solar, e_wind)``."""
    real = adjusted_scenario(scenario, e_solar, e_wind)
    r_max = real.solar * portfolio.alpha_s + real.wind * portfolio.alpha_w
    gap = np.maximum(np.asarray(Q, dtype=float) - r_max, 0.0)
    return float(beta_o * gap @ gap)


def worst_case_set(scenarios: ScenarioSet | Sequence[Scenario], uset: UncertaintySet) -> list[Scenario]:
    scenarios = list(scenarios)
    if len(scenarios) != uset.n_scenarios:
        raise ModelError("uncertainty set and scenario set differ in size")
    if scenarios and uset.solar_lo.shape[1] != scenarios[0].horizon:
        raise ModelError("uncertainty set horizon differs from the scenarios")
    return [adjusted_scenario(s, *worst_case_errors(uset, w)) for w, s in enumerate(scenarios)]


def solve_rp2(
    spec: MicrogridSpec,
    portfolio: Portfolio,
    scenario: Scenario,
    uset: UncertaintySet,
    index: int = 0,
    cfg: SolverConfig | None = None,
    demand_response: bool = True,
) -> DispatchSolution:
    """Schedule minimizing the worst-case operating cost of one scenario."""
    worst = adjusted_scenario(scenario, *worst_case_errors(uset, index))
    return solve_central(spec, portfolio, worst, cfg, demand_response)


def solve_rp1(
    spec: MicrogridSpec,
    scenarios: ScenarioSet | Sequence[Scenario],
    uset: UncertaintySet,
    c_s: float = COST_SOLAR,
    c_w: float = COST_WIND,
    c_e: float = COST_STORAGE,
    budget: float = math.inf,
    days: int | None = None,
    cfg: SolverConfig | None = None,
    demand_response: bool = True,
) -> InvestmentSolution:
    """Capacities minimizing capital cost plus worst-case expected operating cost."""
    worst = worst_case_set(scenarios, uset)
    return solve_ep1(spec, worst, c_s, c_w, c_e, budget, days, cfg, demand_response)


def error_sweep(
    spec: MicrogridSpec,
    scenarios: ScenarioSet | Sequence[Scenario],
    pcts: Sequence[float],
    c_s: float = COST_SOLAR,
    c_w: float = COST_WIND,
    c_e: float = COST_STORAGE,
    budget: float = math.inf,
    days: int | None = None,
    demand_response: bool = True,
) -> list[tuple[float, InvestmentSolution]]:
    scenarios = list(scenarios)
    out = []
    for pct in pcts:
        uset = UncertaintySet.from_relative(scenarios, pct)
        sol = solve_rp1(spec, scenarios, uset, c_s, c_w, c_e, budget, days, demand_response=demand_response)
        out.append((float(pct), sol))
    return out
