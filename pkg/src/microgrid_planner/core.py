"""Domain model and the cost / constraint primitives shared by every solver.

Units: power in kW on one-hour slots, so kW and kWh are numerically the same.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .scenarios import Scenario

# Paper defaults for the cost parameters (HKD).
BETA_OPERATOR = 0.005
BETA_USER = 0.5
COST_SOLAR = 12480.0
COST_WIND = 7800.0
COST_STORAGE = 1950.0
HORIZON_DAYS = 3650


class ModelError(ValueError):
    """Malformed model parameters (shapes, signs, ranges)."""


class InfeasibleModelError(ModelError):
    """The model admits no feasible schedule; ``constraint`` names the culprit."""

    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        msg = f"infeasible: {constraint}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NonConvergenceError(RuntimeError):
    pass


def _frozen(a, name: str, length: int | None = None) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != 1:
        raise ModelError(f"{name} must be one-dimensional")
    if length is not None and arr.shape[0] != length:
        raise ModelError(f"{name} has length {arr.shape[0]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class UserSpec:
    """One user's elastic load: hourly bounds, daily total, preferred curve, discomfort weight."""

    lower: np.ndarray
    upper: np.ndarray
    total: float
    preferred: np.ndarray
    beta: float = BETA_USER

    def __post_init__(self):
        lo = _frozen(self.lower, "lower")
        hi = _frozen(self.upper, "upper", len(lo))
        y = _frozen(self.preferred, "preferred", len(lo))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "preferred", y)
        object.__setattr__(self, "total", float(self.total))
        if np.any(lo < 0):
            raise ModelError("negative lower load bound")
        if np.any(lo > hi):
            raise ModelError("lower load bound exceeds upper bound")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ModelError("discomfort coefficient must be positive")

    @property
    def horizon(self) -> int:
        return len(self.lower)

    def check_feasible(self, index: int = 0, tol: float = 1e-9) -> None:
        lo_sum, hi_sum = self.lower.sum(), self.upper.sum()
        if self.total < lo_sum - tol or self.total > hi_sum + tol:
            raise InfeasibleModelError(
                f"loadconstraint2 (user {index})",
                f"total {self.total:g} outside [{lo_sum:g}, {hi_sum:g}]",
            )

    def preferred_is_feasible(self, tol: float = 1e-6) -> bool:
        y = self.preferred
        return bool(
            np.all(y >= self.lower - tol)
            and np.all(y <= self.upper + tol)
            and abs(y.sum() - self.total) <= tol * max(1.0, abs(self.total))
        )


@dataclass(frozen=True)
class StorageSpec:
    """Battery physics per unit of installed capacity."""

    charge_rate: float = 0.25
    discharge_rate: float = 0.25
    eta_c: float = 0.95
    eta_d: float = 0.95
    soc_min: float = 0.2
    soc_max: float = 1.0
    soc0: float = 0.5

    def __post_init__(self):
        if self.charge_rate <= 0 or self.discharge_rate <= 0:
            raise ModelError("charge/discharge rates must be positive")
        if not (0 < self.eta_c <= 1 and 0 < self.eta_d <= 1):
            raise ModelError("efficiencies must lie in (0, 1]")
        if not (0 <= self.soc_min <= self.soc0 <= self.soc_max <= 1):
            raise ModelError("need 0 <= soc_min <= soc0 <= soc_max <= 1")

    @classmethod
    def from_dod(cls, dod_max: float, **kw) -> "StorageSpec":
        """Storage with ``soc_min = 1 - dod_max``."""
        return cls(soc_min=1.0 - dod_max, **kw)


@dataclass(frozen=True)
class MicrogridSpec:
    users: tuple[UserSpec, ...]
    inelastic: np.ndarray
    beta_o: float = BETA_OPERATOR
    storage: StorageSpec = field(default_factory=StorageSpec)
    days: int = HORIZON_DAYS

    def __post_init__(self):
        b = _frozen(self.inelastic, "inelastic")
        object.__setattr__(self, "inelastic", b)
        object.__setattr__(self, "users", tuple(self.users))
        if len(b) < 1:
            raise ModelError("horizon must be at least one slot")
        if np.any(b < 0):
            raise ModelError("inelastic load must be non-negative")
        if not self.beta_o > 0:
            raise ModelError("beta_o must be positive")
        if self.days < 1:
            raise ModelError("day count must be >= 1")
        for u in self.users:
            if u.horizon != len(b):
                raise ModelError("user horizon differs from inelastic load horizon")

    @property
    def horizon(self) -> int:
        return len(self.inelastic)

    @property
    def n_users(self) -> int:
        return len(self.users)

    def check_feasible(self) -> None:
        for i, u in enumerate(self.users):
            u.check_feasible(i)

    def preferred_matrix(self) -> np.ndarray:
        if not self.users:
            return np.zeros((0, self.horizon))
        return np.vstack([u.preferred for u in self.users])


@dataclass(frozen=True)
class Portfolio:
    """Installed capacities with their unit costs and the budget they must respect."""

    alpha_s: float = 0.0
    alpha_w: float = 0.0
    alpha_e: float = 0.0
    c_s: float = COST_SOLAR
    c_w: float = COST_WIND
    c_e: float = COST_STORAGE
    budget: float = math.inf

    def __post_init__(self):
        caps = (self.alpha_s, self.alpha_w, self.alpha_e)
        if any(a < 0 or not math.isfinite(a) for a in caps):
            # investconstraint2
            raise ModelError("capacities must be finite and non-negative")
        if any(c < 0 for c in (self.c_s, self.c_w, self.c_e)):
            raise ModelError("unit costs must be non-negative")
        if self.budget < 0:
            raise ModelError("budget must be non-negative")
        if self.capital_cost > self.budget * (1 + 1e-9) + 1e-9:
            # investconstraint1
            raise ModelError(f"capital cost {self.capital_cost:g} exceeds budget {self.budget:g}")

    @property
    def capacities(self) -> np.ndarray:
        return np.array([self.alpha_s, self.alpha_w, self.alpha_e])

    @property
    def unit_costs(self) -> np.ndarray:
        return np.array([self.c_s, self.c_w, self.c_e])

    @property
    def capital_cost(self) -> float:
        return float(self.c_s * self.alpha_s + self.c_w * self.alpha_w + self.c_e * self.alpha_e)

    def with_capacities(self, alpha_s: float, alpha_w: float, alpha_e: float) -> "Portfolio":
        return Portfolio(alpha_s, alpha_w, alpha_e, self.c_s, self.c_w, self.c_e, self.budget)


@dataclass
class DispatchSolution:
    """Schedule for one scenario. ``loads`` has one row per user."""

    supply: np.ndarray
    loads: np.ndarray
    charge: np.ndarray
    discharge: np.ndarray
    soc: np.ndarray
    prices: np.ndarray
    renewable: np.ndarray
    grid: np.ndarray
    operator_cost: float
    discomfort_cost: float
    converged: bool = True
    iterations: int | None = None

    @property
    def objective(self) -> float:
        return self.operator_cost + self.discomfort_cost

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "operator_cost": self.operator_cost,
            "discomfort_cost": self.discomfort_cost,
            "converged": self.converged,
            "iterations": self.iterations,
            "supply": self.supply.tolist(),
            "loads": self.loads.tolist(),
            "charge": self.charge.tolist(),
            "discharge": self.discharge.tolist(),
            "soc": self.soc.tolist(),
            "prices": self.prices.tolist(),
            "renewable": self.renewable.tolist(),
            "grid": self.grid.tolist(),
        }


def renewable_cap(portfolio: Portfolio, scenario: Scenario) -> np.ndarray:
    return scenario.solar * portfolio.alpha_s + scenario.wind * portfolio.alpha_w


def operator_cost(Q, portfolio: Portfolio, scenario: Scenario, spec: MicrogridSpec) -> float:
    """Quadratic cost of grid purchases after renewables are used first."""
    Q = np.asarray(Q, dtype=float)
    deficit = np.maximum(Q - renewable_cap(portfolio, scenario), 0.0)
    return float(spec.beta_o * np.dot(deficit, deficit))


def operator_cost_gradient(Q, portfolio: Portfolio, scenario: Scenario, beta_o: float) -> np.ndarray:
    # zero at the kink Q == r_max
    Q = np.asarray(Q, dtype=float)
    return 2.0 * beta_o * np.maximum(Q - renewable_cap(portfolio, scenario), 0.0)


def discomfort_cost(x, user: UserSpec) -> float:
    d = np.asarray(x, dtype=float) - user.preferred
    return float(user.beta * np.dot(d, d))


def split_supply(Q, r_max, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Merit-order split of aggregate supply into renewable and grid parts."""
    Q = np.asarray(Q, dtype=float)
    r_max = np.asarray(r_max, dtype=float)
    if np.any(Q < -tol):
        raise ModelError("aggregate supply must be non-negative")
    Q = np.maximum(Q, 0.0)
    r = np.minimum(Q, r_max)
    return r, Q - r


def soc_trajectory(charge, discharge, alpha_e: float, storage: StorageSpec) -> np.ndarray:
    """State of charge after each slot, starting from ``storage.soc0``."""
    rc = np.asarray(charge, dtype=float)
    rd = np.asarray(discharge, dtype=float)
    if alpha_e <= 0:
        if np.any(rc != 0) or np.any(rd != 0):
            raise ModelError("storage activity with zero storage capacity")
        return np.full(len(rc), storage.soc0)
    net = storage.eta_c * rc - rd / storage.eta_d
    return storage.soc0 + np.cumsum(net) / alpha_e


def validate_dispatch(
    sol: DispatchSolution,
    spec: MicrogridSpec,
    portfolio: Portfolio,
    scenario: Scenario,
    tol: float = 1e-6,
    terminal_tol: float = 1e-9,
) -> list[str]:
    """Return a list of violated constraints (empty when the schedule is valid)."""
    bad = []
    st = spec.storage
    x = sol.loads
    for i, u in enumerate(spec.users):
        if np.any(x[i] < u.lower - tol) or np.any(x[i] > u.upper + tol):
            bad.append(f"loadconstraint1 user {i}")
        if abs(x[i].sum() - u.total) > tol * max(1.0, abs(u.total)):
            bad.append(f"loadconstraint2 user {i}")
    a = portfolio.alpha_e
    if np.any(sol.charge < -tol) or np.any(sol.charge > a * st.charge_rate + tol):
        bad.append("storage charge bound")
    if np.any(sol.discharge < -tol) or np.any(sol.discharge > a * st.discharge_rate + tol):
        bad.append("storage discharge bound")
    soc = soc_trajectory(sol.charge, sol.discharge, a, st) if a > 0 else np.full(spec.horizon, st.soc0)
    if np.max(np.abs(soc - sol.soc)) > tol:
        bad.append("storage dynamics")
    if np.any(soc < st.soc_min - tol) or np.any(soc > st.soc_max + tol):
        bad.append("state-of-charge bounds")
    if abs(soc[-1] - st.soc0) > terminal_tol:
        bad.append("terminal state of charge")
    load = spec.inelastic + x.sum(axis=0) + sol.charge - sol.discharge
    if np.max(np.abs(load - sol.supply)) > tol * max(1.0, np.max(np.abs(load))):
        bad.append("power balance")
    if np.any(sol.supply < -tol):
        bad.append("non-negative supply")
    r_max = renewable_cap(portfolio, scenario)
    if np.any(sol.renewable < -tol) or np.any(sol.renewable > r_max + tol):
        bad.append("renewable supply bound")
    if np.any(sol.grid < -tol):
        bad.append("grid purchase sign")
    if np.max(np.abs(sol.renewable + sol.grid - sol.supply)) > tol:
        bad.append("supply split")
    return bad


def validate_portfolio(portfolio: Portfolio, tol: float = 1e-6) -> list[str]:
    """Budget and sign checks on an investment decision."""
    bad = []
    if np.any(portfolio.capacities < -tol):
        bad.append("investconstraint2")
    if portfolio.capital_cost > portfolio.budget + tol * max(1.0, portfolio.capital_cost):
        bad.append("investconstraint1")
    return bad
