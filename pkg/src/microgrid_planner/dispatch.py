"""Day-ahead operation: central solve and the decentralized pricing loop."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import formulation
from ._qp import solve_qp
from .core import (
    DispatchSolution,
    InfeasibleModelError,
    MicrogridSpec,
    ModelError,
    Portfolio,
    UserSpec,
    discomfort_cost,
    operator_cost,
    renewable_cap,
    soc_trajectory,
    split_supply,
)
from .scenarios import Scenario

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Settings of the pricing iteration.

    The step at iteration ``k`` is ``step0 / (1 + k / decay)``; it vanishes and
    is not summable for any ``decay > 0``.  ``decay=1`` gives ``step0/(1+k)``.
    ``step0=None`` picks ``1 / (2 max_i beta_i + 2 beta_o N)``.
    """

    step0: float | None = None
    tol: float = 1e-5
    max_iter: int = 50_000
    decay: float = 1000.0

    def __post_init__(self):
        if self.step0 is not None and not self.step0 > 0:
            raise ModelError("step0 must be positive")
        if not self.tol > 0:
            raise ModelError("tol must be positive")
        if self.max_iter < 1:
            raise ModelError("max_iter must be >= 1")
        if not self.decay > 0:
            raise ModelError("decay must be positive")

    def initial_step(self, spec: MicrogridSpec) -> float:
        if self.step0 is not None:
            return self.step0
        bmax = max((u.beta for u in spec.users), default=0.0)
        return 1.0 / (2 * bmax + 2 * spec.beta_o * max(spec.n_users, 1))

    def step(self, k: int, spec: MicrogridSpec) -> float:
        return self.initial_step(spec) / (1.0 + k / self.decay)


def project_box_sum(v, lo, hi, total: float, tol: float = 1e-9) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{lo <= x <= hi, sum(x) = total}``.

    The solution is ``clip(v - lam, lo, hi)``; the multiplier ``lam`` is located
    exactly on the piecewise-linear map ``lam -> sum(clip(v - lam, lo, hi))``.
    """
    v = np.asarray(v, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.sum() > total + tol or hi.sum() < total - tol:
        raise InfeasibleModelError("box-sum projection", f"total {total:g} outside [{lo.sum():g}, {hi.sum():g}]")
    bp = np.unique(np.concatenate([v - hi, v - lo]))
    s = np.clip(v[None, :] - bp[:, None], lo, hi).sum(axis=1)
    if total >= s[0]:
        lam = bp[0]
    elif total <= s[-1]:
        lam = bp[-1]
    else:
        j = int(np.searchsorted(-s, -total, side="right")) - 1
        lam = bp[j] + (s[j] - total) / (s[j] - s[j + 1]) * (bp[j + 1] - bp[j])
    return np.clip(v - lam, lo, hi)


def price_from_supply(Q, portfolio: Portfolio, scenario: Scenario, beta_o: float) -> np.ndarray:
    """Marginal grid cost at supply ``Q``; zero wherever renewables cover it."""
    Q = np.asarray(Q, dtype=float)
    return 2.0 * beta_o * np.maximum(Q - renewable_cap(portfolio, scenario), 0.0)


def user_best_response(user: UserSpec, prices, x_prev, gamma: float) -> np.ndarray:
    """One projected gradient step of the user's bill-plus-discomfort problem."""
    x_prev = np.asarray(x_prev, dtype=float)
    grad = 2.0 * user.beta * (x_prev - user.preferred) + np.asarray(prices, dtype=float)
    return project_box_sum(x_prev - gamma * grad, user.lower, user.upper, user.total)


def _close_soc_cycle(rc, rd, spec: MicrogridSpec, alpha_e: float):
    """Remove the solver's residual on the terminal state-of-charge equality."""
    st = spec.storage
    cap_c, cap_d = alpha_e * st.charge_rate, alpha_e * st.discharge_rate
    rc = np.clip(rc, 0.0, cap_c)
    rd = np.clip(rd, 0.0, cap_d)
    for _ in range(3):
        delta = st.eta_c * rc.sum() - rd.sum() / st.eta_d
        if delta == 0:
            break
        for t in range(len(rc) - 1, -1, -1):
            if delta > 0:
                take = min(rc[t], delta / st.eta_c)
                rc[t] -= take
                delta -= take * st.eta_c
                add = min(cap_d - rd[t], max(delta, 0.0) * st.eta_d)
                rd[t] += add
                delta -= add / st.eta_d
            elif delta < 0:
                take = min(rd[t], -delta * st.eta_d)
                rd[t] -= take
                delta += take / st.eta_d
                add = min(cap_c - rc[t], max(-delta, 0.0) / st.eta_c)
                rc[t] += add
                delta += add * st.eta_c
            if abs(delta) < 1e-15:
                break
    return rc, rd


def assemble_solution(
    spec: MicrogridSpec,
    portfolio: Portfolio,
    scenario: Scenario,
    loads,
    charge,
    discharge,
    converged: bool = True,
    iterations: int | None = None,
    polish: bool = True,
) -> DispatchSolution:
    """Build a full schedule (supply split, SOC, prices, costs) from the primal variables."""
    x = np.array(loads, dtype=float).reshape(spec.n_users, spec.horizon)
    rc = np.asarray(charge, dtype=float)
    rd = np.asarray(discharge, dtype=float)
    if polish:
        for i, u in enumerate(spec.users):
            x[i] = project_box_sum(x[i], u.lower, u.upper, u.total)
        if portfolio.alpha_e > 0:
            rc, rd = _close_soc_cycle(rc, rd, spec, portfolio.alpha_e)
        else:
            rc, rd = np.zeros(spec.horizon), np.zeros(spec.horizon)
    Q = spec.inelastic + x.sum(axis=0) + rc - rd
    Q = np.maximum(Q, 0.0)
    soc = soc_trajectory(rc, rd, portfolio.alpha_e, spec.storage)
    r, g = split_supply(Q, renewable_cap(portfolio, scenario))
    return DispatchSolution(
        supply=Q,
        loads=x,
        charge=rc,
        discharge=rd,
        soc=soc,
        prices=price_from_supply(Q, portfolio, scenario, spec.beta_o),
        renewable=r,
        grid=g,
        operator_cost=operator_cost(Q, portfolio, scenario, spec),
        discomfort_cost=float(sum(discomfort_cost(x[i], u) for i, u in enumerate(spec.users))),
        converged=converged,
        iterations=iterations,
    )


def _require_preferred_feasible(spec: MicrogridSpec) -> None:
    for i, u in enumerate(spec.users):
        if not u.preferred_is_feasible():
            raise InfeasibleModelError(f"preferred load of user {i}", "needed when demand response is off")


def solve_central(
    spec: MicrogridSpec,
    portfolio: Portfolio,
    scenario: Scenario,
    cfg: SolverConfig | None = None,
    demand_response: bool = True,
) -> DispatchSolution:
    """Minimize operator cost plus total discomfort for one scenario.

    With ``demand_response=False`` every user consumes its preferred curve and
    only storage is scheduled.
    """
    spec.check_feasible()
    if scenario.horizon != spec.horizon:
        raise ModelError("scenario horizon differs from the model horizon")
    fixed = None
    if not demand_response:
        _require_preferred_feasible(spec)
        fixed = spec.preferred_matrix().sum(axis=0)
    qp = formulation.build(spec, [scenario], [1.0], portfolio, fixed_load=fixed)
    res = solve_qp(*qp.args(), what="period-2 operation")
    blk = qp.blocks[0]
    x = blk.loads(res.z) if demand_response else spec.preferred_matrix()
    rc, rd = blk.storage(res.z)
    return assemble_solution(spec, portfolio, scenario, x, rc, rd, iterations=res.iterations)


def stationarity_residual(sol: DispatchSolution, spec: MicrogridSpec) -> float:
    """Largest fixed-point residual of the users' projected price step, scaled by the step.

    Zero exactly when the announced prices make every user's load optimal.
    """
    gamma = SolverConfig().initial_step(spec)
    worst = 0.0
    for i, u in enumerate(spec.users):
        step = user_best_response(u, sol.prices, sol.loads[i], gamma)
        worst = max(worst, float(np.linalg.norm(sol.loads[i] - step)) / gamma)
    return worst


class Operator:
    """Operator side of the pricing loop.

    Sees only the aggregate elastic load; schedules storage to minimize its
    cost for that load and announces marginal-cost prices.
    """

    def __init__(self, spec: MicrogridSpec, portfolio: Portfolio, scenario: Scenario):
        # users are dropped: the operator never needs their private data
        self._spec = MicrogridSpec((), spec.inelastic, spec.beta_o, spec.storage, spec.days)
        self.portfolio = portfolio
        self.scenario = scenario

    def respond(self, elastic_load: np.ndarray):
        """Storage schedule, aggregate supply and prices for a given elastic load."""
        spec = self._spec
        T = spec.horizon
        if self.portfolio.alpha_e > 0:
            qp = formulation.build(spec, [self.scenario], [1.0], self.portfolio, fixed_load=elastic_load)
            res = solve_qp(*qp.args(), what="storage schedule")
            rc, rd = qp.blocks[0].storage(res.z)
            rc, rd = _close_soc_cycle(rc, rd, spec, self.portfolio.alpha_e)
        else:
            rc, rd = np.zeros(T), np.zeros(T)
        Q = np.maximum(spec.inelastic + elastic_load + rc - rd, 0.0)
        return rc, rd, Q, price_from_supply(Q, self.portfolio, self.scenario, spec.beta_o)


@dataclass
class Trace:
    """Per-iteration record of the pricing loop (broadcast prices and aggregates only)."""

    records: list[dict] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return self.records[-1]["k"] if self.records else 0

    def price_deltas(self) -> np.ndarray:
        return np.array([r["price_delta"] for r in self.records])

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "price_delta", "objective"])
            for r in self.records:
                w.writerow([r["k"], repr(r["price_delta"]), repr(r["objective"])])


def run_decentralized(
    spec: MicrogridSpec,
    portfolio: Portfolio,
    scenario: Scenario,
    cfg: SolverConfig | None = None,
) -> tuple[DispatchSolution, Trace]:
    """Iterate operator prices and user responses until prices settle.

    Stops when both the price vector and the aggregate load move by at most
    ``cfg.tol`` (the load test is relative) between rounds.  On hitting
    ``cfg.max_iter`` the best feasible iterate is returned with
    ``converged=False``.
    """
    cfg = cfg or SolverConfig()
    spec.check_feasible()
    operator = Operator(spec, portfolio, scenario)
    users = spec.users
    x = spec.preferred_matrix().copy()
    feasible = all(u.preferred_is_feasible() for u in users)
    trace = Trace()
    best = None
    p_prev = load_prev = None
    converged = False
    k = 0
    while True:
        load = x.sum(axis=0) if users else np.zeros(spec.horizon)
        rc, rd, Q, p = operator.respond(load)
        obj = operator_cost(Q, portfolio, scenario, spec) + sum(discomfort_cost(x[i], u) for i, u in enumerate(users))
        delta = math.nan if p_prev is None else float(np.linalg.norm(p - p_prev))
        trace.records.append({"k": k, "price_delta": delta, "objective": obj, "prices": p.copy(), "load": load.copy()})
        if feasible and (best is None or obj < best[0]):
            best = (obj, x.copy(), rc, rd, k)
        if p_prev is not None:
            moved = float(np.linalg.norm(load - load_prev))
            if delta <= cfg.tol and moved <= cfg.tol * max(1.0, float(np.linalg.norm(load))):
                converged = True
                break
        if k >= cfg.max_iter:
            break
        gamma = cfg.step(k, spec)
        x = np.vstack([user_best_response(u, p, x[i], gamma) for i, u in enumerate(users)]) if users else x
        feasible = True
        p_prev, load_prev = p, load
        k += 1

    trace.converged = converged
    if converged:
        sol_x, sol_rc, sol_rd = x, rc, rd
    else:
        log.warning("pricing loop stopped at max_iter=%d without convergence", cfg.max_iter)
        _, sol_x, sol_rc, sol_rd, _ = best
    sol = assemble_solution(spec, portfolio, scenario, sol_x, sol_rc, sol_rd, converged=converged, iterations=k)
    return sol, trace
