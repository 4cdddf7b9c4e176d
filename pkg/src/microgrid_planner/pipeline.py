"""End-to-end run: ingest, scenarios, investment, dispatch, sweeps.

Each stage writes its outputs as soon as they exist, so a failure part way
leaves everything produced so far on disk next to a ``status.json`` naming
the stage that failed.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import datasets
from .core import (
    COST_SOLAR,
    COST_STORAGE,
    COST_WIND,
    MicrogridSpec,
    Portfolio,
    renewable_cap,
    validate_dispatch,
    validate_portfolio,
)
from .dispatch import SolverConfig, run_decentralized
from .portfolio import InvestmentSolution, budget_sweep, solve_ep1
from .renewables import TurbineCurve, correlation, daily_profiles, read_series
from .robust import error_sweep
from .scenarios import ScenarioSet, build_scenarios, reduce_with_distance
from .serialize import (
    model_config_to_dict,
    portfolio_from_dict,
    portfolio_to_dict,
    solver_from_dict,
    spec_from_dict,
    write_json,
    write_scenarios,
)

log = logging.getLogger(__name__)

DEFAULT_BUDGET_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
DEFAULT_ERROR_PCTS = (0.0, 5.0, 10.0, 15.0, 20.0)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")


@dataclass
class RunConfig:
    """Inputs of one pipeline run.

    ``solar_csv``/``wind_csv`` default to the bundled synthetic stations.  A
    ``seed`` other than the bundled one regenerates the synthetic series.
    ``budgets`` defaults to fractions of the unconstrained optimal spend.
    """

    out_dir: Path
    solar_csv: Path | None = None
    wind_csv: Path | None = None
    wind_station: str = datasets.DEFAULT_WIND_STATION
    seed: int = datasets.DATA_SEED
    keep: int = 10
    spec: MicrogridSpec = field(default_factory=datasets.default_spec)
    c_s: float = COST_SOLAR
    c_w: float = COST_WIND
    c_e: float = COST_STORAGE
    budget: float = math.inf
    solver: SolverConfig = field(default_factory=SolverConfig)
    turbine: TurbineCurve = field(default_factory=TurbineCurve)
    budgets: Sequence[float] | None = None
    error_pcts: Sequence[float] = DEFAULT_ERROR_PCTS
    decentralized: bool = True

    def validate(self) -> None:
        self.out_dir = Path(self.out_dir)
        for p in (self.solar_csv, self.wind_csv):
            if p is not None and not Path(p).is_file():
                raise FileNotFoundError(f"input file {p} does not exist")
        if self.keep < 1:
            raise ValueError("keep must be >= 1")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.spec.horizon != 24:
            raise ValueError("the pipeline works on 24-hour days")
        self.spec.check_feasible()

    def to_dict(self) -> dict:
        return {
            "solar_csv": None if self.solar_csv is None else str(self.solar_csv),
            "wind_csv": None if self.wind_csv is None else str(self.wind_csv),
            "wind_station": self.wind_station,
            "seed": self.seed,
            "keep": self.keep,
            "model": model_config_to_dict(self.spec, _template(self), self.solver),
            "turbine": {"cut_in": self.turbine.cut_in, "rated": self.turbine.rated, "cut_out": self.turbine.cut_out},
            "budgets": None if self.budgets is None else list(map(float, self.budgets)),
            "error_pcts": list(map(float, self.error_pcts)),
            "decentralized": self.decentralized,
        }


def _template(cfg: RunConfig) -> Portfolio:
    return Portfolio(0.0, 0.0, 0.0, cfg.c_s, cfg.c_w, cfg.c_e, cfg.budget)


def write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _investment_dict(sol: InvestmentSolution, scenarios: ScenarioSet, spec: MicrogridSpec) -> dict:
    d = sol.to_dict()
    d["violations"] = _violations(sol, scenarios, spec)
    return d


def _violations(sol: InvestmentSolution, scenarios: ScenarioSet, spec: MicrogridSpec) -> list[str]:
    bad = validate_portfolio(sol.portfolio)
    for w, (s, d) in enumerate(zip(scenarios, sol.dispatch)):
        bad += [f"scenario {w}: {v}" for v in validate_dispatch(d, spec, sol.portfolio, s)]
    return bad


class _Stages:
    def __init__(self, out: Path):
        self.out = out
        self.done: list[str] = []

    def run(self, name, fn, *args, **kw):
        log.info("stage %s", name)
        try:
            result = fn(*args, **kw)
        except Exception as exc:
            write_json({"completed": self.done, "failed": name, "error": f"{type(exc).__name__}: {exc}"},
                       self.out / "status.json")
            raise StageError(name, exc) from exc
        self.done.append(name)
        return result


def run_pipeline(cfg: RunConfig) -> dict:
    """Run every stage and return the summary (also written to ``summary.json``)."""
    cfg.validate()
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    st = _Stages(out)
    write_json(cfg.to_dict(), out / "run_config.json")
    spec = cfg.spec

    def ingest():
        if cfg.solar_csv is None or cfg.wind_csv is None:
            if cfg.seed == datasets.DATA_SEED:
                bundled = {n: datasets.load_bundled(n) for n in ("solar", cfg.wind_station)}
            else:
                bundled = datasets.synthetic_series(cfg.seed)
        solar = read_series(cfg.solar_csv, "solar") if cfg.solar_csv else bundled["solar"]
        wind = read_series(cfg.wind_csv, "wind") if cfg.wind_csv else bundled[cfg.wind_station]
        sp, wp = daily_profiles(solar), daily_profiles(wind, cfg.turbine)
        return sp, wp, correlation(np.concatenate(sp), np.concatenate(wp))

    solar_days, wind_days, rho = st.run("ingest", ingest)

    def scenarios():
        full = build_scenarios(solar_days, wind_days)
        reduced, dk = reduce_with_distance(full, min(cfg.keep, len(full)))
        write_scenarios(full, out / "scenarios_full.json")
        write_scenarios(reduced, out / "scenarios.json")
        return full, reduced, dk

    full, scen, dk = st.run("scenarios", scenarios)

    def invest():
        with_dr = solve_ep1(spec, scen, cfg.c_s, cfg.c_w, cfg.c_e, cfg.budget, cfg=cfg.solver)
        write_json(_investment_dict(with_dr, scen, spec), out / "investment.json")
        no_dr = solve_ep1(spec, scen, cfg.c_s, cfg.c_w, cfg.c_e, cfg.budget, cfg=cfg.solver, demand_response=False)
        write_json(_investment_dict(no_dr, scen, spec), out / "investment_no_dr.json")
        return with_dr, no_dr

    best, base = st.run("invest", invest)

    def dispatch():
        rows, gaps = [], []
        for w, (s, d) in enumerate(zip(scen, best.dispatch)):
            r_max = renewable_cap(best.portfolio, s)
            for t in range(spec.horizon):
                rows.append([w, t, float(d.prices[t]), float(d.supply[t]), float(r_max[t]),
                             float(d.grid[t]), float(d.soc[t])])
            if cfg.decentralized:
                dec, _ = run_decentralized(spec, best.portfolio, s, cfg.solver)
                gaps.append(abs(dec.objective - d.objective) / max(abs(d.objective), 1e-12))
        write_csv(out / "prices.csv", ["scenario", "hour", "price", "supply", "renewable_cap", "grid", "soc"], rows)
        return max(gaps) if gaps else None

    decentral_gap = st.run("dispatch", dispatch)

    def sweep_budgets():
        spend = best.capital_cost
        budgets = cfg.budgets if cfg.budgets is not None else [f * spend for f in DEFAULT_BUDGET_FRACTIONS]
        sols = budget_sweep(spec, scen, budgets, cfg.c_s, cfg.c_w, cfg.c_e)
        rows = [[float(B), s.portfolio.alpha_s, s.portfolio.alpha_w, s.portfolio.alpha_e, s.overall_cost]
                for B, s in zip(budgets, sols)]
        write_csv(out / "budget_sweep.csv", ["B", "alpha_s", "alpha_w", "alpha_e", "overall_cost"], rows)
        return rows

    budget_rows = st.run("budget-sweep", sweep_budgets)

    def sweep_errors():
        res = error_sweep(spec, scen, cfg.error_pcts, cfg.c_s, cfg.c_w, cfg.c_e, cfg.budget)
        rows = [[pct, s.capital_cost, s.overall_cost] for pct, s in res]
        write_csv(out / "error_sweep.csv", ["pct", "investment_expense", "overall_cost"], rows)
        return rows

    error_rows = st.run("error-sweep", sweep_errors)

    summary = {
        "stages": st.done,
        "correlation": rho,
        "n_days": len(full),
        "n_scenarios": len(scen),
        "reduction_distance": dk,
        "portfolio": portfolio_to_dict(best.portfolio),
        "capital_cost": best.capital_cost,
        "expected_operating_cost": best.expected_operating_cost,
        "overall_cost": best.overall_cost,
        "overall_cost_no_demand_response": base.overall_cost,
        "demand_response_saving": base.overall_cost - best.overall_cost,
        "decentralized_max_relative_gap": decentral_gap,
        "violations": _violations(best, scen, spec) + _violations(base, scen, spec),
        "budget_sweep": [dict(zip(["B", "alpha_s", "alpha_w", "alpha_e", "overall_cost"], r)) for r in budget_rows],
        "error_sweep": [dict(zip(["pct", "investment_expense", "overall_cost"], r)) for r in error_rows],
    }
    write_json(summary, out / "summary.json")
    write_json({"completed": st.done, "failed": None, "error": None}, out / "status.json")
    return summary


def run_config_from_dict(d: dict, out_dir) -> RunConfig:
    """Inverse of ``RunConfig.to_dict``; missing keys take their defaults."""
    model = d.get("model", {})
    port = portfolio_from_dict(model.get("portfolio"))
    kw = {}
    for key in ("wind_station", "seed", "keep", "error_pcts", "budgets", "decentralized"):
        if d.get(key) is not None:
            kw[key] = d[key]
    for key in ("solar_csv", "wind_csv"):
        if d.get(key):
            kw[key] = Path(d[key])
    if "microgrid" in model:
        kw["spec"] = spec_from_dict(model["microgrid"])
    if "solver" in model:
        kw["solver"] = solver_from_dict(model["solver"])
    if "turbine" in d:
        kw["turbine"] = TurbineCurve(**d["turbine"])
    return RunConfig(out_dir=Path(out_dir), c_s=port.c_s, c_w=port.c_w, c_e=port.c_e, budget=port.budget, **kw)
