"""Command-line driver.

Exit codes: 0 success, 1 bad input, 2 infeasible model, 3 non-convergence.
Log verbosity comes from ``MICROGRID_LOG_LEVEL`` (default WARNING).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import datasets
from .core import InfeasibleModelError, ModelError, NonConvergenceError, Portfolio
from .dispatch import run_decentralized, solve_central
from .pipeline import RunConfig, StageError, write_csv, run_config_from_dict, run_pipeline
from .portfolio import budget_sweep, solve_ep1
from .renewables import IngestError, TurbineCurve, daily_profiles, read_profiles, read_series, write_profiles
from .robust import UncertaintySet, error_sweep, solve_rp1
from .scenarios import build_scenarios, reduce_with_distance
from .serialize import (
    SchemaError,
    load_model_config,
    model_config_to_dict,
    read_json,
    read_scenarios,
    write_json,
    write_scenarios,
)

log = logging.getLogger("microgrid_planner")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_NONCONVERGED = 0, 1, 2, 3


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_ingest(a) -> int:
    series = read_series(a.input, a.type)
    curve = TurbineCurve(a.cut_in, a.rated, a.cut_out)
    profiles = daily_profiles(series, curve)
    write_profiles(profiles, a.out)
    print(f"{len(profiles)} days of {a.type} profiles -> {a.out}")
    return EXIT_OK


def cmd_scenarios_build(a) -> int:
    sset = build_scenarios(read_profiles(a.solar), read_profiles(a.wind))
    write_scenarios(sset, a.out)
    print(f"{len(sset)} scenarios -> {a.out}")
    return EXIT_OK


def cmd_scenarios_reduce(a) -> int:
    sset = read_scenarios(a.input)
    reduced, dk = reduce_with_distance(sset, a.keep)
    write_scenarios(reduced, a.out)
    print(f"kept {len(reduced)} of {len(sset)} scenarios (distance {dk:.6g}) -> {a.out}")
    return EXIT_OK


def cmd_default_config(a) -> int:
    write_json(model_config_to_dict(datasets.default_spec(), Portfolio()), a.out)
    print(f"default model config -> {a.out}")
    return EXIT_OK


def cmd_dispatch(a) -> int:
    spec, portfolio, solver = load_model_config(a.spec)
    sset = read_scenarios(a.scenario)
    if not 0 <= a.index < len(sset):
        raise ModelError(f"scenario index {a.index} out of range (set has {len(sset)})")
    scen = sset[a.index]
    trace = None
    if a.mode == "central":
        sol = solve_central(spec, portfolio, scen, solver)
    else:
        sol, trace = run_decentralized(spec, portfolio, scen, solver)
    write_json({"mode": a.mode, "scenario_index": a.index, "solution": sol.to_dict()}, a.out)
    if trace is not None and a.trace:
        trace.write_csv(a.trace)
    print(f"objective {sol.objective:.10g} -> {a.out}")
    if not sol.converged:
        log.error("pricing loop did not converge within %d iterations", solver.max_iter)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _sweep_rows(budgets, sols):
    return [[float(B), s.portfolio.alpha_s, s.portfolio.alpha_w, s.portfolio.alpha_e, s.overall_cost]
            for B, s in zip(budgets, sols)]


def cmd_invest(a) -> int:
    spec, template, solver = load_model_config(a.spec)
    sset = read_scenarios(a.scenarios)
    budget = template.budget if a.budget is None else a.budget
    dr = not a.no_demand_response
    sol = solve_ep1(spec, sset, template.c_s, template.c_w, template.c_e, budget, a.days, solver, dr)
    write_json(sol.to_dict(), a.out)
    print(f"alpha = ({sol.portfolio.alpha_s:.6g}, {sol.portfolio.alpha_w:.6g}, {sol.portfolio.alpha_e:.6g}), "
          f"overall cost {sol.overall_cost:.10g} -> {a.out}")
    if a.sweep:
        budgets = _floats(a.sweep_budgets) if a.sweep_budgets else [
            f * sol.capital_cost for f in (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0)]
        sols = budget_sweep(spec, sset, budgets, template.c_s, template.c_w, template.c_e, a.days, dr)
        write_csv(Path(a.sweep), ["B", "alpha_s", "alpha_w", "alpha_e", "overall_cost"], _sweep_rows(budgets, sols))
    return EXIT_OK


def cmd_robust_invest(a) -> int:
    spec, template, solver = load_model_config(a.spec)
    sset = read_scenarios(a.scenarios)
    budget = template.budget if a.budget is None else a.budget
    costs = (template.c_s, template.c_w, template.c_e)
    sol = solve_rp1(spec, sset, UncertaintySet.from_relative(sset, a.error_pct), *costs, budget, a.days, solver)
    write_json({"error_pct": a.error_pct, **sol.to_dict()}, a.out)
    print(f"investment expense {sol.capital_cost:.10g} at {a.error_pct:g}% error -> {a.out}")
    if a.sweep:
        pcts = _floats(a.sweep_pcts)
        rows = [[pct, s.capital_cost, s.overall_cost]
                for pct, s in error_sweep(spec, sset, pcts, *costs, budget, a.days)]
        write_csv(Path(a.sweep), ["pct", "investment_expense", "overall_cost"], rows)
    return EXIT_OK


def cmd_report(a) -> int:
    if a.config:
        cfg = run_config_from_dict(read_json(a.config, "run config"), a.out)
    else:
        cfg = RunConfig(out_dir=Path(a.out))
    if a.solar:
        cfg.solar_csv = Path(a.solar)
    if a.wind:
        cfg.wind_csv = Path(a.wind)
    if a.station:
        cfg.wind_station = a.station
    if a.keep is not None:
        cfg.keep = a.keep
    if a.budget is not None:
        cfg.budget = a.budget
    if a.seed is not None:
        cfg.seed = a.seed
    if a.no_decentralized:
        cfg.decentralized = False
    summary = run_pipeline(cfg)
    print(f"overall cost {summary['overall_cost']:.10g} "
          f"(without demand response {summary['overall_cost_no_demand_response']:.10g}) -> {cfg.out_dir}")
    return EXIT_OK if not summary["violations"] else EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="microgrid-planner", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="convert a station CSV into per-unit daily profiles")
    s.add_argument("input")
    s.add_argument("--type", choices=("solar", "wind"), required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--cut-in", type=float, default=3.0)
    s.add_argument("--rated", type=float, default=12.0)
    s.add_argument("--cut-out", type=float, default=25.0)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("scenarios", help="build or reduce scenario sets")
    ss = s.add_subparsers(dest="action", required=True)
    b = ss.add_parser("build")
    b.add_argument("--solar", required=True, help="solar profile CSV")
    b.add_argument("--wind", required=True, help="wind profile CSV")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_scenarios_build)
    r = ss.add_parser("reduce")
    r.add_argument("input")
    r.add_argument("--keep", type=int, default=10)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_scenarios_reduce)

    s = sub.add_parser("default-config", help="write the default model config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_default_config)

    s = sub.add_parser("dispatch", help="day-ahead schedule and prices for one scenario")
    s.add_argument("--scenario", required=True)
    s.add_argument("--index", type=int, default=0)
    s.add_argument("--spec", required=True)
    s.add_argument("--mode", choices=("central", "decentralized"), default="central")
    s.add_argument("--out", required=True)
    s.add_argument("--trace", help="iteration trace CSV (decentralized mode)")
    s.set_defaults(func=cmd_dispatch)

    for name, fn in (("invest", cmd_invest), ("robust-invest", cmd_robust_invest)):
        s = sub.add_parser(name)
        s.add_argument("--spec", required=True)
        s.add_argument("--scenarios", required=True)
        s.add_argument("--budget", type=float)
        s.add_argument("--days", type=int)
        s.add_argument("--out", required=True)
        s.add_argument("--sweep", help="sweep CSV path")
        s.set_defaults(func=fn)
        if name == "invest":
            s.add_argument("--no-demand-response", action="store_true")
            s.add_argument("--sweep-budgets", help="comma-separated budgets")
        else:
            s.add_argument("--error-pct", type=float, default=10.0)
            s.add_argument("--sweep-pcts", default="0,5,10,15,20")

    s = sub.add_parser("report", help="run the whole pipeline into a directory")
    s.add_argument("--out", required=True)
    s.add_argument("--config", help="run config JSON")
    s.add_argument("--solar")
    s.add_argument("--wind")
    s.add_argument("--station", choices=("coastal", "inland"))
    s.add_argument("--keep", type=int)
    s.add_argument("--budget", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--no-decentralized", action="store_true")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("MICROGRID_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        log.error("%s", exc)
        return _code(exc.cause)
    except (InfeasibleModelError, NonConvergenceError, ModelError, SchemaError, IngestError,
            OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return _code(exc)


def _code(exc: BaseException) -> int:
    if isinstance(exc, InfeasibleModelError):
        return EXIT_INFEASIBLE
    if isinstance(exc, NonConvergenceError):
        return EXIT_NONCONVERGED
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
