"""JSON config and report (de)serialization.

Every document written here carries ``schema_version``; loaders refuse any
other version.  Output is deterministic: sorted keys, shortest round-trip
float formatting, ``null`` for an infinite budget.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .core import (
    BETA_OPERATOR,
    BETA_USER,
    COST_SOLAR,
    COST_STORAGE,
    COST_WIND,
    HORIZON_DAYS,
    MicrogridSpec,
    ModelError,
    Portfolio,
    StorageSpec,
    UserSpec,
)
from .dispatch import SolverConfig
from .scenarios import ScenarioSet

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    pass


def check_version(data: dict, what: str = "document") -> dict:
    if not isinstance(data, dict):
        raise SchemaError(f"{what}: expected a JSON object")
    v = data.get("schema_version")
    if v != SCHEMA_VERSION:
        raise SchemaError(f"{what}: unsupported schema_version {v!r} (expected {SCHEMA_VERSION})")
    return data


def dumps(data: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **data}, sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_json(data: dict, path) -> None:
    Path(path).write_text(dumps(data), encoding="utf-8")


def read_json(path, what: str | None = None) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return check_version(data, what or str(path))


def _budget_out(b: float):
    return None if math.isinf(b) else b


def _budget_in(b) -> float:
    return math.inf if b is None else float(b)


def storage_to_dict(st: StorageSpec) -> dict:
    return {
        "charge_rate": st.charge_rate,
        "discharge_rate": st.discharge_rate,
        "eta_c": st.eta_c,
        "eta_d": st.eta_d,
        "soc_min": st.soc_min,
        "soc_max": st.soc_max,
        "soc0": st.soc0,
    }


def storage_from_dict(d: dict | None) -> StorageSpec:
    d = dict(d or {})
    if "dod_max" in d:
        if "soc_min" in d:
            raise ModelError("give either dod_max or soc_min, not both")
        d["soc_min"] = 1.0 - d.pop("dod_max")
    return StorageSpec(**d)


def spec_to_dict(spec: MicrogridSpec) -> dict:
    return {
        "beta_o": spec.beta_o,
        "days": spec.days,
        "inelastic": spec.inelastic.tolist(),
        "storage": storage_to_dict(spec.storage),
        "users": [
            {
                "lower": u.lower.tolist(),
                "upper": u.upper.tolist(),
                "total": u.total,
                "preferred": u.preferred.tolist(),
                "beta": u.beta,
            }
            for u in spec.users
        ],
    }


def spec_from_dict(d: dict) -> MicrogridSpec:
    users = tuple(
        UserSpec(u["lower"], u["upper"], float(u["total"]), u["preferred"], float(u.get("beta", BETA_USER)))
        for u in d.get("users", [])
    )
    return MicrogridSpec(
        users,
        np.asarray(d["inelastic"], dtype=float),
        float(d.get("beta_o", BETA_OPERATOR)),
        storage_from_dict(d.get("storage")),
        int(d.get("days", HORIZON_DAYS)),
    )


def portfolio_to_dict(p: Portfolio) -> dict:
    return {
        "alpha_s": p.alpha_s,
        "alpha_w": p.alpha_w,
        "alpha_e": p.alpha_e,
        "c_s": p.c_s,
        "c_w": p.c_w,
        "c_e": p.c_e,
        "budget": _budget_out(p.budget),
    }


def portfolio_from_dict(d: dict | None) -> Portfolio:
    d = dict(d or {})
    return Portfolio(
        float(d.get("alpha_s", 0.0)),
        float(d.get("alpha_w", 0.0)),
        float(d.get("alpha_e", 0.0)),
        float(d.get("c_s", COST_SOLAR)),
        float(d.get("c_w", COST_WIND)),
        float(d.get("c_e", COST_STORAGE)),
        _budget_in(d.get("budget")),
    )


def solver_to_dict(cfg: SolverConfig) -> dict:
    return {"step0": cfg.step0, "tol": cfg.tol, "max_iter": cfg.max_iter, "decay": cfg.decay}


def solver_from_dict(d: dict | None) -> SolverConfig:
    return SolverConfig(**(d or {}))


def model_config_to_dict(spec: MicrogridSpec, portfolio: Portfolio, solver: SolverConfig | None = None) -> dict:
    """The ``--spec`` document: microgrid, portfolio (capacities and costs), solver."""
    return {
        "microgrid": spec_to_dict(spec),
        "portfolio": portfolio_to_dict(portfolio),
        "solver": solver_to_dict(solver or SolverConfig()),
    }


def load_model_config(path) -> tuple[MicrogridSpec, Portfolio, SolverConfig]:
    d = read_json(path, "model config")
    if "microgrid" not in d:
        raise SchemaError(f"{path}: missing 'microgrid' section")
    return spec_from_dict(d["microgrid"]), portfolio_from_dict(d.get("portfolio")), solver_from_dict(d.get("solver"))


def write_scenarios(scenarios: ScenarioSet, path) -> None:
    write_json(scenarios.to_dict(), path)


def read_scenarios(path) -> ScenarioSet:
    return ScenarioSet.from_dict(read_json(path, "scenario set"))
