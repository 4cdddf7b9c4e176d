"""Seeded random model instances for tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .core import MicrogridSpec, Portfolio, StorageSpec, UserSpec
from .dispatch import project_box_sum
from .scenarios import Scenario

DEFAULT_SEED = 20130901


def make_rng(seed: int | None = None) -> np.random.Generator:
    return np.random.default_rng(DEFAULT_SEED if seed is None else seed)


def random_user(rng: np.random.Generator, horizon: int, beta=(0.2, 1.0)) -> UserSpec:
    lo = rng.uniform(0.0, 0.5, horizon)
    hi = lo + rng.uniform(0.5, 2.0, horizon)
    total = lo.sum() + rng.uniform(0.2, 0.8) * (hi.sum() - lo.sum())
    y = project_box_sum(rng.uniform(lo, hi), lo, hi, total)
    return UserSpec(lo, hi, total, y, float(rng.uniform(*beta)))


def random_storage(rng: np.random.Generator) -> StorageSpec:
    soc_min = rng.uniform(0.0, 0.3)
    soc_max = rng.uniform(0.8, 1.0)
    return StorageSpec(
        charge_rate=rng.uniform(0.2, 0.5),
        discharge_rate=rng.uniform(0.2, 0.5),
        eta_c=rng.uniform(0.85, 1.0),
        eta_d=rng.uniform(0.85, 1.0),
        soc_min=soc_min,
        soc_max=soc_max,
        soc0=rng.uniform(soc_min, soc_max),
    )


def random_scenario(rng: np.random.Generator, horizon: int, pi: float = 1.0) -> Scenario:
    hours = np.arange(horizon) * 24.0 / horizon
    bell = np.clip(np.sin(np.pi * (hours - 6.0) / 12.0), 0.0, None)
    solar = np.clip(bell * rng.uniform(0.3, 1.0) + rng.normal(0.0, 0.05, horizon) * bell, 0.0, 1.0)
    wind = np.clip(rng.uniform(0.0, 1.0, horizon), 0.0, 1.0)
    return Scenario(solar, wind, pi)


def random_instance(
    rng: np.random.Generator,
    n_users: int = 3,
    horizon: int = 24,
    storage: bool = True,
    beta_o=(0.02, 0.2),
) -> tuple[MicrogridSpec, Portfolio, Scenario]:
    users = tuple(random_user(rng, horizon) for _ in range(n_users))
    b = rng.uniform(1.0, 3.0, horizon)
    spec = MicrogridSpec(users, b, float(rng.uniform(*beta_o)), random_storage(rng))
    mean_load = b.mean() + sum(u.total for u in users) / horizon
    portfolio = Portfolio(
        alpha_s=float(rng.uniform(0.0, 1.5) * mean_load),
        alpha_w=float(rng.uniform(0.0, 1.5) * mean_load),
        alpha_e=float(rng.uniform(0.5, 3.0) * mean_load) if storage else 0.0,
    )
    return spec, portfolio, random_scenario(rng, horizon)


def random_investment_instance(
    rng: np.random.Generator, n_users: int = 2, horizon: int = 4, days: int = 6
) -> tuple[MicrogridSpec, list[Scenario]]:
    """Small two-scenario investment problem with a midday solar peak."""
    users = tuple(random_user(rng, horizon) for _ in range(n_users))
    b = rng.uniform(1.0, 2.0, horizon)
    spec = MicrogridSpec(users, b, float(rng.uniform(0.1, 0.3)), random_storage(rng), days=days)
    hours = np.arange(horizon) * 24.0 / horizon
    bell = np.clip(np.sin(np.pi * (hours - 3.0) / 18.0), 0.0, None)
    scenarios = []
    for pi in (0.4, 0.6):
        solar = np.clip(bell * rng.uniform(0.5, 1.0, horizon), 0.0, 1.0)
        wind = rng.uniform(0.1, 0.9, horizon)
        scenarios.append(Scenario(solar, wind, pi))
    return spec, scenarios
