"""Bundled synthetic meteorological data and a default microgrid.

Nothing here is measured data.  Sixty hourly days are generated from a seeded
generator: one radiation series and two wind stations with opposite diurnal
phase (``coastal`` peaks at night, ``inland`` peaks in the afternoon).
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .core import MicrogridSpec, StorageSpec, UserSpec
from .renewables import MeteoSeries, read_series, write_series

DATA_SEED = 2013
N_DAYS = 60
START = np.datetime64("2013-01-01T00:00:00")
STATIONS = {"solar": "solar.csv", "coastal": "wind_coastal.csv", "inland": "wind_inland.csv"}
DEFAULT_WIND_STATION = "coastal"


def _timestamps(n_days: int) -> np.ndarray:
    return START + np.arange(24 * n_days).astype("timedelta64[h]")


def synthetic_series(seed: int = DATA_SEED, n_days: int = N_DAYS) -> dict[str, MeteoSeries]:
    """Generate the three hourly series; deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    hours = np.arange(24)
    ts = _timestamps(n_days)

    bell = np.clip(np.sin(np.pi * (hours - 6) / 12), 0.0, None)
    clear = rng.uniform(0.35, 1.0, n_days)
    rad = 950.0 * bell[None, :] * clear[:, None] * rng.uniform(0.85, 1.05, (n_days, 24))
    out = {"solar": MeteoSeries(ts, np.round(rad.ravel(), 2), "solar", "solar")}

    # phase is the hour of peak mean speed
    for station, phase, base in (("coastal", 2.0, 7.5), ("inland", 14.0, 6.5)):
        daily = rng.gamma(6.0, 1.0 / 6.0, n_days)
        shape = 1.0 + 0.45 * np.cos(2 * np.pi * (hours - phase) / 24)
        speed = base * daily[:, None] * shape[None, :] + rng.normal(0.0, 0.8, (n_days, 24))
        out[station] = MeteoSeries(ts, np.round(np.clip(speed, 0.0, None).ravel(), 2), "wind", station)
    return out


def data_path(name: str) -> Path:
    """Path of a bundled CSV; ``name`` is one of ``STATIONS``."""
    if name not in STATIONS:
        raise KeyError(f"unknown station {name!r}; choose from {sorted(STATIONS)}")
    return Path(str(resources.files("microgrid_planner") / "data" / STATIONS[name]))


def load_bundled(name: str) -> MeteoSeries:
    kind = "solar" if name == "solar" else "wind"
    return read_series(data_path(name), kind, station=name)


def write_bundled(directory, seed: int = DATA_SEED, n_days: int = N_DAYS) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, series in synthetic_series(seed, n_days).items():
        write_series(series, directory / STATIONS[name])


# Synthetic household curve (kW): morning and evening peaks.
_PREFERRED_SHAPE = np.array(
    [0.6, 0.5, 0.5, 0.5, 0.5, 0.6, 0.9, 1.3, 1.2, 1.0, 0.9, 0.9,
     1.0, 0.9, 0.9, 1.0, 1.2, 1.5, 1.8, 1.9, 1.7, 1.4, 1.0, 0.8]
)
_INELASTIC_SHAPE = np.array(
    [0.7, 0.65, 0.6, 0.6, 0.6, 0.65, 0.75, 0.9, 1.0, 1.05, 1.1, 1.15,
     1.15, 1.15, 1.1, 1.1, 1.1, 1.15, 1.2, 1.2, 1.1, 1.0, 0.9, 0.8]
)


def default_spec(
    n_users: int = 5,
    elastic_peak: float = 40.0,
    inelastic_peak: float = 120.0,
    beta_o: float = 0.005,
    beta_user: float = 0.5,
    flexibility: float = 0.5,
    storage: StorageSpec | None = None,
    days: int = 3650,
) -> MicrogridSpec:
    """Default day-ahead model built on the synthetic load curves.

    User ``i`` prefers a scaled household curve shifted by ``i`` hours and may
    move each hour by ``flexibility`` of its preferred value.
    """
    users = []
    for i in range(n_users):
        y = elastic_peak / _PREFERRED_SHAPE.max() * np.roll(_PREFERRED_SHAPE, i)
        users.append(UserSpec((1 - flexibility) * y, (1 + flexibility) * y, float(y.sum()), y, beta_user))
    b = inelastic_peak / _INELASTIC_SHAPE.max() * _INELASTIC_SHAPE
    return MicrogridSpec(tuple(users), b, beta_o, storage or StorageSpec(), days)
