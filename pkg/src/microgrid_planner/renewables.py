"""Meteorological series ingest and per-unit power profiles."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HOURS_PER_DAY = 24
STC_IRRADIANCE = 1000.0  # W/m^2
KINDS = ("solar", "wind")

# A per-unit profile is a float array of hourly outputs in [0, 1].
RenewableProfile = np.ndarray


class IngestError(ValueError):
    pass


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True)
class MeteoSeries:
    """Hourly measurements for one station: radiation (W/m^2) or wind speed (m/s)."""

    timestamps: np.ndarray
    values: np.ndarray
    kind: str
    station: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise IngestError(f"unknown series kind {self.kind!r}")
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        v = np.asarray(self.values, dtype=float)
        if ts.shape != v.shape or v.ndim != 1:
            raise IngestError("timestamps and values must be equal-length vectors")
        if len(v) == 0 or len(v) % HOURS_PER_DAY:
            raise IngestError(f"series length {len(v)} is not a positive multiple of 24")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise IngestError("values must be finite and non-negative")
        steps = np.diff(ts).astype(np.int64)
        if np.any(steps <= 0):
            raise IngestError("timestamps must be strictly increasing")
        if np.any(steps != 3600):
            k = int(np.flatnonzero(steps != 3600)[0])
            raise IngestError(f"missing or irregular hour after {ts[k]}")
        if (ts[0].astype(np.int64) % 86400) != 0:
            raise IngestError("series must start at midnight")
        ts.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", v)

    @property
    def n_days(self) -> int:
        return len(self.values) // HOURS_PER_DAY

    def day(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n_days:
            raise IndexError(f"day index {index} outside [0, {self.n_days})")
        return self.values[index * HOURS_PER_DAY : (index + 1) * HOURS_PER_DAY]


@dataclass(frozen=True)
class TurbineCurve:
    cut_in: float = 3.0
    rated: float = 12.0
    cut_out: float = 25.0

    def __post_init__(self):
        if not 0 < self.cut_in < self.rated < self.cut_out:
            raise ValueError("turbine curve needs 0 < cut_in < rated < cut_out")

    def __call__(self, speed) -> np.ndarray:
        v = np.asarray(speed, dtype=float)
        ci, vr = self.cut_in, self.rated
        ramp = (v**3 - ci**3) / (vr**3 - ci**3)
        out = np.where(v < vr, ramp, 1.0)
        out = np.where((v < ci) | (v > self.cut_out), 0.0, out)
        return np.clip(out, 0.0, 1.0)


def read_series(path, kind: str, station: str | None = None) -> MeteoSeries:
    """Read a ``timestamp,value`` CSV with ISO-8601 hourly timestamps."""
    path = Path(path)
    stamps, values = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["timestamp", "value"]:
            raise IngestError(f"{path}: header must be 'timestamp,value'")
        for lineno, row in enumerate(reader, start=2):
            try:
                stamps.append(np.datetime64(row["timestamp"].strip(), "s"))
                values.append(float(row["value"]))
            except (ValueError, AttributeError) as exc:
                raise IngestError(f"{path}:{lineno}: {exc}") from None
    return MeteoSeries(np.array(stamps), np.array(values), kind, station or path.stem)


def write_series(series: MeteoSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "value"])
        for t, v in zip(series.timestamps, series.values):
            w.writerow([str(t), repr(float(v))])


def solar_profile(series: MeteoSeries, day: int) -> RenewableProfile:
    if series.kind != "solar":
        raise IngestError(f"expected a solar radiation series, got {series.kind}")
    return np.clip(series.day(day) / STC_IRRADIANCE, 0.0, 1.0)


def wind_profile(series: MeteoSeries, day: int, curve: TurbineCurve | None = None) -> RenewableProfile:
    if series.kind != "wind":
        raise IngestError(f"expected a wind speed series, got {series.kind}")
    return (curve or TurbineCurve())(series.day(day))


def daily_profiles(series: MeteoSeries, curve: TurbineCurve | None = None) -> list[RenewableProfile]:
    if series.kind == "solar":
        return [solar_profile(series, d) for d in range(series.n_days)]
    return [wind_profile(series, d, curve) for d in range(series.n_days)]


def correlation(x, y) -> float:
    """Sample (Pearson) correlation coefficient of two equal-length series."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape or len(x) < 2:
        raise ValueError("series must have equal length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt(np.dot(dx, dx))
    sy = np.sqrt(np.dot(dy, dy))
    if sx == 0 or sy == 0:
        raise DegenerateInputError("zero variance series; correlation undefined")
    return float(np.clip(np.dot(dx, dy) / (sx * sy), -1.0, 1.0))


def write_profiles(profiles: list[RenewableProfile], path) -> None:
    """Profile export: 24 rows per day, columns ``day,hour,value``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "hour", "value"])
        for d, prof in enumerate(profiles):
            for h, v in enumerate(prof):
                w.writerow([d, h, repr(float(v))])


def read_profiles(path) -> list[RenewableProfile]:
    rows: dict[int, dict[int, float]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.setdefault(int(row["day"]), {})[int(row["hour"])] = float(row["value"])
    out = []
    for d in sorted(rows):
        hours = rows[d]
        if sorted(hours) != list(range(HOURS_PER_DAY)):
            raise IngestError(f"day {d} does not have 24 hourly rows")
        out.append(np.array([hours[h] for h in range(HOURS_PER_DAY)]))
    return out
