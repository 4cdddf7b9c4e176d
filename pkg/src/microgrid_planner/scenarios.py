"""Daily solar/wind scenarios and forward scenario reduction."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

PROB_TOL = 1e-9


@dataclass(frozen=True)
class Scenario:
    """Joint per-unit solar and wind output for one day, with its probability."""

    solar: np.ndarray
    wind: np.ndarray
    pi: float = 1.0

    def __post_init__(self):
        s = np.array(self.solar, dtype=float)
        w = np.array(self.wind, dtype=float)
        if s.ndim != 1 or s.shape != w.shape or len(s) == 0:
            raise ValueError("solar and wind profiles must be equal-length vectors")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(w))):
            raise ValueError("profiles must be finite")
        if not self.pi >= 0:
            raise ValueError("scenario probability must be non-negative")
        s.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "solar", s)
        object.__setattr__(self, "wind", w)
        object.__setattr__(self, "pi", float(self.pi))

    @property
    def horizon(self) -> int:
        return len(self.solar)

    def vector(self) -> np.ndarray:
        return np.concatenate([self.solar, self.wind])

    def with_pi(self, pi: float) -> "Scenario":
        return Scenario(self.solar, self.wind, pi)


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[Scenario, ...]

    def __post_init__(self):
        sc = tuple(self.scenarios)
        if not sc:
            raise ValueError("scenario set is empty")
        if len({s.horizon for s in sc}) != 1:
            raise ValueError("scenarios have different horizons")
        total = sum(s.pi for s in sc)
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"scenario probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "scenarios", sc)

    def __len__(self) -> int:
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    def __getitem__(self, i) -> Scenario:
        return self.scenarios[i]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([s.pi for s in self.scenarios])

    @property
    def horizon(self) -> int:
        return self.scenarios[0].horizon

    def matrix(self) -> np.ndarray:
        return np.vstack([s.vector() for s in self.scenarios])

    def to_dict(self) -> dict:
        return {
            "scenarios": [
                {"pi": s.pi, "solar": s.solar.tolist(), "wind": s.wind.tolist()} for s in self.scenarios
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSet":
        return cls(tuple(Scenario(d["solar"], d["wind"], d["pi"]) for d in data["scenarios"]))


def build_scenarios(solar_days: Sequence[np.ndarray], wind_days: Sequence[np.ndarray]) -> ScenarioSet:
    """One equiprobable scenario per aligned day."""
    if len(solar_days) != len(wind_days):
        raise ValueError(f"{len(solar_days)} solar days vs {len(wind_days)} wind days")
    if not solar_days:
        raise ValueError("no days supplied")
    n = len(solar_days)
    return ScenarioSet(tuple(Scenario(s, w, 1.0 / n) for s, w in zip(solar_days, wind_days)))


def distance(a: Scenario, b: Scenario, weights=None) -> float:
    """Euclidean distance between the concatenated solar||wind day vectors.

    ``weights`` optionally scales each of the 2T squared components.
    """
    d = a.vector() - b.vector()
    if weights is None:
        return float(np.sqrt(np.dot(d, d)))
    return float(np.sqrt(np.dot(np.asarray(weights, dtype=float) * d, d)))


def distance_matrix(scenarios: ScenarioSet, weights=None) -> np.ndarray:
    X = scenarios.matrix()
    if weights is not None:
        X = X * np.sqrt(np.asarray(weights, dtype=float))
    sq = np.sum(X * X, axis=1)
    D2 = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
    D = np.sqrt(np.maximum(D2, 0.0))
    # exact zeros on the diagonal and for duplicate rows
    same = np.all(X[:, None, :] == X[None, :, :], axis=2)
    D[same] = 0.0
    return (D + D.T) / 2.0


def kantorovich_distance(pi: np.ndarray, dist: np.ndarray, kept: Sequence[int]) -> float:
    """Transport cost of moving every dropped scenario onto its nearest kept one."""
    kept = list(kept)
    m = dist[:, kept].min(axis=1)
    m[kept] = 0.0
    return float(np.dot(pi, m))


def forward_selection(pi: np.ndarray, dist: np.ndarray, keep: int) -> tuple[list[int], float]:
    """Greedy forward selection; ties go to the lowest scenario index."""
    n = len(pi)
    if not 1 <= keep <= n:
        raise ValueError(f"keep={keep} outside [1, {n}]")
    nearest = np.full(n, np.inf)
    chosen: list[int] = []
    free = np.ones(n, dtype=bool)
    for _ in range(keep):
        cand = np.minimum(nearest[:, None], dist)
        score = pi @ cand
        score[~free] = np.inf
        u = int(np.argmin(score))
        chosen.append(u)
        free[u] = False
        nearest = cand[:, u]
    return chosen, kantorovich_distance(pi, dist, chosen)


def redistribute(pi: np.ndarray, dist: np.ndarray, kept: Sequence[int]) -> np.ndarray:
    """Probabilities of the kept scenarios after absorbing their dropped neighbours."""
    kept = sorted(kept)
    new = np.zeros(len(kept))
    sub = dist[:, kept]
    for j in range(len(pi)):
        if j in kept:
            new[kept.index(j)] += pi[j]
        else:
            new[int(np.argmin(sub[j]))] += pi[j]
    return new


def reduce(scenarios: ScenarioSet, keep: int = 10, weights=None) -> ScenarioSet:
    """Reduce to ``keep`` scenarios by forward selection under the Kantorovich distance."""
    reduced, _ = reduce_with_distance(scenarios, keep, weights)
    return reduced


def reduce_with_distance(scenarios: ScenarioSet, keep: int = 10, weights=None) -> tuple[ScenarioSet, float]:
    pi = scenarios.probabilities
    dist = distance_matrix(scenarios, weights)
    chosen, dk = forward_selection(pi, dist, keep)
    kept = sorted(chosen)
    probs = redistribute(pi, dist, kept)
    probs = probs / probs.sum()
    return ScenarioSet(tuple(scenarios[k].with_pi(p) for k, p in zip(kept, probs))), dk
