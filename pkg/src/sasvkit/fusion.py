"""Z-score normalization and weighted-average fusion of ASV systems."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateStd, InvalidWeights, KeyMismatch, TooFewScores
from .ingest import ScoreSet

MIN_STD = 1e-12

Cohort = Union[str, Sequence[ScoreSet]]


@dataclass(frozen=True)
class NormStats:
    mean: float
    std: float

    def __post_init__(self):
        if not (math.isfinite(self.std) and self.std >= MIN_STD):
            raise DegenerateStd(f"standard deviation {self.std!r} is degenerate")


@dataclass(frozen=True)
class FusionConfig:
    """``cohort`` is ``"self"`` or one cohort ScoreSet per system."""

    weights: tuple[float, ...]
    cohort: Cohort = "self"

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        if not weights or not all(math.isfinite(w) and w >= 0 for w in weights) or not any(w > 0 for w in weights):
            raise InvalidWeights(f"weights must be non-negative with at least one positive: {weights}")
        object.__setattr__(self, "weights", weights)
        if isinstance(self.cohort, str):
            if self.cohort != "self":
                raise ValueError(f"unknown cohort {self.cohort!r}")
        else:
            object.__setattr__(self, "cohort", tuple(self.cohort))

    @classmethod
    def uniform(cls, n_systems: int, cohort: Cohort = "self") -> FusionConfig:
        return cls((1.0,) * n_systems, cohort)


def compute_norm_stats(scores) -> NormStats:
    """Mean and population (1/N) standard deviation, two-pass."""
    x = np.asarray(scores, dtype=np.float64).ravel()
    if x.size < 2:
        raise TooFewScores(f"need at least 2 scores for normalization, got {x.size}")
    mean = float(np.mean(x))
    std = math.sqrt(float(np.mean((x - mean) ** 2)))
    if std < MIN_STD:
        raise DegenerateStd(f"cohort standard deviation {std!r} below {MIN_STD}")
    return NormStats(mean, std)


def znorm(score_set: ScoreSet, stats: NormStats) -> ScoreSet:
    return score_set.with_values((score_set.values - stats.mean) / stats.std)


def fuse(systems: Sequence[ScoreSet], config: FusionConfig, system_name: str = "fused") -> ScoreSet:
    """Weighted average of z-normalized systems, keyed like ``systems[0]``."""
    if not systems:
        raise InvalidWeights("no systems to fuse")
    if len(config.weights) != len(systems):
        raise InvalidWeights(f"{len(config.weights)} weights for {len(systems)} systems")
    cohorts = systems if config.cohort == "self" else config.cohort
    if len(cohorts) != len(systems):
        raise InvalidWeights(f"{len(cohorts)} cohorts for {len(systems)} systems")

    ref = systems[0]
    ref_keys = ref.key_set()
    terms = np.empty((len(systems), len(ref)))
    for i, (system, cohort, w) in enumerate(zip(systems, cohorts, config.weights)):
        if i and (len(system) != len(ref) or system.key_set() != ref_keys):
            raise KeyMismatch(f"system {system.system_name or i} trial keys differ from {ref.system_name or 0}")
        z = znorm(system, compute_norm_stats(cohort.values)).values
        if i:
            z = z[[system.index_of(k) for k in ref.keys_tuple]] if system.keys_tuple != ref.keys_tuple else z
        terms[i] = w * z
    # summing each key's terms in sorted order makes the result independent of system order
    total = _ordered_sum(np.sort(terms, axis=0))
    return ref.with_values(total / math.fsum(config.weights), system_name)


def _ordered_sum(rows: np.ndarray) -> np.ndarray:
    total = rows[0].copy()
    for row in rows[1:]:
        total += row
    return total
