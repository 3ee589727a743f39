"""CM-then-ASV cascade: hard CM gate, ASV decision, gated score stream.

Trials rejected by the CM get one shared floor score, ``min(asv) - 1``, so
the gated stream stays totally ordered and can be fed to the EER sweep.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import EmptyScoreSet, KeyMismatch, SingleClassInput
from .ingest import Key, LabeledScores, ScoreSet
from .metrics import compute_eer

Threshold = Union[float, str]


@dataclass(frozen=True)
class CascadeConfig:
    cm_threshold: Threshold = "auto"
    asv_threshold: float = 0.0

    def __post_init__(self):
        if isinstance(self.cm_threshold, str) and self.cm_threshold != "auto":
            raise ValueError(f"cm_threshold must be a number or 'auto', got {self.cm_threshold!r}")

    def resolve(self, cm_dev: LabeledScores | None = None) -> CascadeConfig:
        """Replace an ``auto`` CM threshold by the dev-set EER operating point."""
        if self.cm_threshold != "auto":
            return self
        if cm_dev is None:
            raise ValueError("an 'auto' CM threshold needs labeled dev CM scores")
        return CascadeConfig(select_cm_threshold(cm_dev), self.asv_threshold)


class SasvDecision(NamedTuple):
    key: Key
    cm_accept: bool
    asv_accept: bool
    final_accept: bool
    gated_score: float


def select_cm_threshold(cm_dev_scores: LabeledScores) -> float:
    """EER operating threshold of bona fide (positive) vs spoof (negative)."""
    bonafide = cm_dev_scores.bonafide
    spoof = cm_dev_scores.spoof
    if bonafide.size == 0 or spoof.size == 0:
        raise SingleClassInput("CM threshold selection needs bona fide and spoof dev trials")
    return compute_eer(bonafide, spoof)[1]


def _aligned_cm(cm: ScoreSet, asv: ScoreSet) -> np.ndarray:
    """CM scores in ``asv`` key order."""
    if len(cm) != len(asv) or cm.key_set() != asv.key_set():
        raise KeyMismatch("CM and ASV score sets cover different trials")
    if cm.keys_tuple == asv.keys_tuple:
        return cm.values
    return cm.values[[cm.index_of(k) for k in asv.keys_tuple]]


def floor_score(asv_fused: ScoreSet) -> float:
    if len(asv_fused) == 0:
        raise EmptyScoreSet("cannot gate an empty ASV score set")
    lo = float(asv_fused.values.min())
    floor = lo - 1.0
    # magnitudes above 2**53 swallow the -1
    return floor if floor < lo else float(np.nextafter(lo, -np.inf))


def cascade_score(cm: ScoreSet, asv_fused: ScoreSet, cm_threshold: float, system_name: str = "sasv") -> ScoreSet:
    cm_values = _aligned_cm(cm, asv_fused)
    floor = floor_score(asv_fused)
    gated = np.where(cm_values >= cm_threshold, asv_fused.values, floor)
    return asv_fused.with_values(gated, system_name)


def cascade_decide(cm: ScoreSet, asv_fused: ScoreSet, config: CascadeConfig) -> list[SasvDecision]:
    if config.cm_threshold == "auto":
        raise ValueError("resolve the 'auto' CM threshold before deciding")
    cm_values = _aligned_cm(cm, asv_fused)
    cm_ok = cm_values >= config.cm_threshold
    asv_ok = asv_fused.values >= config.asv_threshold
    gated = cascade_score(cm, asv_fused, config.cm_threshold).values
    return [
        SasvDecision(key, bool(c), bool(a), bool(c and a), float(g))
        for key, c, a, g in zip(asv_fused.keys_tuple, cm_ok.tolist(), asv_ok.tolist(), gated.tolist())
    ]


def format_decisions(decisions: list[SasvDecision]) -> str:
    return "".join(
        f"{e} {t} {int(d.cm_accept)} {int(d.asv_accept)} {int(d.final_accept)} {d.gated_score!r}\n"
        for d in decisions
        for e, t in (d.key,)
    )
