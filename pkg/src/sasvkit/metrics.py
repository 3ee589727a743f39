"""EER, SASV-EER, a-DCF, Macro a-DCF and DET points.

Conventions shared by every function here:

* a trial is accepted when ``score >= threshold``;
* candidate thresholds are the midpoints between consecutive distinct pooled
  scores plus one sentinel below the minimum and one above the maximum, so
  every achievable operating point is visited exactly once;
* error rates are ratios of integer counts; nothing is interpolated.

EER is taken at the first candidate (ascending) where the miss rate reaches
the false-accept rate, and reported as the mean of the two rates there. No
ROC convex hull is applied, so values can differ slightly from toolkits that
interpolate.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateParams, EmptyClass, EmptyInput, InvalidParams
from .ingest import LabeledScores, TrialLabel

PRIOR_TOLERANCE = 1e-9
DET_CLAMP = 1e-6


@dataclass(frozen=True)
class AdcfParams:
    c_miss: float = 1.0
    c_fa_non: float = 10.0
    c_fa_spoof: float = 10.0
    pi_tar: float = 0.9405
    pi_non: float = 0.0095
    pi_spoof: float = 0.05
    normalize: bool = True

    def __post_init__(self):
        values = (self.c_miss, self.c_fa_non, self.c_fa_spoof, self.pi_tar, self.pi_non, self.pi_spoof)
        if not all(math.isfinite(v) and v >= 0 for v in values):
            raise InvalidParams("a-DCF costs and priors must be finite and non-negative")
        if abs(self.pi_tar + self.pi_non + self.pi_spoof - 1.0) > PRIOR_TOLERANCE:
            raise InvalidParams("a-DCF priors must sum to 1")
        if not (self.w_miss > 0 or self.w_fa_non > 0 or self.w_fa_spoof > 0):
            raise InvalidParams("at least one cost*prior product must be positive")

    @classmethod
    def from_lists(cls, costs: Sequence[float] | None = None, priors: Sequence[float] | None = None,
                   normalize: bool = True) -> AdcfParams:
        kw = {}
        if costs is not None:
            if len(costs) != 3:
                raise InvalidParams("expected 3 costs: miss, fa_non, fa_spoof")
            kw.update(c_miss=costs[0], c_fa_non=costs[1], c_fa_spoof=costs[2])
        if priors is not None:
            if len(priors) != 3:
                raise InvalidParams("expected 3 priors: target, nontarget, spoof")
            kw.update(pi_tar=priors[0], pi_non=priors[1], pi_spoof=priors[2])
        return cls(normalize=normalize, **kw)

    @property
    def w_miss(self) -> float:
        return self.c_miss * self.pi_tar

    @property
    def w_fa_non(self) -> float:
        return self.c_fa_non * self.pi_non

    @property
    def w_fa_spoof(self) -> float:
        return self.c_fa_spoof * self.pi_spoof

    @property
    def normalizer(self) -> float:
        return min(self.w_miss, self.w_fa_non + self.w_fa_spoof)


def _below(x: float) -> float:
    s = x - 1.0
    return s if s < x else float(np.nextafter(x, -np.inf))


def _above(x: float) -> float:
    s = x + 1.0
    return s if s > x else float(np.nextafter(x, np.inf))


def candidate_thresholds(unique_sorted: np.ndarray) -> np.ndarray:
    """Sentinel, midpoints between neighbours, sentinel: ``len(unique) + 1`` values.

    A midpoint that rounds onto the lower neighbour (adjacent doubles) is
    replaced by the upper one so the accept rule still splits the pair.
    """
    u = np.asarray(unique_sorted, dtype=np.float64)
    lo, hi = u[:-1], u[1:]
    mid = 0.5 * lo + 0.5 * hi
    mid = np.where(mid <= lo, hi, mid)
    return np.concatenate(([_below(u[0])], mid, [_above(u[-1])]))


def _counts_below(sorted_class: np.ndarray, unique_sorted: np.ndarray) -> np.ndarray:
    """Number of class scores strictly below each candidate threshold."""
    inner = np.searchsorted(sorted_class, unique_sorted, side="left")
    return np.concatenate((inner, [sorted_class.size])).astype(np.int64)


@dataclass(frozen=True)
class ErrorProfile:
    thresholds: np.ndarray
    n_miss: np.ndarray
    n_fa_non: np.ndarray
    n_fa_spoof: np.ndarray
    n_tar: int
    n_non: int
    n_spoof: int

    @staticmethod
    def _rate(count: np.ndarray, n: int) -> np.ndarray:
        if n == 0:
            return np.zeros(count.shape)
        return count / n

    @property
    def p_miss(self) -> np.ndarray:
        return self._rate(self.n_miss, self.n_tar)

    @property
    def p_fa_non(self) -> np.ndarray:
        return self._rate(self.n_fa_non, self.n_non)

    @property
    def p_fa_spoof(self) -> np.ndarray:
        return self._rate(self.n_fa_spoof, self.n_spoof)

    @property
    def p_fa_pooled(self) -> np.ndarray:
        return self._rate(self.n_fa_non + self.n_fa_spoof, self.n_non + self.n_spoof)

    def __len__(self) -> int:
        return self.thresholds.size


def error_profile(scores: LabeledScores) -> ErrorProfile:
    tar = np.sort(scores.target)
    non = np.sort(scores.nontarget)
    spoof = np.sort(scores.spoof)
    if tar.size == 0:
        raise EmptyClass("error profile needs at least one target trial")
    if non.size + spoof.size == 0:
        raise EmptyClass("error profile needs at least one nontarget or spoof trial")
    u = np.unique(scores.scores)
    return ErrorProfile(
        thresholds=candidate_thresholds(u),
        n_miss=_counts_below(tar, u),
        n_fa_non=non.size - _counts_below(non, u),
        n_fa_spoof=spoof.size - _counts_below(spoof, u),
        n_tar=tar.size,
        n_non=non.size,
        n_spoof=spoof.size,
    )


def compute_eer(pos, neg) -> tuple[float, float]:
    """Equal error rate in [0, 1] and its threshold."""
    pos = np.sort(np.asarray(pos, dtype=np.float64))
    neg = np.sort(np.asarray(neg, dtype=np.float64))
    if pos.size == 0 or neg.size == 0:
        raise EmptyClass("EER needs non-empty positive and negative classes")
    u = np.unique(np.concatenate((pos, neg)))
    miss = _counts_below(pos, u)
    fa = neg.size - _counts_below(neg, u)
    # miss/n_pos >= fa/n_neg, compared on integers
    i = int(np.argmax(miss * neg.size >= fa * pos.size))
    eer = (int(miss[i]) / pos.size + int(fa[i]) / neg.size) / 2
    return eer, float(candidate_thresholds(u)[i])


def compute_sasv_eer(scores: LabeledScores) -> tuple[float, float]:
    """EER with targets as positives and nontarget plus spoof pooled as negatives."""
    return compute_eer(scores.target, scores.of(TrialLabel.NONTARGET, TrialLabel.SPOOF))


def compute_adcf(profile: ErrorProfile, params: AdcfParams) -> tuple[float, float]:
    """Minimum a-DCF over the profile's thresholds (earliest on ties)."""
    for weight, n, name in (
        (params.w_miss, profile.n_tar, "target"),
        (params.w_fa_non, profile.n_non, "nontarget"),
        (params.w_fa_spoof, profile.n_spoof, "spoof"),
    ):
        if weight > 0 and n == 0:
            raise EmptyClass(f"a-DCF weights the {name} class but it has no trials")
    if params.normalize and params.normalizer == 0:
        raise DegenerateParams("a-DCF normalizer is zero")
    cost = (
        params.w_miss * profile.p_miss
        + params.w_fa_non * profile.p_fa_non
        + params.w_fa_spoof * profile.p_fa_spoof
    )
    i = int(np.argmin(cost))
    value = float(cost[i])
    if params.normalize:
        value /= params.normalizer
    return value, float(profile.thresholds[i])


def compute_macro_adcf(per_dataset: Sequence[tuple[str, float]]) -> float:
    """Unweighted mean of per-dataset a-DCF values."""
    if not per_dataset:
        raise EmptyInput("macro a-DCF needs at least one dataset")
    return math.fsum(v for _, v in per_dataset) / len(per_dataset)


def probit(p) -> np.ndarray:
    from scipy.special import ndtri

    return ndtri(np.clip(np.asarray(p, dtype=np.float64), DET_CLAMP, 1.0 - DET_CLAMP))


def det_points(profile: ErrorProfile, negatives: str = "pooled") -> list[tuple[float, float]]:
    """``(probit(p_miss), probit(p_fa))`` per threshold; rates clamped first."""
    p_fa = _fa_rates(profile, negatives)
    return list(zip(probit(profile.p_miss).tolist(), probit(p_fa).tolist()))


def _fa_rates(profile: ErrorProfile, negatives: str) -> np.ndarray:
    if negatives == "pooled":
        return profile.p_fa_pooled
    if negatives == "nontarget":
        return profile.p_fa_non
    if negatives == "spoof":
        return profile.p_fa_spoof
    raise ValueError(f"unknown negative class {negatives!r}")


def det_table(profile: ErrorProfile, negatives: str = "pooled") -> str:
    """TSV rows ``threshold p_miss p_fa probit_miss probit_fa`` with a header."""
    p_miss = profile.p_miss
    p_fa = _fa_rates(profile, negatives)
    rows = ["threshold\tp_miss\tp_fa\tprobit_miss\tprobit_fa\n"]
    for row in zip(profile.thresholds.tolist(), p_miss.tolist(), p_fa.tolist(),
                   probit(p_miss).tolist(), probit(p_fa).tolist()):
        rows.append("\t".join(repr(x) for x in row) + "\n")
    return "".join(rows)


@dataclass(frozen=True)
class MetricReport:
    """Mirror of a cascade results row: SD / ASV / SASV EER (%) and a-DCF.

    EER fields are ``None`` when the classes they need are absent.
    """

    sasv_eer_pct: float
    asv_eer_pct: float | None
    sd_eer_pct: float | None
    adcf: float
    thresholds: dict[str, float | None]
    counts: dict[str, int]
    adcf_params: dict = field(default_factory=dict)
    unmatched_scores: int = 0

    def __post_init__(self):
        for value in (self.sasv_eer_pct, self.asv_eer_pct, self.sd_eer_pct):
            if value is not None and not 0.0 <= value <= 100.0:
                raise ValueError(f"rate {value} outside [0, 100]")
        if self.adcf < 0:
            raise ValueError("a-DCF must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def _maybe_eer(pos, neg):
    if len(pos) == 0 or len(neg) == 0:
        return None, None
    eer, thr = compute_eer(pos, neg)
    return 100.0 * eer, thr


def build_report(
    sasv: LabeledScores,
    params: AdcfParams | None = None,
    cm: LabeledScores | None = None,
    asv: LabeledScores | None = None,
) -> MetricReport:
    """Evaluate a SASV score stream, optionally with separate CM and ASV streams.

    ASV EER uses target vs nontarget and SD EER uses bona fide vs spoof; each
    falls back to the SASV stream when its own stream is not given.
    """
    params = params or AdcfParams()
    sasv_eer, sasv_thr = compute_sasv_eer(sasv)
    asv_src = asv if asv is not None else sasv
    cm_src = cm if cm is not None else sasv
    asv_eer, asv_thr = _maybe_eer(asv_src.target, asv_src.nontarget)
    sd_eer, sd_thr = _maybe_eer(cm_src.bonafide, cm_src.spoof)
    adcf, adcf_thr = compute_adcf(error_profile(sasv), params)
    return MetricReport(
        sasv_eer_pct=100.0 * sasv_eer,
        asv_eer_pct=asv_eer,
        sd_eer_pct=sd_eer,
        adcf=adcf,
        thresholds={"sasv_eer": sasv_thr, "asv_eer": asv_thr, "sd_eer": sd_thr, "adcf": adcf_thr},
        counts=sasv.counts(),
        adcf_params=asdict(params),
        unmatched_scores=sasv.unmatched,
    )
