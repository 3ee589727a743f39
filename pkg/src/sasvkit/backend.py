"""Cosine scoring with score-level averaging over enrollment utterances."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UnknownEnrollment, UnknownUtterance, ZeroNormVector
from .ingest import EmbeddingTable, EnrollmentMap, ScoreSet, Trial


@dataclass(frozen=True)
class BackendConfig:
    similarity: str = "cosine"
    enrollment_aggregation: str = "mean"

    def __post_init__(self):
        if (self.similarity, self.enrollment_aggregation) != ("cosine", "mean"):
            raise ValueError("only cosine similarity with score-level mean aggregation is supported")


def cosine_score(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"cannot compare vectors of shape {a.shape} and {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroNormVector("cosine score of a zero-norm vector")
    return min(1.0, max(-1.0, float(np.dot(a, b)) / (na * nb)))


def _unit_rows(table: EmbeddingTable, utts: Sequence[str]) -> np.ndarray:
    try:
        m = np.stack([table[u] for u in utts])
    except KeyError as exc:
        raise UnknownUtterance(f"utterance {exc.args[0]} has no embedding") from None
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def score_trials(
    embeddings: EmbeddingTable,
    enrollmap: EnrollmentMap,
    trials: Sequence[Trial],
    system_name: str = "",
) -> ScoreSet:
    """Score every trial as the mean cosine over the speaker's enrollment utterances.

    Enrollment utterances are visited in sorted id order and the mean uses a
    correctly rounded sum, so scores do not depend on map ordering. Trials
    sharing an enrollment id are scored in one matrix product.
    """
    by_enroll: dict[str, list[int]] = {}
    for i, trial in enumerate(trials):
        if trial.enroll_id not in enrollmap:
            raise UnknownEnrollment(f"enrollment {trial.enroll_id} not in enrollment map")
        by_enroll.setdefault(trial.enroll_id, []).append(i)

    out = np.empty(len(trials), dtype=np.float64)
    for enroll_id, rows in by_enroll.items():
        enroll = _unit_rows(embeddings, sorted(enrollmap[enroll_id]))
        tests = _unit_rows(embeddings, [trials[i].test_id for i in rows])
        cos = np.clip(enroll @ tests.T, -1.0, 1.0)
        n = cos.shape[0]
        for col, i in enumerate(rows):
            out[i] = math.fsum(cos[:, col].tolist()) / n
    return ScoreSet([t.key for t in trials], out, system_name)
