"""Seeded synthetic scores and embeddings with known error rates.

Random streams
--------------
Every stream is PCG64 (numpy's ``PCG64`` bit generator, which has a fixed,
version-stable output sequence) seeded from
``SeedSequence(seed, spawn_key=(stream_id,))``. Only the raw 64-bit outputs
are used; numpy's own distribution samplers are not.

* uniform: ``u = ((raw >> 11) + 1) * 2**-53``, in (0, 1]
* Gaussian: Box-Muller on consecutive uniform pairs ``(u1, u2)``::

      r = sqrt(-2 ln u1);  z0 = r cos(2 pi u2);  z1 = r sin(2 pi u2)

  evaluated with the ``math`` module, one pair per two raw draws, z0 first.

Stream ids: 0 target, 1 nontarget, 2 spoof scores; 10 speaker means,
11 enrollment utterances, 12 test utterances.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InvalidConfig
from .ingest import EmbeddingTable, EnrollmentMap, LabeledScores, ScoreSet, Trial, TrialLabel

TWO_PI = 2.0 * math.pi
U64_MASK = (1 << 64) - 1


class GaussianStream:
    def __init__(self, seed: int, stream_id: int):
        seq = np.random.SeedSequence(seed & U64_MASK, spawn_key=(stream_id,))
        self._bits = np.random.PCG64(seq)

    def uniforms(self, n: int) -> list[float]:
        raw = self._bits.random_raw(n)
        return (((raw >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * 2.0**-53).tolist()

    def normals(self, n: int) -> np.ndarray:
        u = self.uniforms(2 * ((n + 1) // 2))
        out = []
        log, sqrt, cos, sin = math.log, math.sqrt, math.cos, math.sin
        for i in range(0, len(u), 2):
            r = sqrt(-2.0 * log(u[i]))
            theta = TWO_PI * u[i + 1]
            out.append(r * cos(theta))
            out.append(r * sin(theta))
        return np.array(out[:n], dtype=np.float64)


@dataclass(frozen=True)
class SynConfig:
    seed: int = 0
    n_target: int = 1000
    n_nontarget: int = 1000
    n_spoof: int = 0
    mu_tar: float = 2.0
    mu_non: float = 0.0
    mu_spoof: float = 0.0
    sigma: float = 1.0
    # embedding mode; off while n_speakers == 0
    dim: int = 0
    n_speakers: int = 0
    enroll_per_speaker: int = 1
    speaker_scale: float = 1.0
    within_std: float = 0.1

    def __post_init__(self):
        if not 0 <= self.seed <= U64_MASK:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")
        counts = (self.n_target, self.n_nontarget, self.n_spoof)
        if any(c < 0 for c in counts) or sum(c > 0 for c in counts) < 2:
            raise InvalidConfig("counts must be >= 0 with at least two non-empty classes")
        if not self.sigma > 0:
            raise InvalidConfig("sigma must be positive")
        if self.embedding_mode:
            if self.dim < 2:
                raise InvalidConfig("embedding mode needs dim >= 2")
            if self.enroll_per_speaker < 1:
                raise InvalidConfig("enroll_per_speaker must be positive")
            if self.n_nontarget and self.n_speakers < 2:
                raise InvalidConfig("nontarget trials need at least two speakers")
            if not (self.speaker_scale > 0 and self.within_std >= 0):
                raise InvalidConfig("speaker_scale must be positive and within_std non-negative")
        elif self.n_speakers < 0:
            raise InvalidConfig("n_speakers must be non-negative")

    @property
    def embedding_mode(self) -> bool:
        return self.n_speakers > 0

    @classmethod
    def from_dict(cls, doc: dict) -> SynConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)


def analytic_eer(mu_pos: float, mu_neg: float, sigma: float) -> float:
    """EER of two equal-variance Gaussians: Phi(-(mu_pos - mu_neg) / (2 sigma))."""
    if not sigma > 0 or mu_pos < mu_neg:
        raise InvalidConfig("need sigma > 0 and mu_pos >= mu_neg")
    d = (mu_pos - mu_neg) / (2.0 * sigma)
    return 0.5 * math.erfc(d / math.sqrt(2.0))


def generate_scores(config: SynConfig) -> LabeledScores:
    """Class-conditional Gaussian scores: targets, then nontargets, then spoofs."""
    parts = []
    for label, n, mu in (
        (TrialLabel.TARGET, config.n_target, config.mu_tar),
        (TrialLabel.NONTARGET, config.n_nontarget, config.mu_non),
        (TrialLabel.SPOOF, config.n_spoof, config.mu_spoof),
    ):
        z = GaussianStream(config.seed, int(label)).normals(n)
        parts.append(mu + config.sigma * z)
    return LabeledScores.from_classes(*parts)


def synthetic_keys(n: int) -> list[tuple[str, str]]:
    return [(f"spk{i % 1000:04d}", f"utt{i:07d}") for i in range(n)]


def scores_to_files(scores: LabeledScores, system_name: str = "syn") -> tuple[list[Trial], ScoreSet]:
    """Attach generated trial keys to a labeled score list."""
    keys = synthetic_keys(len(scores))
    trials = [Trial(e, t, TrialLabel(int(lab))) for (e, t), lab in zip(keys, scores.labels.tolist())]
    return trials, ScoreSet(keys, scores.scores, system_name)


def generate_embeddings(config: SynConfig) -> tuple[EmbeddingTable, EnrollmentMap, list[Trial]]:
    """Speakers as Gaussian means; utterances as noisy copies of a mean.

    Trial ``i`` of each class claims speaker ``i mod n_speakers``. Target and
    spoof test utterances are drawn around the claimed speaker's mean;
    nontarget ones around a different speaker chosen round-robin.
    """
    if not config.embedding_mode:
        raise InvalidConfig("embedding generation needs n_speakers > 0")
    S, E, d = config.n_speakers, config.enroll_per_speaker, config.dim
    means = config.speaker_scale * GaussianStream(config.seed, 10).normals(S * d).reshape(S, d)
    enroll_noise = config.within_std * GaussianStream(config.seed, 11).normals(S * E * d).reshape(S, E, d)

    vectors: dict[str, np.ndarray] = {}
    entries: dict[str, tuple[str, ...]] = {}
    for s in range(S):
        utts = []
        for k in range(E):
            utt = f"spk{s:04d}_e{k:02d}"
            vectors[utt] = means[s] + enroll_noise[s, k]
            utts.append(utt)
        entries[f"spk{s:04d}"] = tuple(utts)

    plan = []
    for label, n in (
        (TrialLabel.TARGET, config.n_target),
        (TrialLabel.NONTARGET, config.n_nontarget),
        (TrialLabel.SPOOF, config.n_spoof),
    ):
        for i in range(n):
            claimed = i % S
            source = claimed
            if label is TrialLabel.NONTARGET:
                source = (claimed + 1 + (i // S) % (S - 1)) % S
            plan.append((claimed, source, label))

    test_noise = config.within_std * GaussianStream(config.seed, 12).normals(len(plan) * d).reshape(-1, d)
    trials = []
    for j, (claimed, source, label) in enumerate(plan):
        utt = f"tst{j:07d}"
        vectors[utt] = means[source] + test_noise[j]
        trials.append(Trial(f"spk{claimed:04d}", utt, label))
    return EmbeddingTable(d, vectors), EnrollmentMap(entries), trials
