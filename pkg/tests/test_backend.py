import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from sasvkit.backend import BackendConfig, cosine_score, score_trials
from sasvkit.errors import DimensionMismatch, UnknownEnrollment, UnknownUtterance, ZeroNormVector
from sasvkit.ingest import (
    EmbeddingTable,
    EnrollmentMap,
    Trial,
    TrialLabel,
    parse_embeddings,
    parse_enrollment_map,
    parse_trial_list,
)

# 50-digit mpmath evaluation of mean cosine over enrollment utterances,
# rounded to double; see fixtures/backend.
FROZEN = {
    ("spkA", "t1"): 0.6138802621666246,
    ("spkA", "t2"): 0.8171224406944094,
    ("spkA", "t3"): 0.600830745316654,
    ("spkB", "t1"): 0.43570226039551585,
    ("spkB", "t2"): 0.7587141249717989,
    ("spkB", "t3"): 0.6685618083164127,
}


@pytest.mark.parametrize("a, b, expected", [
    ([1, 0], [0, 1], 0.0),
    ([1, 2], [2, 4], 1.0),
    ([1, 1], [1, 0], 0.7071067811865475),
])
def test_cosine_examples(a, b, expected):
    assert cosine_score(a, b) == pytest.approx(expected, abs=1e-15)


def test_cosine_errors():
    with pytest.raises(DimensionMismatch):
        cosine_score([1, 0], [1, 0, 0])
    with pytest.raises(ZeroNormVector):
        cosine_score([0, 0], [1, 0])


vec = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=3).filter(
    lambda v: math.sqrt(sum(x * x for x in v)) > 1e-3)


@given(vec, vec)
def test_cosine_symmetric_and_bounded(a, b):
    assert cosine_score(a, b) == cosine_score(b, a)
    assert -1.0 <= cosine_score(a, b) <= 1.0


def _table():
    return EmbeddingTable(2, {"u1": [1.0, 0.0], "u2": [0.6, 0.8], "t": [0.8, 0.6]})


def test_two_enrollments_average():
    table = EmbeddingTable(2, {"u1": [1.0, 0.0], "u2": [0.0, 1.0], "t": [1.0, 1.0]})
    s = score_trials(table, EnrollmentMap({"spk": ("u1", "u2")}), [Trial("spk", "t", TrialLabel.TARGET)])
    assert s[("spk", "t")] == pytest.approx(0.7071067811865476, abs=1e-15)
    # mean of two values, 0.2 and 0.4 style example
    table = EmbeddingTable(2, {"u1": [0.2, math.sqrt(1 - 0.04)], "u2": [0.4, math.sqrt(1 - 0.16)], "t": [1.0, 0.0]})
    s = score_trials(table, EnrollmentMap({"spk": ("u1", "u2")}), [Trial("spk", "t", TrialLabel.TARGET)])
    assert s[("spk", "t")] == pytest.approx(0.3, abs=1e-15)


def test_single_enrollment_is_cosine():
    table = _table()
    s = score_trials(table, EnrollmentMap({"spk": ("u2",)}), [Trial("spk", "t", TrialLabel.TARGET)])
    assert s[("spk", "t")] == pytest.approx(cosine_score(table["u2"], table["t"]), abs=1e-15)


def test_fixture_matches_frozen_oracle(fixtures_dir):
    d = fixtures_dir / "backend"
    table = parse_embeddings(d / "embeddings.txt")
    enrollmap = parse_enrollment_map(d / "enroll.txt")
    trials = parse_trial_list(d / "trials.txt")
    scores = score_trials(table, enrollmap, trials)
    vectors = {u: v.tolist() for u, v in table.vectors.items()}
    for trial in trials:
        brute = oracles.cosine_mean(vectors, enrollmap[trial.enroll_id], trial.test_id)
        assert abs(scores[trial.key] - brute) <= 1e-12
        assert abs(scores[trial.key] - FROZEN[trial.key]) <= 1e-12
    assert list(scores) == [t.key for t in trials]


def test_unknown_enrollment_and_utterance():
    table = _table()
    with pytest.raises(UnknownEnrollment):
        score_trials(table, EnrollmentMap({"spk": ("u1",)}), [Trial("other", "t", TrialLabel.TARGET)])
    with pytest.raises(UnknownUtterance):
        score_trials(table, EnrollmentMap({"spk": ("u1",)}), [Trial("spk", "missing", TrialLabel.TARGET)])
    with pytest.raises(UnknownUtterance):
        score_trials(table, EnrollmentMap({"spk": ("ghost",)}), [Trial("spk", "t", TrialLabel.TARGET)])


def test_backend_config_is_fixed():
    BackendConfig()
    with pytest.raises(ValueError):
        BackendConfig(similarity="plda")


def _random_setup(rng, n_enroll):
    vectors = {f"e{i}": rng.normal(size=4) for i in range(n_enroll)}
    vectors.update({f"t{i}": rng.normal(size=4) for i in range(5)})
    trials = [Trial("spk", f"t{i}", TrialLabel.TARGET) for i in range(5)]
    return vectors, trials


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 7), st.randoms(use_true_random=False))
def test_enrollment_order_is_irrelevant(seed, n_enroll, shuffler):
    vectors, trials = _random_setup(np.random.default_rng(seed), n_enroll)
    table = EmbeddingTable(4, vectors)
    utts = [f"e{i}" for i in range(n_enroll)]
    shuffled = utts[:]
    shuffler.shuffle(shuffled)
    a = score_trials(table, EnrollmentMap({"spk": tuple(utts)}), trials)
    b = score_trials(table, EnrollmentMap({"spk": tuple(shuffled)}), trials)
    assert a == b


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_positive_scaling_is_irrelevant(seed, factor):
    vectors, trials = _random_setup(np.random.default_rng(seed), 3)
    enrollmap = EnrollmentMap({"spk": ("e0", "e1", "e2")})
    a = score_trials(EmbeddingTable(4, vectors), enrollmap, trials)
    scaled = {u: v * factor if u in ("e1", "t3") else v for u, v in vectors.items()}
    b = score_trials(EmbeddingTable(4, scaled), enrollmap, trials)
    np.testing.assert_allclose(a.values, b.values, rtol=0, atol=1e-12)
    assert a.key_set() == {t.key for t in trials}
