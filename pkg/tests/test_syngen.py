import math

import numpy as np
import pytest

from sasvkit.backend import score_trials
from sasvkit.errors import InvalidConfig
from sasvkit.ingest import TrialLabel, join_scores
from sasvkit.metrics import compute_eer
from sasvkit.syngen import GaussianStream, SynConfig, analytic_eer, generate_embeddings, generate_scores


def test_class_counts():
    ls = generate_scores(SynConfig(seed=1, n_target=3, n_nontarget=2, n_spoof=0))
    assert len(ls) == 5
    assert ls.counts() == {"target": 3, "nontarget": 2, "spoof": 0}


def test_same_seed_same_scores():
    config = SynConfig(seed=99, n_target=50, n_nontarget=40, n_spoof=30)
    a, b = generate_scores(config), generate_scores(config)
    assert a.scores.tobytes() == b.scores.tobytes()
    assert not np.array_equal(a.scores, generate_scores(SynConfig(seed=100, n_target=50, n_nontarget=40,
                                                                  n_spoof=30)).scores)


def test_stream_is_pinned():
    # first draws of stream 0 under seed 0; guards against silent RNG changes
    z = GaussianStream(0, 0).normals(3)
    assert z.tolist() == FIRST_NORMALS


FIRST_NORMALS = [-0.13877982328384528, 0.31344951945528665, 0.568146807670389]


def test_box_muller_reference():
    raw = np.random.PCG64(np.random.SeedSequence(5, spawn_key=(0,))).random_raw(2)
    u1, u2 = (((int(r) >> 11) + 1) * 2.0**-53 for r in raw)
    expected = math.sqrt(-2 * math.log(u1)) * math.cos(2 * math.pi * u2)
    assert GaussianStream(5, 0).normals(1)[0] == expected


def test_normal_moments():
    z = GaussianStream(11, 0).normals(200_000)
    assert abs(z.mean()) < 0.01
    assert abs(z.std() - 1) < 0.01


@pytest.mark.parametrize("args, expected", [
    ((2, 0, 1), 0.15865525393145707),
    ((0, 0, 1), 0.5),
    ((10, 0, 1), 2.866515718791946e-07),
])
def test_analytic_eer(args, expected):
    assert analytic_eer(*args) == pytest.approx(expected, rel=1e-12)


def test_analytic_eer_invalid():
    with pytest.raises(InvalidConfig):
        analytic_eer(0, 1, 1)
    with pytest.raises(InvalidConfig):
        analytic_eer(1, 0, 0)


@pytest.mark.parametrize("kw", [
    {"sigma": 0},
    {"n_target": -1},
    {"n_target": 5, "n_nontarget": 0, "n_spoof": 0},
    {"n_speakers": 1, "dim": 4},
    {"n_speakers": 3, "dim": 1},
    {"seed": -1},
])
def test_invalid_config(kw):
    with pytest.raises(InvalidConfig):
        SynConfig(**kw)


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(InvalidConfig):
        SynConfig.from_dict({"n_targets": 3})


def test_embedding_bookkeeping():
    table, enrollmap, trials = generate_embeddings(
        SynConfig(seed=3, n_target=4, n_nontarget=4, n_spoof=2, dim=5, n_speakers=2, enroll_per_speaker=2))
    assert len(enrollmap) == 2 and all(len(enrollmap[s]) == 2 for s in enrollmap.entries)
    assert table.dim == 5
    assert [t.label for t in trials].count(TrialLabel.SPOOF) == 2
    assert len({t.key for t in trials}) == len(trials) == 10


def test_embedding_determinism():
    config = SynConfig(seed=8, n_target=6, n_nontarget=6, dim=4, n_speakers=3, enroll_per_speaker=2)
    a, b = generate_embeddings(config), generate_embeddings(config)
    assert a[0].vectors.keys() == b[0].vectors.keys()
    assert all(a[0][u].tobytes() == b[0][u].tobytes() for u in a[0].vectors)
    assert a[1] == b[1] and a[2] == b[2]


def test_separated_speakers_give_zero_eer():
    config = SynConfig(seed=21, n_target=60, n_nontarget=60, dim=16, n_speakers=6, enroll_per_speaker=3,
                       speaker_scale=10.0, within_std=0.05)
    table, enrollmap, trials = generate_embeddings(config)
    ls = join_scores(trials, score_trials(table, enrollmap, trials))
    assert ls.target.min() > ls.nontarget.max()
    assert compute_eer(ls.target, ls.nontarget)[0] == 0.0
