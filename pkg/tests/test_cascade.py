import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from sasvkit.cascade import (
    CascadeConfig,
    cascade_decide,
    cascade_score,
    floor_score,
    format_decisions,
    select_cm_threshold,
)
from sasvkit.errors import EmptyScoreSet, KeyMismatch, SingleClassInput
from sasvkit.ingest import LabeledScores, ScoreSet


def one(cm, asv, key=("e", "t")):
    return ScoreSet([key], [cm]), ScoreSet([key], [asv])


def test_select_cm_threshold_examples():
    assert select_cm_threshold(LabeledScores.from_classes([2], [3], [0, 1])) == 1.5
    assert select_cm_threshold(LabeledScores.from_classes([1], [], [2])) == 1.5
    # same answer from the brute-force sweep
    assert oracles.eer([2, 3], [0, 1])[1] == 1.5
    assert oracles.eer([1], [2])[1] == 1.5


def test_select_cm_threshold_single_class():
    with pytest.raises(SingleClassInput):
        select_cm_threshold(LabeledScores.from_classes([1, 2], [3], []))


@pytest.mark.parametrize("cm, asv, final", [(0.9, 1.2, True), (0.1, 5.0, False), (0.9, 0.2, False)])
def test_decide_examples(cm, asv, final):
    (d,) = cascade_decide(*one(cm, asv), CascadeConfig(0.5, 1.0))
    assert d.final_accept is final
    assert d.final_accept == (d.cm_accept and d.asv_accept)


def test_decide_tie_accepts():
    (d,) = cascade_decide(*one(0.5, 1.0), CascadeConfig(0.5, 1.0))
    assert d.cm_accept and d.asv_accept


def test_gated_score_examples():
    assert cascade_score(*one(0.9, 1.2), 0.5)[("e", "t")] == 1.2
    keys = [("e", "a"), ("e", "b"), ("e", "c")]
    cm = ScoreSet(keys, [0.1, 0.9, 0.9])
    asv = ScoreSet(keys, [1.2, -0.3, 0.0])
    gated = cascade_score(cm, asv, 0.5)
    assert gated[("e", "a")] == pytest.approx(-1.3, abs=1e-15)
    assert gated.values.tolist()[1:] == [-0.3, 0.0]
    all_pass = cascade_score(ScoreSet(keys, [1.0] * 3), asv, 0.5)
    assert np.array_equal(all_pass.values, asv.values) and list(all_pass) == keys


def test_key_mismatch_and_empty():
    with pytest.raises(KeyMismatch):
        cascade_score(ScoreSet([("e", "a")], [1.0]), ScoreSet([("e", "b")], [1.0]), 0.5)
    with pytest.raises(KeyMismatch):
        cascade_decide(ScoreSet([("e", "a")], [1.0]), ScoreSet([("e", "b")], [1.0]), CascadeConfig(0.5))
    with pytest.raises(EmptyScoreSet):
        floor_score(ScoreSet([], []))


def test_auto_threshold_resolution():
    dev = LabeledScores.from_classes([2], [3], [0, 1])
    assert CascadeConfig("auto", 1.0).resolve(dev) == CascadeConfig(1.5, 1.0)
    with pytest.raises(ValueError):
        CascadeConfig("auto").resolve()
    with pytest.raises(ValueError):
        cascade_decide(*one(1, 1), CascadeConfig("auto"))


def test_decision_dump_format():
    text = format_decisions(cascade_decide(*one(0.9, 0.2), CascadeConfig(0.5, 1.0)))
    assert text == "e t 1 0 0 0.2\n"


def test_floor_below_huge_scores():
    asv = ScoreSet([("e", "a"), ("e", "b")], [1e20, 2e20])
    assert floor_score(asv) < 1e20


keyed = st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=30)


@settings(max_examples=80, deadline=None)
@given(keyed, st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 3), st.floats(0, 3))
def test_decisions_monotone_in_thresholds(rows, t_cm, t_asv, d_cm, d_asv):
    keys = [("e", f"t{i}") for i in range(len(rows))]
    cm = ScoreSet(keys, [r[0] for r in rows])
    asv = ScoreSet(keys, [r[1] for r in rows])
    low = cascade_decide(cm, asv, CascadeConfig(t_cm, t_asv))
    high = cascade_decide(cm, asv, CascadeConfig(t_cm + d_cm, t_asv + d_asv))
    assert all(lo.final_accept or not hi.final_accept for lo, hi in zip(low, high))


@settings(max_examples=80, deadline=None)
@given(keyed, st.floats(-5, 5))
def test_gated_scores_of_accepted_trials_are_asv_scores(rows, threshold):
    keys = [("e", f"t{i}") for i in range(len(rows))]
    cm = ScoreSet(keys, [r[0] for r in rows])
    asv = ScoreSet(keys, [r[1] for r in rows])
    gated = cascade_score(cm, asv, threshold)
    accepted = cm.values >= threshold
    assert np.array_equal(gated.values[accepted], asv.values[accepted])
    assert np.all(gated.values[~accepted] == floor_score(asv))
    assert np.all(floor_score(asv) < asv.values)
