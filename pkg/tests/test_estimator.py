"""The sklearn-style facade: params, fit/predict, rollout, validation."""

import numpy as np
import pytest
from sklearn.base import clone

from motionlab import ConsecutiveMotionPredictor, MotionSequence, chain_skeleton
from motionlab.validation import check_option, check_pose_array, check_sequence_list

K = 6


def make_sequences(n=4, frames=40, seed=42):
    rng = np.random.default_rng(seed)
    return [rng.normal(0.0, 0.1, (frames, K)).cumsum(axis=0) for _ in range(n)]


def small_estimator(**overrides):
    params = dict(n_observed=5, n_predicted=4, width=16, mixer_blocks=1,
                  feedback_hidden=8, epochs=2, batch_size=8, random_state=0)
    params.update(overrides)
    return ConsecutiveMotionPredictor(**params)


@pytest.fixture(scope="module")
def fitted():
    return small_estimator().fit(make_sequences())


def test_get_set_params_and_clone():
    est = small_estimator(epochs=3)
    params = est.get_params()
    assert params["epochs"] == 3
    assert params["baseline"] == "mixer" and params["feedback"] == "mlp"

    copy = clone(est)
    assert copy is not est
    assert copy.get_params() == params
    assert not hasattr(copy, "bundle_")

    est.set_params(baseline="dct_gcn", feedback="gru")
    assert est.baseline == "dct_gcn" and est.feedback == "gru"


def test_fit_predict_shapes(fitted):
    assert fitted.n_features_in_ == K
    assert len(fitted.history_) == 2

    window = make_sequences(n=1)[0][:5]
    single = fitted.predict(window)
    assert single.shape == (1, 4, K)

    batch = fitted.predict([window, window + 1.0, window * 2.0])
    assert batch.shape == (3, 4, K)
    assert np.array_equal(batch[0], single[0])

    deviation = np.full((3, K), 0.05)
    nudged = fitted.predict([window], deviations=[deviation])
    assert nudged.shape == (1, 4, K)
    with pytest.raises(ValueError, match="deviations"):
        fitted.predict([window, window], deviations=[deviation])


def test_unfitted_estimator_raises():
    est = small_estimator()
    window = np.zeros((5, K))
    with pytest.raises(RuntimeError, match="not been fitted"):
        est.predict(window)
    with pytest.raises(RuntimeError, match="not been fitted"):
        est.rollout(make_sequences(n=1))
    with pytest.raises(RuntimeError, match="not been fitted"):
        est.score(make_sequences(n=1))


def test_fit_input_validation():
    est = small_estimator()
    with pytest.raises(ValueError, match="at least one sequence"):
        est.fit([])
    with pytest.raises(ValueError, match="mixes pose widths"):
        est.fit([np.zeros((40, K)), np.zeros((40, K + 3))])
    with pytest.raises(ValueError, match="need at least 13"):
        est.fit([np.zeros((40, K)), np.zeros((12, K))])
    with pytest.raises(ValueError, match="non-finite"):
        bad = np.zeros((40, K))
        bad[3, 1] = np.nan
        est.fit([bad])


def test_predict_input_validation(fitted):
    with pytest.raises(ValueError, match="must have 5 frames"):
        fitted.predict(np.zeros((6, K)))
    with pytest.raises(ValueError, match="pose width"):
        fitted.predict(np.zeros((5, K + 3)))
    with pytest.raises(ValueError, match="non-finite"):
        window = np.zeros((5, K))
        window[0, 0] = np.inf
        fitted.predict(window)


def test_random_state_controls_determinism():
    data = make_sequences()
    window = data[0][:5]
    one = small_estimator().fit(data).predict(window)
    two = small_estimator().fit(data).predict(window)
    other = small_estimator(random_state=1).fit(data).predict(window)
    assert np.array_equal(one, two)
    assert not np.array_equal(one, other)


def test_rollout_and_score(fitted):
    data = make_sequences(n=2, seed=7)
    report = fitted.rollout(data, testpoints=[2, 4])
    # 40 frames give (40 - 5) // 4 = 8 rounds, under the max_rounds cap
    assert report.rounds == list(range(1, 9))
    assert report.mode == "deviation_on"
    assert all(report.per_round_avg[r] > 0 for r in report.rounds)

    default = fitted.rollout(data)
    expected = -float(np.mean([default.per_round_avg[r] for r in default.rounds]))
    assert fitted.score(data) == expected

    with pytest.raises(ValueError, match="need at least 13"):
        fitted.rollout([make_sequences(n=1)[0][:12]])


def test_feedback_none_modes_agree():
    data = make_sequences()
    est = small_estimator(feedback="none").fit(data)
    on = est.rollout(data, mode="deviation_on")
    off = est.rollout(data, mode="deviation_off")
    assert all(on.per_round_avg[r] == off.per_round_avg[r] for r in on.rounds)

    alias = small_estimator(feedback=None).fit(data)
    assert np.array_equal(alias.predict(data[0][:5]), est.predict(data[0][:5]))


def test_validation_helpers():
    arr = check_pose_array([[0, 1, 2], [3, 4, 5]])
    assert arr.dtype == np.float64 and arr.shape == (2, 3)
    with pytest.raises(ValueError, match="2D"):
        check_pose_array(np.zeros(5))

    seqs = check_sequence_list(np.zeros((20, K)))
    assert len(seqs) == 1 and seqs[0].shape == (20, K)
    wrapped = MotionSequence(skeleton=chain_skeleton(2),
                             frames=np.ones((20, K)), fps=1.0)
    assert np.array_equal(check_sequence_list(wrapped)[0], wrapped.frames)

    assert check_option("mlp", ("mlp", "gru"), "feedback") == "mlp"
    with pytest.raises(ValueError, match="feedback must be one of"):
        check_option("cnn", ("mlp", "gru"), "feedback")
