"""Round extraction geometry and the semi-overlap it guarantees."""

import numpy as np
import pytest

from motionlab import (
    MotionSequence,
    RoundLayout,
    RoundLayoutError,
    RoundSample,
    TestSample,
    TrainSample,
    chain_skeleton,
    extract_rounds,
    make_test_samples,
    make_train_samples,
)

K = 6


def seq_of(length, label=None, seed=0):
    rng = np.random.default_rng(seed)
    return MotionSequence(skeleton=chain_skeleton(K // 3),
                          frames=rng.standard_normal((length, K)),
                          fps=25.0, label=label)


def arange_seq(length):
    """Frame i is the constant vector i, so slices are easy to read off."""
    frames = np.tile(np.arange(length, dtype=np.float64)[:, None], (1, K))
    return MotionSequence(skeleton=chain_skeleton(K // 3), frames=frames, fps=25.0)


def test_layout_validation():
    with pytest.raises(RoundLayoutError):
        RoundLayout(n_observed=5, n_predicted=0)
    with pytest.raises(RoundLayoutError):
        RoundLayout(n_observed=4, n_predicted=5)
    layout = RoundLayout(n_observed=10, n_predicted=10)
    assert layout.round_length == 20
    assert layout.frames_needed(1) == 20
    assert layout.frames_needed(3) == 40
    with pytest.raises(RoundLayoutError):
        layout.frames_needed(0)


def test_rounds_available_oracle():
    rng = np.random.default_rng(1)
    for _ in range(50):
        T = int(rng.integers(1, 8))
        N = T + int(rng.integers(0, 8))
        L = int(rng.integers(1, 80))
        assert RoundLayout(N, T).rounds_available(L) == (L - N) // T


def test_single_round():
    layout = RoundLayout(10, 10)
    seq = arange_seq(20)
    rounds = extract_rounds(seq, layout)
    assert len(rounds) == 1
    assert np.array_equal(rounds[0].observed, seq.frames[0:10])
    assert np.array_equal(rounds[0].future, seq.frames[10:20])
    assert rounds[0].round_index == 1


def test_three_rounds_start_frames():
    # Rounds start at frames 1, 11, 21 in 1-based numbering.
    layout = RoundLayout(10, 10)
    seq = arange_seq(40)
    rounds = extract_rounds(seq, layout)
    assert len(rounds) == 3
    for r, lo in zip(rounds, (0, 10, 20)):
        assert r.observed[0, 0] == lo
        assert np.array_equal(r.observed, seq.frames[lo:lo + 10])
        assert np.array_equal(r.future, seq.frames[lo + 10:lo + 20])


def test_trailing_frames_unused():
    layout = RoundLayout(10, 5)
    seq = arange_seq(47)
    rounds = extract_rounds(seq, layout)
    assert len(rounds) == 7  # (47 - 10) // 5
    assert rounds[-1].future[-1, 0] == 44.0  # frames 46, 47 never appear


def test_max_rounds_is_a_cap():
    layout = RoundLayout(10, 10)
    seq = arange_seq(120)
    assert len(extract_rounds(seq, layout)) == 11
    assert len(extract_rounds(seq, layout, max_rounds=3)) == 3
    assert len(extract_rounds(seq, layout, max_rounds=100)) == 11
    with pytest.raises(RoundLayoutError):
        extract_rounds(seq, layout, max_rounds=0)
    with pytest.raises(RoundLayoutError):
        extract_rounds(arange_seq(19), layout)


def test_start_offset_matches_sliced_sequence():
    layout = RoundLayout(6, 3)
    seq = arange_seq(40)
    shifted = extract_rounds(seq, layout, max_rounds=2, start=7)
    assert shifted[0].observed[0, 0] == 7.0
    assert np.array_equal(shifted[0].observed, seq.frames[7:13])
    with pytest.raises(RoundLayoutError):
        extract_rounds(seq, layout, start=-1)


def test_consecutive_overlap_randomized():
    rng = np.random.default_rng(9)
    for case in range(50):
        T = int(rng.integers(1, 7))
        N = T + int(rng.integers(0, 7))
        rounds_n = int(rng.integers(2, 6))
        L = N + rounds_n * T + int(rng.integers(0, 5))
        seq = seq_of(L, seed=case)
        rounds = extract_rounds(seq, RoundLayout(N, T))
        for prev, cur in zip(rounds, rounds[1:]):
            assert np.array_equal(cur.observed[-T:], prev.future)
            assert np.array_equal(cur.observed_tail, prev.future)


def test_round_sample_validation():
    ok = RoundSample(observed=np.zeros((4, K)), future=np.zeros((2, K)),
                     round_index=1)
    assert np.array_equal(ok.observed_tail, np.zeros((2, K)))
    with pytest.raises(RoundLayoutError):
        RoundSample(observed=np.zeros(4), future=np.zeros((2, K)), round_index=1)
    with pytest.raises(RoundLayoutError):
        RoundSample(observed=np.zeros((4, K)), future=np.zeros((2, K + 1)),
                    round_index=1)
    with pytest.raises(RoundLayoutError):
        RoundSample(observed=np.zeros((2, K)), future=np.zeros((4, K)),
                    round_index=1)
    with pytest.raises(RoundLayoutError):
        RoundSample(observed=np.zeros((4, K)), future=np.zeros((2, K)),
                    round_index=0)


def test_source_id_comes_from_label():
    rounds = extract_rounds(seq_of(30, label="walk"), RoundLayout(6, 3))
    assert all(r.source_id == "walk" for r in rounds)


def test_train_sample_rejects_non_adjacent_and_broken_overlap():
    layout = RoundLayout(6, 3)
    r1, r2, r3 = extract_rounds(seq_of(20), layout, max_rounds=3)
    TrainSample(first=r1, second=r2)
    with pytest.raises(RoundLayoutError, match="adjacent"):
        TrainSample(first=r1, second=r3)
    tampered = RoundSample(observed=r2.observed + 1.0, future=r2.future,
                           round_index=r2.round_index)
    with pytest.raises(RoundLayoutError, match="overlap"):
        TrainSample(first=r1, second=tampered)


def test_train_window_count_oracle():
    layout = RoundLayout(6, 3)  # window = 12 frames
    rng = np.random.default_rng(3)
    for _ in range(30):
        L = int(rng.integers(12, 60))
        stride = int(rng.integers(1, 6))
        samples = make_train_samples([seq_of(L)], layout, stride=stride)
        assert len(samples) == (L - 12) // stride + 1


def test_train_windows_specific():
    layout = RoundLayout(6, 3)
    # L = N + 2T + 4 with stride 2: starts 0, 2, 4.
    samples = make_train_samples([arange_seq(16)], layout, stride=2)
    assert len(samples) == 3
    assert [s.first.observed[0, 0] for s in samples] == [0.0, 2.0, 4.0]
    # Default stride is T, aligning pairs with the round grid.
    samples = make_train_samples([arange_seq(18)], layout)
    assert [s.first.observed[0, 0] for s in samples] == [0.0, 3.0, 6.0]


def test_train_samples_skip_short_sequences():
    layout = RoundLayout(6, 3)
    samples = make_train_samples([seq_of(11), seq_of(12)], layout)
    assert len(samples) == 1
    assert make_train_samples([seq_of(5)], layout) == []
    with pytest.raises(RoundLayoutError):
        make_train_samples([seq_of(20)], layout, stride=0)


def test_test_samples_cut_and_skip():
    layout = RoundLayout(10, 10)
    # 110 frames hold exactly one 10-round sample.
    samples = make_test_samples([seq_of(110)], layout, max_r=10)
    assert len(samples) == 1 and len(samples[0].rounds) == 10
    # One frame short of 5 rounds: skipped entirely.
    assert make_test_samples([seq_of(10 + 5 * 10 - 1)], layout, max_r=5) == []
    with pytest.raises(RoundLayoutError):
        make_test_samples([seq_of(110)], layout, max_r=1)


def test_test_samples_do_not_overlap():
    layout = RoundLayout(10, 10)
    seq = arange_seq(240)
    samples = make_test_samples([seq], layout, max_r=10)
    assert len(samples) == 2
    assert samples[0].rounds[0].observed[0, 0] == 0.0
    assert samples[1].rounds[0].observed[0, 0] == 110.0
    assert np.array_equal(samples[1].rounds[0].observed, seq.frames[110:120])


def test_round_futures_tile_the_sequence():
    layout = RoundLayout(10, 5)
    seq = arange_seq(60)
    (sample,) = make_test_samples([seq], layout, max_r=8)
    futures = np.concatenate([r.future for r in sample.rounds])
    assert np.array_equal(futures, seq.frames[10:50])


def test_test_sample_needs_consecutive_rounds():
    layout = RoundLayout(6, 3)
    r1, r2, r3 = extract_rounds(seq_of(20), layout, max_rounds=3)
    with pytest.raises(RoundLayoutError):
        TestSample(rounds=(r1,))
    with pytest.raises(RoundLayoutError):
        TestSample(rounds=(r1, r3))
    assert TestSample(rounds=(r1, r2, r3), label="x").label == "x"
