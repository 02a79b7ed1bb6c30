"""Skeleton metadata, the motion text format, and the synthetic generator."""

import numpy as np
import pytest

from motionlab import (
    MotionParseError,
    MotionSequence,
    SkeletonError,
    SkeletonSpec,
    SyntheticConfig,
    SyntheticConfigError,
    chain_skeleton,
    default_skeleton,
    generate_synthetic,
    load_motion,
    save_motion,
)
from motionlab.skeleton import skeleton_for_pose_dim
from motionlab.synthetic import joint_depths


def test_default_skeleton_shape():
    sk = default_skeleton()
    assert sk.joint_count == 5
    assert sk.pose_dim == 15
    assert len(sk.edges) == 4
    assert sk.parent_of() == [-1, 0, 1, 0, 3]


def test_chain_skeleton():
    sk = chain_skeleton(4)
    assert sk.edges == [(0, 1), (1, 2), (2, 3)]
    assert sk.bone_lengths is None
    assert sk.pose_dim == 12


def test_skeleton_for_pose_dim():
    assert skeleton_for_pose_dim(66).joint_count == 22
    with pytest.raises(SkeletonError):
        skeleton_for_pose_dim(10)


@pytest.mark.parametrize("kwargs", [
    dict(joint_count=0, dims_per_joint=3, joint_names=[]),
    dict(joint_count=2, dims_per_joint=3, joint_names=["a"], edges=[(0, 1)]),
    dict(joint_count=2, dims_per_joint=3, joint_names=["a", "b"], edges=[]),
    dict(joint_count=3, dims_per_joint=3, joint_names=list("abc"),
         edges=[(0, 1), (0, 1)]),
    dict(joint_count=2, dims_per_joint=3, joint_names=["a", "b"],
         edges=[(1, 0)]),
    dict(joint_count=3, dims_per_joint=3, joint_names=list("abc"),
         edges=[(0, 1), (5, 2)]),
    dict(joint_count=2, dims_per_joint=3, joint_names=["a", "b"],
         edges=[(0, 1)], bone_lengths=[1.0, 2.0]),
    dict(joint_count=2, dims_per_joint=3, joint_names=["a", "b"],
         edges=[(0, 1)], bone_lengths=[-1.0]),
])
def test_bad_skeletons_rejected(kwargs):
    with pytest.raises(SkeletonError):
        SkeletonSpec(**kwargs)


def test_sequence_validation():
    sk = chain_skeleton(2)
    with pytest.raises(ValueError):
        MotionSequence(skeleton=sk, frames=np.zeros((3, 5)), fps=25.0)
    with pytest.raises(ValueError):
        MotionSequence(skeleton=sk, frames=np.full((3, 6), np.nan), fps=25.0)
    with pytest.raises(ValueError):
        MotionSequence(skeleton=sk, frames=np.zeros((3, 6)), fps=0.0)
    with pytest.raises(ValueError):
        MotionSequence(skeleton=sk, frames=np.zeros((3, 6)), fps=25.0,
                       label="has space")


def test_parse_minimal_zero_file(tmp_path):
    path = tmp_path / "zeros.txt"
    path.write_text("4 6 25\n" + "\n".join(["0 0 0 0 0 0"] * 4) + "\n")
    seq = load_motion(path)
    assert seq.length == 4 and seq.pose_dim == 6
    assert seq.fps == 25.0 and seq.label is None
    assert np.array_equal(seq.frames, np.zeros((4, 6)))


def test_parse_single_frame_with_label(tmp_path):
    path = tmp_path / "one.txt"
    path.write_text("1 3 30.0 walk\n1.5 -2.25 0.0\n")
    seq = load_motion(path)
    assert seq.label == "walk"
    assert np.array_equal(seq.frames, np.array([[1.5, -2.25, 0.0]]))


def test_parse_errors_name_the_line(tmp_path):
    bad_row = tmp_path / "badrow.txt"
    bad_row.write_text("2 3 25\n0 0 0\n1 2\n")
    with pytest.raises(MotionParseError, match="line 3"):
        load_motion(bad_row)

    bad_value = tmp_path / "badval.txt"
    bad_value.write_text("1 3 25\n0 x 0\n")
    with pytest.raises(MotionParseError, match="line 2"):
        load_motion(bad_value)

    bad_count = tmp_path / "count.txt"
    bad_count.write_text("3 3 25\n0 0 0\n")
    with pytest.raises(MotionParseError, match="3 frames"):
        load_motion(bad_count)

    with pytest.raises(MotionParseError, match="line 1"):
        path = tmp_path / "header.txt"
        path.write_text("not a header at all here\n")
        load_motion(path)

    empty = tmp_path / "empty.txt"
    empty.write_text("")
    with pytest.raises(MotionParseError):
        load_motion(empty)

    inf = tmp_path / "inf.txt"
    inf.write_text("1 3 25\n0 inf 0\n")
    with pytest.raises(MotionParseError, match="non-finite"):
        load_motion(inf)


def test_skeleton_mismatch_on_load(tmp_path):
    path = tmp_path / "k6.txt"
    path.write_text("1 6 25\n0 0 0 0 0 0\n")
    with pytest.raises(MotionParseError, match="K=6"):
        load_motion(path, skeleton=chain_skeleton(3))


def test_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(7)
    for case in range(25):
        joints = int(rng.integers(2, 23))
        length = int(rng.integers(1, 120))
        frames = rng.standard_normal((length, joints * 3)) * 10.0 ** rng.integers(-3, 4)
        seq = MotionSequence(
            skeleton=chain_skeleton(joints), frames=frames,
            fps=float(rng.choice([12.5, 25.0, 30.0, 50.0])),
            label=None if case % 3 else f"case{case}",
        )
        path = tmp_path / f"seq_{case}.txt"
        save_motion(seq, path)
        back = load_motion(path)
        assert np.array_equal(back.frames, seq.frames)
        assert back.fps == seq.fps and back.label == seq.label


def test_header_omits_label_when_absent(tmp_path):
    seq = MotionSequence(skeleton=chain_skeleton(2), frames=np.zeros((1, 6)),
                        fps=25.0)
    path = tmp_path / "nolabel.txt"
    save_motion(seq, path)
    assert path.read_text().splitlines()[0] == "1 6 25.0"


def test_wide_round_trip(tmp_path):
    # H36M-style width: 22 joints, 100 frames.
    rng = np.random.default_rng(0)
    seq = MotionSequence(skeleton=chain_skeleton(22),
                         frames=rng.standard_normal((100, 66)) * 1000.0,
                         fps=50.0, label="wide")
    path = tmp_path / "wide.txt"
    save_motion(seq, path)
    assert np.array_equal(load_motion(path).frames, seq.frames)


# --- synthetic generator ---


def two_joint_skeleton(length=2.0):
    return SkeletonSpec(joint_count=2, dims_per_joint=3,
                        joint_names=["root", "tip"], edges=[(0, 1)],
                        bone_lengths=[length])


def test_generator_is_deterministic():
    cfg = SyntheticConfig(seed=42)
    a = generate_synthetic(cfg)
    b = generate_synthetic(cfg)
    assert np.array_equal(a.frames, b.frames)
    assert not np.array_equal(a.frames, generate_synthetic(SyntheticConfig(seed=43)).frames)


def test_zero_frequency_means_constant_pose():
    cfg = SyntheticConfig(length=30, base_frequencies=0.0, frequency_jitter=0.0)
    frames = generate_synthetic(cfg).frames
    assert np.array_equal(frames, np.tile(frames[0], (30, 1)))


def test_two_joint_closed_form():
    """Single z-hinge: tip must sit at root + Rz(theta) applied to the bone."""
    amp, phase, freq, fps, bone = 0.7, 0.3, 2.0, 25.0, 2.0
    cfg = SyntheticConfig(
        skeleton=two_joint_skeleton(bone), length=40, seed=5,
        base_frequencies=freq, frequency_jitter=0.0,
        amplitudes=[0.0, amp], phases=[0.0, phase], fps=fps,
    )
    frames = generate_synthetic(cfg).frames
    t = np.arange(40)
    theta = amp * np.sin(freq * t / fps + phase)
    expected_tip = np.stack(
        [bone * np.cos(theta), bone * np.sin(theta), np.zeros(40)], axis=1
    )
    assert np.allclose(frames[:, 0:3], 0.0, atol=0)
    assert np.allclose(frames[:, 3:6], expected_tip, atol=1e-12)


def test_joint_depths_alternate_axes():
    assert joint_depths(default_skeleton()) == [0, 1, 2, 1, 2]


def test_bone_lengths_preserved():
    sk = default_skeleton()
    for seed in range(5):
        frames = generate_synthetic(SyntheticConfig(seed=seed, length=60)).frames
        pos = frames.reshape(-1, sk.joint_count, 3)
        for (parent, child), bone in zip(sk.edges, sk.bone_lengths):
            dist = np.linalg.norm(pos[:, child] - pos[:, parent], axis=1)
            assert np.allclose(dist, bone, rtol=1e-9)


def test_drift_mode_moves_root_linearly():
    frames = generate_synthetic(SyntheticConfig(seed=3, length=50,
                                                motion_mode="drift")).frames
    root = frames[:, 0:3]
    steps = np.diff(root, axis=0)
    assert np.allclose(steps, steps[0], atol=1e-12)
    assert np.array_equal(root[0], np.zeros(3))
    assert not np.allclose(root[-1], 0.0)


def test_periodic_root_stays_at_origin():
    frames = generate_synthetic(SyntheticConfig(seed=3, length=50)).frames
    assert np.array_equal(frames[:, 0:3], np.zeros((50, 3)))


def test_transition_agrees_with_periodic_before_the_switch():
    base = dict(seed=11, length=80, frequency_jitter=0.2)
    periodic = generate_synthetic(SyntheticConfig(**base)).frames
    switched = generate_synthetic(SyntheticConfig(
        motion_mode="transition", transition_frame=40, **base)).frames
    assert np.array_equal(switched[:40], periodic[:40])
    assert not np.array_equal(switched[45:], periodic[45:])


def test_jitter_changes_the_rhythm():
    quiet = generate_synthetic(SyntheticConfig(seed=2, frequency_jitter=0.0))
    noisy = generate_synthetic(SyntheticConfig(seed=2, frequency_jitter=0.3))
    assert not np.array_equal(quiet.frames, noisy.frames)


def test_config_validation():
    with pytest.raises(SyntheticConfigError):
        SyntheticConfig(length=0)
    with pytest.raises(SyntheticConfigError):
        SyntheticConfig(frequency_jitter=1.0)
    with pytest.raises(SyntheticConfigError):
        SyntheticConfig(motion_mode="gallop")
    with pytest.raises(SyntheticConfigError):
        SyntheticConfig(motion_mode="transition")  # needs a switch frame
    with pytest.raises(SyntheticConfigError):
        SyntheticConfig(motion_mode="transition", length=60, transition_frame=58)
    with pytest.raises(SyntheticConfigError):
        SyntheticConfig(transition_frame=10)  # periodic mode
    with pytest.raises(SyntheticConfigError):
        generate_synthetic(SyntheticConfig(base_frequencies=[1.0, 2.0]))
    with pytest.raises(SyntheticConfigError):
        SyntheticConfig(skeleton=chain_skeleton(3))  # no bone lengths


def test_label_propagates():
    seq = generate_synthetic(SyntheticConfig(seed=0, length=10, label="warmup"))
    assert seq.label == "warmup"
