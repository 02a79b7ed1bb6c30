"""Synthetic kinematic-chain motion for desk-scale experiments.

Joint angles follow per-joint sinusoids driven through forward kinematics
over the skeleton tree, so bone lengths are preserved exactly. Three modes:

- ``periodic``: pure sinusoidal joint angles, root fixed at the origin.
- ``drift``: periodic limbs plus a linear root translation.
- ``transition``: two sinusoid parameter sets blended linearly over 5
  frames at ``transition_frame`` (an action-change analog).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .motion import MotionSequence
from .skeleton import SkeletonSpec, default_skeleton

MOTION_MODES = ("periodic", "drift", "transition")
TRANSITION_BLEND_FRAMES = 5


class SyntheticConfigError(ValueError):
    """Raised for inconsistent generator configuration."""


@dataclass
class SyntheticConfig:
    """Deterministic recipe for one synthetic sequence.

    ``base_frequencies`` holds one angular frequency per joint (the root
    entry is ignored); a scalar applies to every joint. Amplitudes and
    phases default to seeded draws but can be pinned for closed-form
    checks.
    """

    skeleton: SkeletonSpec = field(default_factory=default_skeleton)
    length: int = 120
    seed: int = 0
    motion_mode: str = "periodic"
    base_frequencies: float | list[float] = 3.0
    frequency_jitter: float = 0.3
    transition_frame: int | None = None
    fps: float = 25.0
    amplitudes: list[float] | None = None
    phases: list[float] | None = None
    label: str | None = None

    def __post_init__(self):
        if self.length < 1:
            raise SyntheticConfigError(f"length must be positive, got {self.length}")
        if not 0.0 <= self.frequency_jitter < 1.0:
            raise SyntheticConfigError(
                f"frequency_jitter must be in [0, 1), got {self.frequency_jitter}"
            )
        if self.motion_mode not in MOTION_MODES:
            raise SyntheticConfigError(
                f"motion_mode must be one of {MOTION_MODES}, got {self.motion_mode!r}"
            )
        if self.skeleton.dims_per_joint != 3:
            raise SyntheticConfigError("the generator produces 3D coordinates only")
        if self.skeleton.bone_lengths is None:
            raise SyntheticConfigError("skeleton must carry bone lengths")
        if self.motion_mode == "transition":
            if self.transition_frame is None:
                raise SyntheticConfigError("transition mode requires transition_frame")
            lo, hi = 1, self.length - TRANSITION_BLEND_FRAMES
            if not lo <= self.transition_frame <= hi:
                raise SyntheticConfigError(
                    f"transition_frame {self.transition_frame} outside [{lo}, {hi}] "
                    f"for length {self.length}"
                )
        elif self.transition_frame is not None:
            raise SyntheticConfigError(
                "transition_frame is only meaningful in transition mode"
            )

    def frequencies(self) -> np.ndarray:
        J = self.skeleton.joint_count
        if np.isscalar(self.base_frequencies):
            return np.full(J, float(self.base_frequencies))
        freqs = np.asarray(self.base_frequencies, dtype=np.float64)
        if freqs.shape != (J,):
            raise SyntheticConfigError(
                f"base_frequencies must be scalar or length {J}, got shape {freqs.shape}"
            )
        return freqs


def _rotation_matrices(axis: str, angles: np.ndarray) -> np.ndarray:
    """Stack of rotation matrices about a coordinate axis, one per angle."""
    c, s = np.cos(angles), np.sin(angles)
    n = angles.shape[0]
    R = np.zeros((n, 3, 3), dtype=np.float64)
    if axis == "z":
        R[:, 0, 0], R[:, 0, 1] = c, -s
        R[:, 1, 0], R[:, 1, 1] = s, c
        R[:, 2, 2] = 1.0
    elif axis == "y":
        R[:, 0, 0], R[:, 0, 2] = c, s
        R[:, 2, 0], R[:, 2, 2] = -s, c
        R[:, 1, 1] = 1.0
    else:
        raise ValueError(f"unsupported rotation axis {axis!r}")
    return R


def joint_depths(skeleton: SkeletonSpec) -> list[int]:
    """Hops from the root per joint (root = 0)."""
    parents = skeleton.parent_of()
    depths = [0] * skeleton.joint_count
    for j in range(1, skeleton.joint_count):
        d, node = 0, j
        while node != 0:
            node = parents[node]
            d += 1
        depths[j] = d
    return depths


def _joint_angles(cfg: SyntheticConfig, rng: np.random.Generator) -> np.ndarray:
    """(L, J) joint angles over time for the configured mode."""
    J = cfg.skeleton.joint_count
    t = np.arange(cfg.length, dtype=np.float64)[:, None]  # (L, 1)
    freqs = cfg.frequencies()[None, :]
    if cfg.frequency_jitter > 0:
        # Per-joint jitter makes each sequence's rhythm its own, so a short
        # observation window under-determines the dynamics.
        j = cfg.frequency_jitter
        freqs = freqs * rng.uniform(1.0 - j, 1.0 + j, size=J)[None, :]

    amps = cfg.amplitudes
    amps = rng.uniform(0.3, 1.0, size=J) if amps is None else np.asarray(amps, float)
    phases = cfg.phases
    phases = rng.uniform(0.0, 2 * np.pi, size=J) if phases is None else np.asarray(phases, float)
    if amps.shape != (J,) or phases.shape != (J,):
        raise SyntheticConfigError(f"amplitudes/phases must have length {J}")

    theta = amps[None, :] * np.sin(freqs * t / cfg.fps + phases[None, :])
    if cfg.motion_mode != "transition":
        return theta

    # Second regime: retuned frequencies, fresh amplitudes and phases. The
    # retune stays moderate so the new action is different but still in
    # the same dynamical family, like a person switching gaits.
    freqs2 = freqs * rng.uniform(0.75, 1.25, size=J)[None, :]
    amps2 = rng.uniform(0.3, 1.0, size=J)
    phases2 = rng.uniform(0.0, 2 * np.pi, size=J)
    theta2 = amps2[None, :] * np.sin(freqs2 * t / cfg.fps + phases2[None, :])

    tf = cfg.transition_frame - 1  # 0-based first blend frame
    w = np.clip((t - tf) / (TRANSITION_BLEND_FRAMES - 1), 0.0, 1.0)
    return (1.0 - w) * theta + w * theta2


def generate_synthetic(cfg: SyntheticConfig) -> MotionSequence:
    """Deterministically generate one sequence from ``cfg``."""
    rng = np.random.default_rng(cfg.seed)
    skeleton = cfg.skeleton
    J, L = skeleton.joint_count, cfg.length
    theta = _joint_angles(cfg, rng)
    depths = joint_depths(skeleton)
    parents = skeleton.parent_of()
    lengths = {child: skeleton.bone_lengths[i] for i, (_, child) in enumerate(skeleton.edges)}

    root_path = np.zeros((L, 3), dtype=np.float64)
    if cfg.motion_mode == "drift":
        velocity = rng.uniform(-0.02, 0.02, size=3)
        root_path = np.arange(L, dtype=np.float64)[:, None] * velocity[None, :]

    rest = np.array([1.0, 0.0, 0.0])
    rotations = np.empty((J, L, 3, 3), dtype=np.float64)
    positions = np.empty((J, L, 3), dtype=np.float64)
    rotations[0] = np.eye(3)[None, :, :]
    positions[0] = root_path
    # Children appear after parents in edge order, so one pass suffices.
    for _, child in skeleton.edges:
        axis = "z" if depths[child] % 2 == 1 else "y"
        local = _rotation_matrices(axis, theta[:, child])
        parent = parents[child]
        rotations[child] = np.einsum("lij,ljk->lik", rotations[parent], local)
        offset = rotations[child] @ (rest * lengths[child])
        positions[child] = positions[parent] + offset

    frames = positions.transpose(1, 0, 2).reshape(L, J * 3)
    return MotionSequence(skeleton=skeleton, frames=frames, fps=cfg.fps, label=cfg.label)
