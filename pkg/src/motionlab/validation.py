"""Input validation helpers shared by the estimator facade."""

from __future__ import annotations

import numpy as np

from .motion import MotionSequence


def check_pose_array(arr, name: str = "X", n_frames: int | None = None,
                     pose_dim: int | None = None) -> np.ndarray:
    """Validate one (frames, pose_dim) array and return it as float64."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2D (frames, pose_dim), got shape {arr.shape}")
    if n_frames is not None and arr.shape[0] != n_frames:
        raise ValueError(f"{name} must have {n_frames} frames, got {arr.shape[0]}")
    if pose_dim is not None and arr.shape[1] != pose_dim:
        raise ValueError(
            f"{name} must have pose width {pose_dim}, got {arr.shape[1]}"
        )
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_sequence_list(X, name: str = "X", min_frames: int = 1,
                        pose_dim: int | None = None) -> list[np.ndarray]:
    """Validate a list of pose sequences sharing one pose width.

    Accepts raw arrays or MotionSequence objects; returns float64 arrays.
    """
    if isinstance(X, (np.ndarray, MotionSequence)):
        X = [X]
    if len(X) == 0:
        raise ValueError(f"{name} must contain at least one sequence")
    arrays = []
    for i, item in enumerate(X):
        frames = item.frames if isinstance(item, MotionSequence) else item
        arrays.append(check_pose_array(frames, name=f"{name}[{i}]",
                                       pose_dim=pose_dim))
    widths = {a.shape[1] for a in arrays}
    if len(widths) > 1:
        raise ValueError(f"{name} mixes pose widths {sorted(widths)}")
    short = min(a.shape[0] for a in arrays)
    if short < min_frames:
        raise ValueError(
            f"{name} has a sequence of {short} frames; need at least {min_frames}"
        )
    return arrays


def check_option(value, options, name: str):
    if value not in options:
        raise ValueError(f"{name} must be one of {tuple(options)}, got {value!r}")
    return value
