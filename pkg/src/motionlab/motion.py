"""Pose sequences and their on-disk text format.

File layout: line 1 is a header ``L K fps [label]`` (label optional, no
spaces); the next L lines carry K decimal numbers each. UTF-8, LF line
endings, full float precision so save/load round-trips bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .skeleton import SkeletonSpec, skeleton_for_pose_dim


class MotionParseError(ValueError):
    """Raised when a motion file does not match the expected format."""


@dataclass
class MotionSequence:
    """An L-frame pose sequence over a fixed skeleton.

    ``frames`` is an (L, K) float64 array, frame-major, with joints
    flattened joint 0 x,y,z, joint 1 x,y,z, ... Units are millimeters for
    real capture data and abstract length units for synthetic data.
    """

    skeleton: SkeletonSpec
    frames: np.ndarray
    fps: float
    label: str | None = None

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2:
            raise ValueError(f"frames must be 2D, got shape {self.frames.shape}")
        if self.frames.shape[0] < 1:
            raise ValueError("a motion sequence needs at least one frame")
        if self.frames.shape[1] != self.skeleton.pose_dim:
            raise ValueError(
                f"frame width {self.frames.shape[1]} does not match the "
                f"skeleton's pose dimension {self.skeleton.pose_dim}"
            )
        if not np.isfinite(self.frames).all():
            raise ValueError("frames contain non-finite values")
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if self.label is not None and any(c.isspace() for c in self.label):
            raise ValueError(f"label may not contain whitespace: {self.label!r}")

    @property
    def length(self) -> int:
        return self.frames.shape[0]

    @property
    def pose_dim(self) -> int:
        return self.frames.shape[1]


def load_motion(path: str | Path, skeleton: SkeletonSpec | None = None) -> MotionSequence:
    """Read a motion text file.

    The skeleton defaults to a placeholder chain inferred from K; pass one
    explicitly to keep topology metadata.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].strip():
        raise MotionParseError(f"{path}: line 1: empty or missing header")
    header = lines[0].split()
    if len(header) not in (3, 4):
        raise MotionParseError(
            f"{path}: line 1: header must be 'L K fps [label]', got {lines[0]!r}"
        )
    try:
        length = int(header[0])
        pose_dim = int(header[1])
        fps = float(header[2])
    except ValueError as exc:
        raise MotionParseError(f"{path}: line 1: bad header field: {exc}") from exc
    label = header[3] if len(header) == 4 else None
    if length < 1 or pose_dim < 1:
        raise MotionParseError(f"{path}: line 1: L and K must be positive")

    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != length:
        raise MotionParseError(
            f"{path}: header claims {length} frames but file has {len(body)} data rows"
        )
    frames = np.empty((length, pose_dim), dtype=np.float64)
    for i, line in enumerate(body):
        lineno = i + 2
        parts = line.split()
        if len(parts) != pose_dim:
            raise MotionParseError(
                f"{path}: line {lineno}: expected {pose_dim} values, got {len(parts)}"
            )
        try:
            row = np.array([float(p) for p in parts], dtype=np.float64)
        except ValueError as exc:
            raise MotionParseError(f"{path}: line {lineno}: {exc}") from exc
        if not np.isfinite(row).all():
            raise MotionParseError(f"{path}: line {lineno}: non-finite value")
        frames[i] = row

    if skeleton is None:
        skeleton = skeleton_for_pose_dim(pose_dim)
    elif skeleton.pose_dim != pose_dim:
        raise MotionParseError(
            f"{path}: header K={pose_dim} does not match skeleton K={skeleton.pose_dim}"
        )
    return MotionSequence(skeleton=skeleton, frames=frames, fps=fps, label=label)


def save_motion(seq: MotionSequence, path: str | Path) -> None:
    """Write ``seq`` so that load_motion reproduces it bit-exactly."""
    path = Path(path)
    header = f"{seq.length} {seq.pose_dim} {seq.fps!r}"
    if seq.label is not None:
        header += f" {seq.label}"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in seq.frames:
            fh.write(" ".join(repr(v) for v in row.tolist()) + "\n")
