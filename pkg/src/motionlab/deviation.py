"""Deviation between what was predicted and what actually happened.

After round r-1's prediction, the next round's observation reveals the
true frames for the same interval. The deviation is the difference of
their velocity profiles (frame-to-frame differences), capturing how the
motion's dynamics departed from the forecast while ignoring any shared
positional offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DeviationError(ValueError):
    """Raised for shape or bookkeeping mismatches in deviation inputs."""


def velocity(frames: np.ndarray) -> np.ndarray:
    """Frame-to-frame differences: (T, K) -> (T-1, K)."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] < 2:
        raise DeviationError(
            f"velocity needs a (T, K) array with T >= 2, got shape {frames.shape}"
        )
    return np.diff(frames, axis=0)


@dataclass(frozen=True)
class Deviation:
    """Velocity-space error signal of shape (T-1, K).

    ``round_origin`` records the 1-based round whose prediction produced
    this signal; the round consuming it is round_origin + 1. A zero array
    with round_origin=0 is the round-1 convention (nothing to compare yet).
    """

    values: np.ndarray
    round_origin: int

    def __post_init__(self):
        if self.values.ndim != 2:
            raise DeviationError(f"deviation must be 2D, got shape {self.values.shape}")
        if self.round_origin < 0:
            raise DeviationError(f"round_origin must be >= 0, got {self.round_origin}")

    @property
    def is_zero_convention(self) -> bool:
        return self.round_origin == 0


def compute_deviation(observed_tail: np.ndarray, previous_prediction: np.ndarray,
                      round_origin: int = 1) -> Deviation:
    """Velocity of the realized frames minus velocity of the prediction.

    Both inputs cover the same T frames: the previous round's prediction
    and the current round's last T observed frames.
    """
    observed_tail = np.asarray(observed_tail, dtype=np.float64)
    previous_prediction = np.asarray(previous_prediction, dtype=np.float64)
    if observed_tail.shape != previous_prediction.shape:
        raise DeviationError(
            f"observed tail {observed_tail.shape} and previous prediction "
            f"{previous_prediction.shape} must share a shape"
        )
    if round_origin < 1:
        raise DeviationError(f"round_origin must be >= 1 here, got {round_origin}")
    values = velocity(observed_tail) - velocity(previous_prediction)
    return Deviation(values=values, round_origin=round_origin)


def zero_deviation(n_predicted: int, pose_dim: int) -> Deviation:
    """The round-1 stand-in: an all-zero (T-1, K) signal."""
    if n_predicted < 2:
        raise DeviationError(f"n_predicted must be >= 2, got {n_predicted}")
    return Deviation(values=np.zeros((n_predicted - 1, pose_dim)), round_origin=0)
