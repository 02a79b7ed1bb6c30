"""Round-structured resampling of pose sequences.

A round is a window of N observed plus T future frames. Consecutive
rounds advance by exactly T frames, so the last T observed frames of
round r coincide with the ground-truth future of round r-1. That overlap
is what makes deviation feedback well defined.

Documentation uses the 1-based round and frame numbering of the problem
statement; array indices are 0-based and converted only at this module's
boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .motion import MotionSequence


class RoundLayoutError(ValueError):
    """Raised when a layout is internally inconsistent or does not fit."""


@dataclass(frozen=True)
class RoundLayout:
    """Window geometry shared by training and rollout.

    ``n_observed`` frames are visible per round and ``n_predicted`` are to
    be forecast. The constraint n_observed >= n_predicted guarantees each
    round's observation fully contains the previous round's target.
    """

    n_observed: int
    n_predicted: int

    def __post_init__(self):
        if self.n_predicted < 1:
            raise RoundLayoutError(f"n_predicted must be >= 1, got {self.n_predicted}")
        if self.n_observed < self.n_predicted:
            raise RoundLayoutError(
                f"n_observed ({self.n_observed}) must be >= n_predicted "
                f"({self.n_predicted}) so predictions stay inside the next observation"
            )

    @property
    def round_length(self) -> int:
        return self.n_observed + self.n_predicted

    def frames_needed(self, rounds: int) -> int:
        """Sequence length required to host ``rounds`` consecutive rounds."""
        if rounds < 1:
            raise RoundLayoutError(f"rounds must be >= 1, got {rounds}")
        return self.n_observed + rounds * self.n_predicted

    def rounds_available(self, length: int) -> int:
        """How many consecutive rounds fit in a sequence of ``length`` frames."""
        return (length - self.n_observed) // self.n_predicted


@dataclass(frozen=True)
class RoundSample:
    """One round's slice of a sequence: observed (N, K) and future (T, K)."""

    observed: np.ndarray
    future: np.ndarray
    round_index: int  # 1-based
    source_id: str | None = None

    def __post_init__(self):
        if self.observed.ndim != 2 or self.future.ndim != 2:
            raise RoundLayoutError("round arrays must be 2D (frames, pose_dim)")
        if self.observed.shape[1] != self.future.shape[1]:
            raise RoundLayoutError(
                f"observed width {self.observed.shape[1]} != future width "
                f"{self.future.shape[1]}"
            )
        if not 1 <= self.future.shape[0] <= self.observed.shape[0]:
            raise RoundLayoutError(
                f"need observed rows >= future rows >= 1, got "
                f"{self.observed.shape[0]} and {self.future.shape[0]}"
            )
        if self.round_index < 1:
            raise RoundLayoutError(f"round_index must be >= 1, got {self.round_index}")

    @property
    def observed_tail(self) -> np.ndarray:
        """Last T observed frames, the overlap with the prior round's future."""
        return self.observed[-self.future.shape[0]:]


def extract_rounds(seq: MotionSequence, layout: RoundLayout,
                   max_rounds: int | str = "all",
                   start: int = 0) -> list[RoundSample]:
    """Slice consecutive rounds out of ``seq`` beginning at frame ``start``.

    Round r covers source frames 1+(r-1)T .. N+T+(r-1)T relative to
    ``start``; the count is min(max_rounds, floor((L-N)/T)), or everything
    that fits when ``max_rounds="all"``. A sequence too short for even one
    round is an error.
    """
    if start < 0:
        raise RoundLayoutError(f"start must be >= 0, got {start}")
    available = layout.rounds_available(seq.length - start)
    if available < 1:
        raise RoundLayoutError(
            f"sequence of length {seq.length} fits no rounds with "
            f"N={layout.n_observed}, T={layout.n_predicted} from frame {start}"
        )
    if max_rounds == "all":
        rounds = available
    else:
        if not isinstance(max_rounds, int) or max_rounds < 1:
            raise RoundLayoutError(
                f'max_rounds must be a positive integer or "all", got {max_rounds!r}'
            )
        rounds = min(max_rounds, available)

    N, T = layout.n_observed, layout.n_predicted
    out = []
    for r in range(1, rounds + 1):
        lo = start + (r - 1) * T
        obs = seq.frames[lo:lo + N]
        fut = seq.frames[lo + N:lo + N + T]
        out.append(RoundSample(observed=obs.copy(), future=fut.copy(),
                               round_index=r, source_id=seq.label))
    return out


@dataclass(frozen=True)
class TrainSample:
    """Two adjacent rounds for loss computation.

    Holds round r-1 and round r of the same sequence, so a training step
    can predict the first round, form the deviation against the second
    round's observed tail, and predict the second round with feedback.
    """

    first: RoundSample
    second: RoundSample

    def __post_init__(self):
        if self.second.round_index != self.first.round_index + 1:
            raise RoundLayoutError(
                f"training rounds must be adjacent, got indices "
                f"{self.first.round_index} and {self.second.round_index}"
            )
        T = self.first.future.shape[0]
        if not np.array_equal(self.second.observed[-T:], self.first.future):
            raise RoundLayoutError(
                "round overlap violated: second round's observed tail must equal "
                "the first round's future frames"
            )


@dataclass(frozen=True)
class TestSample:
    """A consecutive-round sequence for rollout evaluation (>= 2 rounds)."""

    __test__ = False  # not a test case, despite the name

    rounds: tuple[RoundSample, ...]
    label: str | None = None

    def __post_init__(self):
        if len(self.rounds) < 2:
            raise RoundLayoutError("a test sample needs at least two rounds")
        for prev, cur in zip(self.rounds, self.rounds[1:]):
            if cur.round_index != prev.round_index + 1:
                raise RoundLayoutError("test sample rounds must be consecutive")


def make_train_samples(sequences: list[MotionSequence], layout: RoundLayout,
                       stride: int | None = None) -> list[TrainSample]:
    """Cut every sequence into two-round training pairs.

    A window of N+2T frames slides by ``stride`` (default T, which aligns
    pair starts with the round grid). Sequences too short for one window
    are skipped; an all-short input yields an empty list, and the caller
    decides whether that is fatal.
    """
    if stride is None:
        stride = layout.n_predicted
    if stride < 1:
        raise RoundLayoutError(f"stride must be >= 1, got {stride}")
    need = layout.frames_needed(2)
    samples = []
    for seq in sequences:
        for start in range(0, seq.length - need + 1, stride):
            first, second = extract_rounds(seq, layout, max_rounds=2, start=start)
            samples.append(TrainSample(first=first, second=second))
    return samples


def make_test_samples(sequences: list[MotionSequence], layout: RoundLayout,
                      max_r: int) -> list[TestSample]:
    """Cut non-overlapping ``max_r``-round rollout samples from each sequence.

    Consecutive samples from one sequence share no frames, keeping their
    error statistics independent. Sequences shorter than N + max_r*T
    frames are skipped.
    """
    if max_r < 2:
        raise RoundLayoutError(f"max_r must be >= 2, got {max_r}")
    window = layout.frames_needed(max_r)
    samples = []
    for seq in sequences:
        start = 0
        while start + window <= seq.length:
            rounds = extract_rounds(seq, layout, max_rounds=max_r, start=start)
            samples.append(TestSample(rounds=tuple(rounds), label=seq.label))
            start += window
    return samples
