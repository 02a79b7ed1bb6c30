"""Multi-round consecutive evaluation.

A rollout walks a test sample round by round. Observations are always
ground truth; what carries over between rounds is the model's own
previous prediction, compared against the newly observed frames to form
the deviation. ``deviation_off`` is the matched control that bypasses
the branch at every round, so on/off differences isolate the feedback
signal.

Reported errors are mean per-joint position errors at chosen testpoint
frames, aggregated per round across samples. Units follow the data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import torch

from .deviation import Deviation, compute_deviation
from .rounds import TestSample
from .skeleton import SkeletonSpec

MODES = ("deviation_on", "deviation_off")


class RolloutError(ValueError):
    """Raised for invalid rollout configuration or inputs."""


def mpjpe(pred: np.ndarray, gt: np.ndarray, skeleton: SkeletonSpec,
          frame: int) -> float:
    """Mean over joints of the position error norm at a 1-based frame."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 2:
        raise RolloutError(f"need matching (T, K) arrays, got {pred.shape} vs {gt.shape}")
    if pred.shape[1] != skeleton.pose_dim:
        raise RolloutError(
            f"pose width {pred.shape[1]} does not match skeleton K={skeleton.pose_dim}"
        )
    if not 1 <= frame <= pred.shape[0]:
        raise RolloutError(f"frame {frame} outside 1..{pred.shape[0]}")
    diff = (pred[frame - 1] - gt[frame - 1]).reshape(
        skeleton.joint_count, skeleton.dims_per_joint
    )
    return float(np.mean(np.linalg.norm(diff, axis=1)))


@dataclass(frozen=True)
class RolloutResult:
    """One sample's rollout: a prediction per round plus the deviations fed.

    ``deviations[r-1]`` is what round r consumed: None for round 1 and for
    every round in deviation_off mode.
    """

    predictions: tuple[np.ndarray, ...]
    deviations: tuple[Deviation | None, ...]


def rollout_sample(predictor, sample: TestSample, mode: str) -> RolloutResult:
    """Predict every round of ``sample`` sequentially.

    ``predictor`` needs only a ``predict_numpy(observed, deviation)``
    method. In deviation_on mode, round r >= 2 receives the velocity
    difference between round r's ground-truth observation tail and the
    predictor's own round r-1 output.
    """
    if mode not in MODES:
        raise RolloutError(f"mode must be one of {MODES}, got {mode!r}")
    if len(sample.rounds) < 2:
        raise RolloutError("rollout needs at least 2 rounds")

    predictions: list[np.ndarray] = []
    deviations: list[Deviation | None] = []
    for r, round_sample in enumerate(sample.rounds, start=1):
        if mode == "deviation_on" and r >= 2:
            dev = compute_deviation(round_sample.observed_tail,
                                    predictions[-1], round_origin=r - 1)
        else:
            dev = None
        deviations.append(dev)
        values = None if dev is None else dev.values
        predictions.append(predictor.predict_numpy(round_sample.observed, values))
    return RolloutResult(predictions=tuple(predictions), deviations=tuple(deviations))


@dataclass(frozen=True)
class RolloutReport:
    """Per-round testpoint errors averaged over samples."""

    mode: str
    n_samples: int
    per_round_mpjpe: dict[int, list[tuple[int, float]]]
    per_round_avg: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        rounds = sorted(self.per_round_mpjpe)
        if rounds != list(range(1, len(rounds) + 1)):
            raise RolloutError(f"rounds must cover 1..max, got {rounds}")
        for r, entries in self.per_round_mpjpe.items():
            if any(value < 0 for _, value in entries):
                raise RolloutError(f"negative error in round {r}")
        if not self.per_round_avg:
            avg = {r: float(np.mean([v for _, v in entries]))
                   for r, entries in self.per_round_mpjpe.items()}
            object.__setattr__(self, "per_round_avg", avg)

    @property
    def rounds(self) -> list[int]:
        return sorted(self.per_round_mpjpe)


class OracleStub:
    """A predictor that answers with the ground-truth future.

    Built from the very samples it will be asked about, keyed on the
    observed frames' bytes. Used as a harness self-test: a perfect
    predictor must score zero everywhere.
    """

    def __init__(self, lookup: dict[bytes, np.ndarray]):
        self._lookup = lookup

    @classmethod
    def for_samples(cls, samples: list[TestSample]) -> "OracleStub":
        lookup = {}
        for sample in samples:
            for round_sample in sample.rounds:
                lookup[round_sample.observed.tobytes()] = round_sample.future
        return cls(lookup)

    def predict_numpy(self, observed: np.ndarray,
                      deviation: np.ndarray | None = None) -> np.ndarray:
        key = np.asarray(observed, dtype=np.float64).tobytes()
        try:
            return self._lookup[key].copy()
        except KeyError:
            raise RolloutError("oracle stub asked about an unknown observation")


def evaluate(predictor, samples: list[TestSample], testpoints: list[int],
             mode: str, skeleton: SkeletonSpec) -> RolloutReport:
    """Mean testpoint errors per round across ``samples``.

    All samples must expose the same number of rounds so per-round means
    average over the full population.
    """
    if not samples:
        raise RolloutError("cannot evaluate an empty sample list")
    n_rounds = len(samples[0].rounds)
    if any(len(s.rounds) != n_rounds for s in samples):
        raise RolloutError("all samples must have the same round count")
    horizon = samples[0].rounds[0].future.shape[0]
    for frame in testpoints:
        if not 1 <= frame <= horizon:
            raise RolloutError(f"testpoint {frame} outside 1..{horizon}")

    torch.set_num_threads(1)
    per_round: dict[int, dict[int, list[float]]] = {
        r: {frame: [] for frame in testpoints} for r in range(1, n_rounds + 1)
    }
    for sample in samples:
        result = rollout_sample(predictor, sample, mode)
        for r, round_sample in enumerate(sample.rounds, start=1):
            for frame in testpoints:
                per_round[r][frame].append(
                    mpjpe(result.predictions[r - 1], round_sample.future,
                          skeleton, frame)
                )
    per_round_mpjpe = {
        r: [(frame, float(np.mean(values[frame]))) for frame in testpoints]
        for r, values in per_round.items()
    }
    return RolloutReport(mode=mode, n_samples=len(samples),
                         per_round_mpjpe=per_round_mpjpe)


@dataclass(frozen=True)
class ModeComparison:
    """Paired on/off reports plus per-round relative improvement."""

    deviation_on: RolloutReport
    deviation_off: RolloutReport
    improvement: dict[int, float]

    def mean_improvement(self, rounds: list[int]) -> float:
        return float(np.mean([self.improvement[r] for r in rounds]))


def compare_modes(bundle, samples: list[TestSample], testpoints: list[int],
                  skeleton: SkeletonSpec) -> ModeComparison:
    """Run both modes on identical samples and relate their round averages.

    Improvement at round r is (off - on) / off, positive when feedback
    helps; rounds where the control is exactly zero report 0.
    """
    if getattr(bundle, "config", None) is None or bundle.config.feedback is None:
        raise RolloutError("compare_modes needs a bundle with a deviation branch")
    on = evaluate(bundle, samples, testpoints, "deviation_on", skeleton)
    off = evaluate(bundle, samples, testpoints, "deviation_off", skeleton)
    improvement = {}
    for r in on.rounds:
        off_avg = off.per_round_avg[r]
        on_avg = on.per_round_avg[r]
        improvement[r] = 0.0 if off_avg == 0 else (off_avg - on_avg) / off_avg
    return ModeComparison(deviation_on=on, deviation_off=off,
                          improvement=improvement)


def write_report_csv(groups: list[tuple[str, RolloutReport]], path) -> None:
    """Emit grouped reports as CSV with one row per testpoint per round."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["mode", "group_label", "round", "testpoint_frame",
                         "mpjpe", "n_samples"])
        for label, report in groups:
            for r in report.rounds:
                for frame, value in report.per_round_mpjpe[r]:
                    writer.writerow([report.mode, label, r, frame, repr(value),
                                     report.n_samples])


def write_plot_csv(on: RolloutReport, off: RolloutReport, path) -> None:
    """Round-by-round averages for both modes, for external plotting."""
    if on.rounds != off.rounds:
        raise RolloutError("plot data needs matching round sets")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["round", "deviation_on", "deviation_off"])
        for r in on.rounds:
            writer.writerow([r, repr(on.per_round_avg[r]), repr(off.per_round_avg[r])])
