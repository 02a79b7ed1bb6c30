"""Two-round joint training.

A training sample is a pair of adjacent rounds. The first round is
predicted with the deviation branch bypassed; its prediction is compared
against the second round's observation tail to form the deviation, which
then feeds the second round's prediction. Both rounds contribute equally
to the loss, and by default gradients flow through the first prediction
into the deviation path.

The per-round loss is the mean over predicted frames of the Euclidean
norm of the full pose-vector error. This is deliberately distinct from
the per-joint evaluation metric in the rollout module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .nets.bundle import PredictorBundle
from .rounds import RoundSample, TrainSample
from .skeleton import SkeletonSpec, skeleton_for_pose_dim

BASELINE_LEARNING_RATES = {"mixer": 0.01, "dct_gcn": 0.0005}


class TrainingError(RuntimeError):
    """Raised when training cannot proceed (for example non-finite loss)."""


@dataclass
class TrainConfig:
    """Optimizer loop settings.

    ``learning_rate=None`` resolves to the per-baseline default (0.01 for
    mixer, 0.0005 for dct_gcn). Shuffling and any other training-side
    randomness derive from ``seed`` alone. ``center_on_root`` translates
    each sample so the root joint of the first round's last observed
    frame sits at the origin. ``detach_deviation`` blocks gradient flow
    from the second round back through the first prediction; the default
    keeps the path differentiable end to end.
    """

    learning_rate: float | None = None
    epochs: int = 50
    batch_size: int = 32
    seed: int = 0
    center_on_root: bool = True
    detach_deviation: bool = False

    def __post_init__(self):
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")

    def resolve_learning_rate(self, baseline: str) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return BASELINE_LEARNING_RATES[baseline]


@dataclass(frozen=True)
class LossBreakdown:
    """Per-round losses; total is their exact sum."""

    loss_round1: float
    loss_round2: float

    @property
    def total(self) -> float:
        return self.loss_round1 + self.loss_round2


def round_loss(pred: np.ndarray, gt: np.ndarray, skeleton: SkeletonSpec) -> float:
    """Mean over frames of the Euclidean norm of the pose-vector error."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 2:
        raise ValueError(f"need matching (T, K) arrays, got {pred.shape} vs {gt.shape}")
    if pred.shape[1] != skeleton.pose_dim:
        raise ValueError(
            f"pose width {pred.shape[1]} does not match skeleton K={skeleton.pose_dim}"
        )
    return float(np.mean(np.linalg.norm(pred - gt, axis=1)))


def _per_sample_round_loss(pred: torch.Tensor, gt: torch.Tensor) -> torch.Tensor:
    """(B, T, K) pairs -> (B,) per-sample losses."""
    return torch.linalg.vector_norm(pred - gt, dim=2).mean(dim=1)


def _stack(rounds: list[RoundSample], attr: str) -> torch.Tensor:
    arrays = [getattr(r, attr) for r in rounds]
    return torch.from_numpy(np.stack(arrays).astype(np.float64))


def batch_losses(bundle: PredictorBundle, samples: list[TrainSample],
                 detach_deviation: bool = False) -> tuple[torch.Tensor, torch.Tensor]:
    """Differentiable (B,) per-sample losses for both rounds of each pair.

    Round 1 runs with the branch bypassed; the deviation for round 2 is
    the velocity difference between round 2's observation tail and the
    round-1 prediction, built inside the graph so training sees the full
    feedback path.
    """
    obs1 = _stack([s.first for s in samples], "observed")
    fut1 = _stack([s.first for s in samples], "future")
    obs2 = _stack([s.second for s in samples], "observed")
    fut2 = _stack([s.second for s in samples], "future")
    T = fut1.shape[1]

    pred1 = bundle.predict_round(obs1)
    loss1 = _per_sample_round_loss(pred1, fut1)

    previous = pred1.detach() if detach_deviation else pred1
    tail = obs2[:, -T:, :]
    deviation = torch.diff(tail, dim=1) - torch.diff(previous, dim=1)
    pred2 = bundle.predict_round(obs2, deviation)
    loss2 = _per_sample_round_loss(pred2, fut2)
    return loss1, loss2


def train_sample_loss(bundle: PredictorBundle, sample: TrainSample,
                      skeleton: SkeletonSpec,
                      detach_deviation: bool = False) -> LossBreakdown:
    """Evaluate (without updating) the two-round loss on one sample."""
    if sample.first.observed.shape[1] != skeleton.pose_dim:
        raise ValueError(
            f"sample width {sample.first.observed.shape[1]} does not match "
            f"skeleton K={skeleton.pose_dim}"
        )
    with torch.no_grad():
        loss1, loss2 = batch_losses(bundle, [sample], detach_deviation)
    return LossBreakdown(float(loss1[0]), float(loss2[0]))


def center_sample(sample: TrainSample, skeleton: SkeletonSpec) -> TrainSample:
    """Shift both rounds so round 1's last observed root sits at the origin."""
    d = skeleton.dims_per_joint
    root = sample.first.observed[-1, :d]
    offset = np.tile(root, skeleton.joint_count)

    def shift(r: RoundSample) -> RoundSample:
        return RoundSample(observed=r.observed - offset, future=r.future - offset,
                           round_index=r.round_index)

    return TrainSample(first=shift(sample.first), second=shift(sample.second))


def train(bundle: PredictorBundle, samples: list[TrainSample], cfg: TrainConfig,
          skeleton: SkeletonSpec | None = None,
          ) -> tuple[PredictorBundle, list[LossBreakdown]]:
    """Adam loop over shuffled minibatches; returns the bundle and history.

    History holds one LossBreakdown per epoch (mean per-sample losses).
    Deterministic for a given config and bundle: shuffling comes from
    ``cfg.seed`` and torch is pinned to one thread so reduction order is
    fixed.
    """
    if not samples:
        raise TrainingError("no training samples")
    if skeleton is None:
        skeleton = skeleton_for_pose_dim(bundle.config.pose_dim)
    if cfg.center_on_root:
        samples = [center_sample(s, skeleton) for s in samples]

    torch.set_num_threads(1)
    rng = np.random.default_rng(cfg.seed)
    lr = cfg.resolve_learning_rate(bundle.config.baseline)
    optimizer = torch.optim.Adam(bundle.parameters(), lr=lr)

    order = np.arange(len(samples))
    history: list[LossBreakdown] = []
    for epoch in range(1, cfg.epochs + 1):
        rng.shuffle(order)
        sum1 = sum2 = 0.0
        for b, lo in enumerate(range(0, len(order), cfg.batch_size)):
            batch = [samples[i] for i in order[lo:lo + cfg.batch_size]]
            loss1, loss2 = batch_losses(bundle, batch, cfg.detach_deviation)
            total = (loss1 + loss2).mean()
            if not torch.isfinite(total):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {b}: "
                    f"round1={loss1.mean().item()}, round2={loss2.mean().item()}"
                )
            optimizer.zero_grad()
            total.backward()
            optimizer.step()
            sum1 += loss1.detach().sum().item()
            sum2 += loss2.detach().sum().item()
        n = len(samples)
        history.append(LossBreakdown(sum1 / n, sum2 / n))
    return bundle, history


def gradient_check(bundle: PredictorBundle, sample: TrainSample,
                   n_coords: int = 20, step: float = 1e-5,
                   rng_seed: int = 0, detach_deviation: bool = False) -> float:
    """Max relative error between autograd and central finite differences.

    Samples ``n_coords`` scalar parameter coordinates across the whole
    bundle and compares d(total loss)/d(coordinate) both ways at float64.
    The relative error uses max(|analytic|, |numeric|, 1e-5) as the
    denominator: the floor keeps coordinates whose gradients sit at or
    below the finite-difference noise scale (about eps * |loss| / step,
     ~1e-11 here) from reporting noise as error, while any disagreement
    above 1e-9 absolute still registers.
    """

    def total_loss() -> torch.Tensor:
        loss1, loss2 = batch_losses(bundle, [sample], detach_deviation)
        return (loss1 + loss2).sum()

    params = [p for p in bundle.parameters() if p.requires_grad]
    sizes = [p.numel() for p in params]
    total_size = sum(sizes)
    rng = np.random.default_rng(rng_seed)
    flat_indices = rng.choice(total_size, size=min(n_coords, total_size),
                              replace=False)

    bundle.zero_grad()
    total_loss().backward()
    grads = [p.grad.detach().reshape(-1).clone() for p in params]
    offsets = np.cumsum([0] + sizes)

    worst = 0.0
    for flat in sorted(int(i) for i in flat_indices):
        which = int(np.searchsorted(offsets, flat, side="right") - 1)
        local = flat - offsets[which]
        param = params[which]
        with torch.no_grad():
            original = param.reshape(-1)[local].item()
            param.reshape(-1)[local] = original + step
            plus = total_loss().item()
            param.reshape(-1)[local] = original - step
            minus = total_loss().item()
            param.reshape(-1)[local] = original
        numeric = (plus - minus) / (2 * step)
        analytic = grads[which][local].item()
        denom = max(abs(analytic), abs(numeric), 1e-5)
        worst = max(worst, abs(analytic - numeric) / denom)
    return worst
