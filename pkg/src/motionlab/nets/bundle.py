"""A baseline predictor bundled with an optional deviation branch.

The bundle fixes three seams:

- anchoring: the last observed pose is subtracted before encoding and
  added back after decoding, making every predictor translation
  equivariant and giving it the constant (zero-velocity) forecast as its
  trivial fallback;
- wiring: ``inserted`` adds the branch embedding to the encoder latent
  before decoding, ``corrective`` maps the branch straight to a (T, K)
  nudge on the finished prediction;
- determinism: construction runs under a seed derived from the config,
  so equal configs build bit-identical parameters.

Because branch projections start at zero, a fresh bundle predicts
bit-identically to its bare baseline regardless of the deviation fed in.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from .baselines import DctGcnBaseline, MixerBaseline
from .feedback import GruDeviationEncoder, MlpDeviationEncoder

BASELINE_KINDS = ("mixer", "dct_gcn")
FEEDBACK_KINDS = ("mlp", "gru")
WIRING_KINDS = ("inserted", "corrective")


class BundleConfigError(ValueError):
    """Raised for malformed bundle configurations."""


@dataclass(frozen=True)
class BundleConfig:
    """Everything needed to rebuild a predictor bit-for-bit."""

    n_observed: int
    n_predicted: int
    pose_dim: int
    baseline: str = "mixer"
    feedback: str | None = "mlp"
    wiring: str = "inserted"
    width: int = 64
    mixer_blocks: int = 2
    feature_dim: int = 32
    gcn_blocks: int = 3
    feedback_hidden: int = 64
    gru_hidden: int = 256
    init_seed: int = 0

    def __post_init__(self):
        if self.n_predicted < 1 or self.n_observed < self.n_predicted:
            raise BundleConfigError(
                f"need n_observed >= n_predicted >= 1, got "
                f"{self.n_observed}, {self.n_predicted}"
            )
        if self.pose_dim < 1:
            raise BundleConfigError(f"pose_dim must be positive, got {self.pose_dim}")
        if self.baseline not in BASELINE_KINDS:
            raise BundleConfigError(
                f"baseline must be one of {BASELINE_KINDS}, got {self.baseline!r}"
            )
        if self.feedback is not None and self.feedback not in FEEDBACK_KINDS:
            raise BundleConfigError(
                f"feedback must be None or one of {FEEDBACK_KINDS}, got {self.feedback!r}"
            )
        if self.wiring not in WIRING_KINDS:
            raise BundleConfigError(
                f"wiring must be one of {WIRING_KINDS}, got {self.wiring!r}"
            )
        if self.feedback is not None and self.n_predicted < 2:
            raise BundleConfigError(
                "a deviation branch needs n_predicted >= 2 for velocity rows"
            )

    def without_feedback(self) -> "BundleConfig":
        """The same config with the deviation branch removed."""
        fields = asdict(self)
        fields["feedback"] = None
        return BundleConfig(**fields)


def _build_baseline(config: BundleConfig) -> nn.Module:
    if config.baseline == "mixer":
        return MixerBaseline(
            config.n_observed, config.n_predicted, config.pose_dim,
            width=config.width, blocks=config.mixer_blocks,
        )
    return DctGcnBaseline(
        config.n_observed, config.n_predicted, config.pose_dim,
        feature_dim=config.feature_dim, blocks=config.gcn_blocks,
    )


def _build_feedback(config: BundleConfig, slot: tuple[int, int]) -> nn.Module:
    if config.feedback == "mlp":
        return MlpDeviationEncoder(
            config.n_predicted, config.pose_dim, slot,
            hidden_dim=config.feedback_hidden,
        )
    return GruDeviationEncoder(
        config.n_predicted, config.pose_dim, slot,
        hidden_size=config.gru_hidden,
    )


class PredictorBundle(nn.Module):
    """Anchored predictor with optional latent or output-space feedback.

    Construction reseeds torch's global RNG from ``config.init_seed``;
    parameters are float64 throughout.
    """

    def __init__(self, config: BundleConfig):
        super().__init__()
        self.config = config
        torch.manual_seed(config.init_seed)
        self.baseline = _build_baseline(config)
        if config.feedback is None:
            self.feedback = None
        else:
            if config.wiring == "inserted":
                slot = self.baseline.latent_slot
            else:
                slot = (config.n_predicted, config.pose_dim)
            self.feedback = _build_feedback(config, slot)
        self.double()

    def predict_round(self, observed: torch.Tensor,
                      deviation: torch.Tensor | None = None) -> torch.Tensor:
        """(B, N, K) observed plus optional (B, T-1, K) deviation -> (B, T, K).

        ``deviation=None`` bypasses the branch entirely (the round-1 path).
        """
        if observed.ndim != 3 or observed.shape[1:] != (
            self.config.n_observed, self.config.pose_dim
        ):
            raise ValueError(
                f"observed must be (B, {self.config.n_observed}, "
                f"{self.config.pose_dim}), got {tuple(observed.shape)}"
            )
        use_branch = deviation is not None and self.feedback is not None
        if use_branch:
            expect = (self.config.n_predicted - 1, self.config.pose_dim)
            if deviation.ndim != 3 or deviation.shape[1:] != expect:
                raise ValueError(
                    f"deviation must be (B, {expect[0]}, {expect[1]}), "
                    f"got {tuple(deviation.shape)}"
                )

        anchor = observed[:, -1:, :]
        latent = self.baseline.encode(observed - anchor)
        if use_branch and self.config.wiring == "inserted":
            latent = latent + self.feedback(deviation)
        prediction = self.baseline.decode(latent) + anchor
        if use_branch and self.config.wiring == "corrective":
            prediction = prediction + self.feedback(deviation)
        return prediction

    def forward(self, observed: torch.Tensor,
                deviation: torch.Tensor | None = None) -> torch.Tensor:
        return self.predict_round(observed, deviation)

    @torch.no_grad()
    def predict_numpy(self, observed: np.ndarray,
                      deviation: np.ndarray | None = None) -> np.ndarray:
        """Single-sample numpy entry point: (N, K) [+ (T-1, K)] -> (T, K)."""
        obs = torch.from_numpy(np.asarray(observed, dtype=np.float64))[None]
        dev = None
        if deviation is not None:
            dev = torch.from_numpy(np.asarray(deviation, dtype=np.float64))[None]
        return self.predict_round(obs, dev)[0].numpy()


def save_checkpoint(bundle: PredictorBundle, path) -> None:
    """Write parameters, their order, and the config to one .npz file."""
    state = bundle.state_dict()
    payload = {f"param.{key}": value.detach().cpu().numpy()
               for key, value in state.items()}
    payload["param_order"] = np.array(json.dumps(list(state.keys())))
    payload["config"] = np.array(json.dumps(asdict(bundle.config)))
    with open(path, "wb") as handle:
        np.savez(handle, **payload)


def load_checkpoint(path) -> PredictorBundle:
    """Rebuild a bundle from a checkpoint, restoring parameters bit-exactly."""
    with np.load(path, allow_pickle=False) as archive:
        config = BundleConfig(**json.loads(str(archive["config"][()])))
        order = json.loads(str(archive["param_order"][()]))
        state = {key: torch.from_numpy(archive[f"param.{key}"].copy())
                 for key in order}
    bundle = PredictorBundle(config)
    bundle.load_state_dict(state)
    return bundle
