"""Encoders that turn a deviation signal into a latent-slot embedding.

Both variants read a (B, T-1, K) velocity-space deviation and emit a
(B, rows, features) embedding matching a target slot shape. Their final
projection is zero-initialized, so at initialization the embedding is
exactly zero and the host predictor behaves as if the branch were absent.
Only that last layer is zeroed: its input features are nonzero, so the
first optimizer step moves it off zero and gradient then reaches the
earlier layers.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn


def zero_init_linear(layer: nn.Linear) -> nn.Linear:
    """Zero a linear layer's weight and bias in place."""
    nn.init.zeros_(layer.weight)
    if layer.bias is not None:
        nn.init.zeros_(layer.bias)
    return layer


def _check_steps(n_predicted: int):
    if n_predicted < 2:
        raise ValueError(
            f"deviation encoders need n_predicted >= 2 (got {n_predicted}); "
            "a one-frame horizon has no velocity rows"
        )


class MlpDeviationEncoder(nn.Module):
    """Temporal-mixing MLP, spatial-mixing MLP, then a flat projection.

    Each mixing stage is pre-norm with a residual skip: layer norm, two
    fully connected layers with a GELU between, add back. The projection
    onto the slot is a single zero-initialized linear over the flattened
    signal.
    """

    def __init__(self, n_predicted: int, pose_dim: int,
                 slot_shape: tuple[int, int], hidden_dim: int = 64):
        super().__init__()
        _check_steps(n_predicted)
        steps = n_predicted - 1
        self.slot_shape = tuple(slot_shape)
        self.time_norm = nn.LayerNorm(pose_dim)
        self.time_fc1 = nn.Linear(steps, steps)
        self.time_fc2 = nn.Linear(steps, steps)
        self.space_norm = nn.LayerNorm(pose_dim)
        self.space_fc1 = nn.Linear(pose_dim, hidden_dim)
        self.space_fc2 = nn.Linear(hidden_dim, pose_dim)
        rows, features = self.slot_shape
        self.output_proj = zero_init_linear(
            nn.Linear(steps * pose_dim, rows * features)
        )

    def forward(self, deviation: torch.Tensor) -> torch.Tensor:
        t = self.time_norm(deviation).transpose(1, 2)
        t = self.time_fc2(F.gelu(self.time_fc1(t))).transpose(1, 2)
        x = deviation + t
        s = self.space_fc2(F.gelu(self.space_fc1(self.space_norm(x))))
        x = x + s
        flat = x.reshape(x.shape[0], -1)
        return self.output_proj(flat).reshape(x.shape[0], *self.slot_shape)


class GruDeviationEncoder(nn.Module):
    """One-layer GRU with temporal and spatial alignment layers.

    The GRU consumes the deviation step by step; a linear layer over the
    step axis aligns T-1 hidden states to the slot's row count, and a
    zero-initialized linear over the hidden axis aligns features.
    """

    def __init__(self, n_predicted: int, pose_dim: int,
                 slot_shape: tuple[int, int], hidden_size: int = 256):
        super().__init__()
        _check_steps(n_predicted)
        self.slot_shape = tuple(slot_shape)
        rows, features = self.slot_shape
        self.gru = nn.GRU(pose_dim, hidden_size, num_layers=1, batch_first=True)
        self.temporal_align = nn.Linear(n_predicted - 1, rows)
        self.spatial_align = zero_init_linear(nn.Linear(hidden_size, features))

    def forward(self, deviation: torch.Tensor) -> torch.Tensor:
        h, _ = self.gru(deviation)  # (B, T-1, hidden)
        h = self.temporal_align(h.transpose(1, 2)).transpose(1, 2)
        return self.spatial_align(h)
