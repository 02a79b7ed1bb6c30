"""Baseline sequence predictors with an encode/inject/decode seam.

Each baseline maps (B, N, K) observed frames to (B, T, K) predictions and
splits into ``encode`` and ``decode`` so an external embedding can be added
to the latent in between. ``latent_slot`` names the latent's (rows,
features) shape so that embedding can be built to match. Decoders place a
nonlinearity after the injection point, so latent-space feedback is not
reducible to an output-space correction.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis as an (n, n) matrix; rows are frequencies."""
    if n < 1:
        raise ValueError(f"basis size must be positive, got {n}")
    k = np.arange(n, dtype=np.float64)[:, None]
    i = np.arange(n, dtype=np.float64)[None, :]
    basis = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * i + 1) * k / (2 * n))
    basis[0] /= np.sqrt(2.0)
    return basis


class MixingBlock(nn.Module):
    """Pre-norm temporal mix then feature mix, each with a residual add."""

    def __init__(self, n_frames: int, width: int):
        super().__init__()
        self.time_norm = nn.LayerNorm(width)
        self.time_mix = nn.Linear(n_frames, n_frames)
        self.feature_norm = nn.LayerNorm(width)
        self.feature_fc1 = nn.Linear(width, width)
        self.feature_fc2 = nn.Linear(width, width)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        t = self.time_norm(x).transpose(1, 2)
        x = x + self.time_mix(t).transpose(1, 2)
        f = self.feature_fc2(F.gelu(self.feature_fc1(self.feature_norm(x))))
        return x + f


class MixerBaseline(nn.Module):
    """Frame embedding + stacked mixing blocks + a temporal head.

    Latent slot is (n_observed, width): one width-dim feature row per
    observed frame.
    """

    def __init__(self, n_observed: int, n_predicted: int, pose_dim: int,
                 width: int = 64, blocks: int = 2):
        super().__init__()
        self.latent_slot = (n_observed, width)
        self.input_proj = nn.Linear(pose_dim, width)
        self.blocks = nn.ModuleList(
            MixingBlock(n_observed, width) for _ in range(blocks)
        )
        self.time_head = nn.Linear(n_observed, n_predicted)
        self.out_norm = nn.LayerNorm(width)
        self.output_proj = nn.Linear(width, pose_dim)

    def encode(self, frames: torch.Tensor) -> torch.Tensor:
        x = self.input_proj(frames)
        for block in self.blocks:
            x = block(x)
        return x

    def decode(self, latent: torch.Tensor) -> torch.Tensor:
        x = self.time_head(latent.transpose(1, 2)).transpose(1, 2)
        x = F.gelu(self.out_norm(x))
        return self.output_proj(x)

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        return self.decode(self.encode(frames))


class GraphConvBlock(nn.Module):
    """Residual graph convolution over a learned dense adjacency."""

    def __init__(self, n_nodes: int, feature_dim: int):
        super().__init__()
        self.norm = nn.LayerNorm(feature_dim)
        self.adjacency = nn.Parameter(torch.empty(n_nodes, n_nodes))
        self.weight = nn.Linear(feature_dim, feature_dim)
        with torch.no_grad():
            # Near-identity start keeps early message passing local.
            self.adjacency.copy_(
                torch.eye(n_nodes) + 0.05 * torch.randn(n_nodes, n_nodes)
            )

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        mixed = torch.einsum("ij,bjf->bif", self.adjacency, self.norm(h))
        return h + torch.tanh(self.weight(mixed))


class DctGcnBaseline(nn.Module):
    """Temporal DCT features refined by graph convolutions over coordinates.

    Each of the K pose coordinates becomes a graph node carrying a
    feature vector distilled from its DCT spectrum over the observed
    window; latent slot is (pose_dim, feature_dim). Decoding inverts the
    DCT and maps the reconstructed window onto the prediction horizon.
    """

    def __init__(self, n_observed: int, n_predicted: int, pose_dim: int,
                 feature_dim: int = 32, blocks: int = 3):
        super().__init__()
        self.latent_slot = (pose_dim, feature_dim)
        basis = torch.from_numpy(dct_matrix(n_observed))
        self.register_buffer("dct_basis", basis)
        self.input_proj = nn.Linear(n_observed, feature_dim)
        self.blocks = nn.ModuleList(
            GraphConvBlock(pose_dim, feature_dim) for _ in range(blocks)
        )
        self.out_norm = nn.LayerNorm(feature_dim)
        self.coeff_head = nn.Linear(feature_dim, n_observed)
        self.time_head = nn.Linear(n_observed, n_predicted)

    def encode(self, frames: torch.Tensor) -> torch.Tensor:
        coeffs = frames.transpose(1, 2) @ self.dct_basis.T  # (B, K, N)
        h = self.input_proj(coeffs)
        for block in self.blocks:
            h = block(h)
        return h

    def decode(self, latent: torch.Tensor) -> torch.Tensor:
        h = F.gelu(self.out_norm(latent))
        coeffs = self.coeff_head(h)
        window = coeffs @ self.dct_basis  # back to the time domain
        return self.time_head(window).transpose(1, 2)

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        return self.decode(self.encode(frames))
