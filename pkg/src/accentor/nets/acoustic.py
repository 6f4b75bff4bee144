"""Acoustic encoder: MFCC+periodicity frames to one voice embedding.

Four dilated convolutions (the only source of positional information),
one self-attention layer, then mean pooling over time to a single
vector, so the embedding width is independent of the frame count.
"""

import numpy as np
import torch
import torch.nn as nn

from ..config import AcousticConfig


def mean_pool(seq) -> np.ndarray:
    """Arithmetic mean over rows of a (T, D) matrix.

    Accumulates each column in sorted order, so any row permutation of
    the input produces the identical output, not merely a close one.
    """
    a = np.asarray(seq, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] == 0:
        raise ValueError("mean_pool needs a non-empty (T, D) matrix")
    return np.sort(a, axis=0).sum(axis=0) / a.shape[0]


class AcousticEncoder(nn.Module):
    """Maps (B, T, in_dim) acoustic frames to (B, embed_dim) embeddings."""

    def __init__(self, cfg: AcousticConfig = AcousticConfig()):
        super().__init__()
        self.cfg = cfg
        convs = []
        in_ch = cfg.in_dim
        for out_ch, kernel, dilation in zip(cfg.channels, cfg.kernel_sizes, cfg.dilations):
            convs.append(
                nn.Conv1d(in_ch, out_ch, kernel, dilation=dilation,
                          padding=dilation * (kernel - 1) // 2)
            )
            in_ch = out_ch
        self.convs = nn.ModuleList(convs)
        self.conv_norms = nn.ModuleList(nn.LayerNorm(c) for c in cfg.channels)
        self.act = nn.LeakyReLU(cfg.leaky_slope)
        width = cfg.channels[-1]
        self.attn = nn.MultiheadAttention(width, cfg.attn_heads, batch_first=True)
        self.attn_norm = nn.LayerNorm(width)
        self.out_proj = nn.Linear(width, cfg.embed_dim) if width != cfg.embed_dim else nn.Identity()

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        if frames.dim() != 3:
            raise ValueError(f"expected (B, T, C) frames, got shape {tuple(frames.shape)}")
        if frames.shape[1] == 0:
            raise ValueError("acoustic encoder needs at least one frame")
        if frames.shape[2] != self.cfg.in_dim:
            raise ValueError(f"frame width {frames.shape[2]}, expected {self.cfg.in_dim}")
        h = frames.transpose(1, 2)
        for conv, norm in zip(self.convs, self.conv_norms):
            h = self.act(conv(h))
            h = norm(h.transpose(1, 2)).transpose(1, 2)
        h = h.transpose(1, 2)
        attended, _ = self.attn(h, h, h, need_weights=False)
        h = self.attn_norm(h + attended)
        return self.out_proj(h.mean(dim=1))
