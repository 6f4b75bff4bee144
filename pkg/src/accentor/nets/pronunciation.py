"""Accent-conditioned pronunciation encoder.

Concatenates a learned accent embedding to every character-posterior
frame, projects to model width, adds learned positions, and runs a
pre-norm transformer stack with full (unmasked) self-attention.  The
frame count is always preserved.
"""

import torch
import torch.nn as nn

from ..accents import ACCENT_CODES
from ..config import PronunciationConfig


class PronunciationEncoder(nn.Module):
    """Maps (B, T, V) character posteriors + accent ids to (B, T, D) encodings."""

    def __init__(self, vocab_size: int, cfg: PronunciationConfig = PronunciationConfig()):
        super().__init__()
        self.cfg = cfg
        self.vocab_size = vocab_size
        self.accent_table = nn.Embedding(len(ACCENT_CODES), cfg.accent_dim)
        self.input_proj = nn.Linear(vocab_size + cfg.accent_dim, cfg.d_model)
        self.positions = nn.Embedding(cfg.max_frames, cfg.d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=cfg.d_model,
            nhead=cfg.heads,
            dim_feedforward=cfg.ff_dim,
            dropout=0.0,  # regularization lives on the output, see cfg.dropout_location
            batch_first=True,
            norm_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, cfg.layers, enable_nested_tensor=False)
        self.dropout = nn.Dropout(cfg.dropout)

    def embed_accent(self, accent_ids: torch.Tensor) -> torch.Tensor:
        """Row lookup in the accent table; gradients reach only those rows."""
        return self.accent_table(accent_ids)

    def forward(self, chars: torch.Tensor, accent_ids: torch.Tensor) -> torch.Tensor:
        if chars.dim() != 3:
            raise ValueError(f"expected (B, T, V) posteriors, got shape {tuple(chars.shape)}")
        if chars.shape[-1] != self.vocab_size:
            raise ValueError(
                f"posterior width {chars.shape[-1]} does not match vocabulary size {self.vocab_size}"
            )
        n_frames = chars.shape[1]
        if n_frames > self.cfg.max_frames:
            raise ValueError(f"{n_frames} frames exceed the positional table ({self.cfg.max_frames})")
        accent = self.embed_accent(accent_ids)
        x = torch.cat([chars, accent.unsqueeze(1).expand(-1, n_frames, -1)], dim=-1)
        h = self.input_proj(x)
        h = h + self.positions(torch.arange(n_frames, device=h.device)).to(h.dtype)
        h = self.encoder(h)
        return self.dropout(h)
