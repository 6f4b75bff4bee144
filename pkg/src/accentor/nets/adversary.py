"""Native/foreign accent discriminator and its two adversarial losses.

The discriminator learns to output 1 for native-accent clips and 0 for
foreign ones; the acoustic encoder is trained against the second loss,
which rewards foreign embeddings the discriminator mistakes for
native.  Training alternates the two objectives; there is no gradient
reversal.
"""

import logging
from contextlib import contextmanager

import torch
import torch.nn as nn

from ..config import AdversaryConfig

log = logging.getLogger(__name__)


class AccentDiscriminator(nn.Module):
    """Two affine layers with a sigmoid head; outputs stay strictly in (0, 1)."""

    def __init__(self, in_dim: int = 256, cfg: AdversaryConfig = AdversaryConfig()):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(in_dim, cfg.hidden),
            nn.ReLU(),
            nn.Linear(cfg.hidden, 1),
        )

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.net(z)).squeeze(-1)


def _clamp(probs: torch.Tensor, eps: float) -> torch.Tensor:
    return probs.clamp(eps, 1.0 - eps)


def discriminator_loss(disc, embeddings: torch.Tensor, native: torch.Tensor,
                       eps: float = AdversaryConfig.clamp_eps) -> torch.Tensor:
    """Classification loss: -E_native[log p] - E_foreign[log(1 - p)].

    Embeddings are detached, so only the discriminator receives
    gradients.  A batch missing one class contributes a zero term for
    the empty expectation (logged, since it weakens the update).
    """
    if embeddings.shape[0] == 0:
        raise ValueError("empty batch")
    native = native.bool()
    probs = _clamp(disc(embeddings.detach()), eps)
    loss = probs.new_zeros(())
    if native.any():
        loss = loss - torch.log(probs[native]).mean()
    else:
        log.warning("discriminator batch has no native clips; native term is 0")
    if (~native).any():
        loss = loss - torch.log(1.0 - probs[~native]).mean()
    else:
        log.warning("discriminator batch has no foreign clips; foreign term is 0")
    return loss


def adversarial_loss(disc, embeddings: torch.Tensor, native: torch.Tensor,
                     eps: float = AdversaryConfig.clamp_eps) -> torch.Tensor:
    """Encoder loss: -E_foreign[log p], pushing foreign embeddings toward 1.

    Discriminator parameters are frozen for the evaluation, so the
    gradient reaches only the embeddings (and the encoder behind them).
    Returns 0 when the batch has no foreign clips.
    """
    if embeddings.shape[0] == 0:
        raise ValueError("empty batch")
    foreign = ~native.bool()
    if not foreign.any():
        log.warning("adversarial batch has no foreign clips; loss is 0")
        return embeddings.new_zeros(())
    with _frozen(disc):
        probs = _clamp(disc(embeddings[foreign]), eps)
    return -torch.log(probs).mean()


@contextmanager
def _frozen(module: nn.Module):
    flags = [p.requires_grad for p in module.parameters()]
    try:
        for p in module.parameters():
            p.requires_grad_(False)
        yield
    finally:
        for p, flag in zip(module.parameters(), flags):
            p.requires_grad_(flag)
