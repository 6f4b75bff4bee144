"""Training losses: mel reconstruction and the three GAN terms.

The mel transform here reproduces the numpy front end bit-for-bit in
geometry (centered frames, ceil frame count, same window and
filterbank) while staying differentiable for the generator update.
"""

import numpy as np
import torch
import torch.nn.functional as F

from ..config import FeatureConfig
from ..dsp import DEFAULT_FEATURES, hann_window, mel_filterbank, num_frames

_BASIS_CACHE: dict = {}


def _mel_basis(cfg: FeatureConfig, dtype, device):
    key = (cfg.n_mels, cfg.n_fft, cfg.sample_rate, cfg.fmin, cfg.fmax, cfg.win, dtype, device)
    if key not in _BASIS_CACHE:
        fb = mel_filterbank(cfg.n_mels, cfg.n_fft, cfg.sample_rate, cfg.fmin, cfg.fmax)
        win = hann_window(cfg.win)
        _BASIS_CACHE[key] = (
            torch.as_tensor(fb, dtype=dtype, device=device),
            torch.as_tensor(win, dtype=dtype, device=device),
        )
    return _BASIS_CACHE[key]


def mel_spectrogram_torch(wave: torch.Tensor, cfg: FeatureConfig = DEFAULT_FEATURES) -> torch.Tensor:
    """(B, T, n_mels) log-mel frames of (B, N) waveforms; differentiable."""
    if wave.dim() == 1:
        wave = wave.unsqueeze(0)
    n = wave.shape[1]
    count = num_frames(n, cfg.hop)
    pad = cfg.win // 2
    mode = "reflect" if n > pad else "constant"
    padded = F.pad(wave.unsqueeze(1), (pad, pad), mode=mode).squeeze(1)
    frames = padded.unfold(-1, cfg.win, cfg.hop)[:, :count]
    fb, win = _mel_basis(cfg, wave.dtype, wave.device)
    spectrum = torch.fft.rfft(frames * win, n=cfg.n_fft)
    power = spectrum.real**2 + spectrum.imag**2
    mel_power = power @ fb.T
    return torch.log(torch.clamp(mel_power, min=cfg.log_floor))


def loss_mel(x: torch.Tensor, x_hat: torch.Tensor, cfg: FeatureConfig = DEFAULT_FEATURES) -> torch.Tensor:
    """Mean absolute log-mel difference, averaged over every bin."""
    if x.shape != x_hat.shape:
        raise ValueError(f"waveform shapes differ: {tuple(x.shape)} vs {tuple(x_hat.shape)}")
    return (mel_spectrogram_torch(x, cfg) - mel_spectrogram_torch(x_hat, cfg)).abs().mean()


def _as_list(scores):
    return [scores] if torch.is_tensor(scores) else list(scores)


def loss_hifigan_discriminator(real_scores, fake_scores) -> torch.Tensor:
    """Least-squares discriminator loss, summed over sub-discriminators."""
    real_scores, fake_scores = _as_list(real_scores), _as_list(fake_scores)
    if not real_scores or len(real_scores) != len(fake_scores):
        raise ValueError("need matching non-empty real/fake score lists")
    total = real_scores[0].new_zeros(())
    for real, fake in zip(real_scores, fake_scores):
        if real.numel() == 0 or fake.numel() == 0:
            raise ValueError("empty score tensor")
        total = total + ((real - 1.0) ** 2).mean() + (fake**2).mean()
    return total


def loss_hifigan_adversarial(fake_scores) -> torch.Tensor:
    """Least-squares generator loss, summed over sub-discriminators."""
    fake_scores = _as_list(fake_scores)
    if not fake_scores:
        raise ValueError("no fake scores")
    total = fake_scores[0].new_zeros(())
    for fake in fake_scores:
        if fake.numel() == 0:
            raise ValueError("empty score tensor")
        total = total + ((fake - 1.0) ** 2).mean()
    return total


def loss_feature_matching(real_features, fake_features) -> torch.Tensor:
    """Per-layer mean absolute feature difference, summed over layers and
    sub-discriminators."""
    if len(real_features) != len(fake_features):
        raise ValueError("sub-discriminator counts differ")
    total = None
    for real_layers, fake_layers in zip(real_features, fake_features):
        if len(real_layers) != len(fake_layers):
            raise ValueError("layer counts differ")
        for real, fake in zip(real_layers, fake_layers):
            if real.shape != fake.shape:
                raise ValueError(f"feature shapes differ: {tuple(real.shape)} vs {tuple(fake.shape)}")
            term = (real - fake).abs().mean()
            total = term if total is None else total + term
    if total is None:
        raise ValueError("no features to match")
    return total
