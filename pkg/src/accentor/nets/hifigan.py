"""GAN vocoder: generator plus multi-period / multi-scale discriminators.

The generator takes frames on the 5 ms grid (upsampled pronunciation
encodings, the broadcast acoustic embedding, and one log-F0 channel),
runs a kernel-11 input convolution, then transposed-convolution
upsampling whose rates multiply to exactly the samples-per-frame hop,
with multi-receptive-field residual blocks between stages.  Output
length is therefore always ``hop * n_frames`` samples, which is what
keeps converted audio sample-synchronized with its source.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F
from torch.nn.utils.parametrizations import weight_norm

from ..config import VocoderConfig


def assemble_decoder_input(
    pron: torch.Tensor, z: torch.Tensor, f0: torch.Tensor, upsample: int = 4
) -> torch.Tensor:
    """Concatenate per-frame conditioning: (B, T, Dp + Dz + 1) on the 5 ms grid.

    ``pron`` rows are repeated ``upsample`` times, ``z`` is broadcast to
    every frame, and F0 enters as a single log1p-compressed channel.
    """
    if pron.dim() != 3 or z.dim() != 2 or f0.dim() != 2:
        raise ValueError("expected pron (B, Tc, Dp), z (B, Dz), f0 (B, T)")
    n_frames = f0.shape[1]
    if pron.shape[1] * upsample != n_frames:
        raise ValueError(
            f"{pron.shape[1]} pronunciation frames x {upsample} != {n_frames} pitch frames"
        )
    if pron.shape[0] != z.shape[0] or pron.shape[0] != f0.shape[0]:
        raise ValueError("batch sizes disagree")
    up = pron.repeat_interleave(upsample, dim=1)
    broadcast = z.unsqueeze(1).expand(-1, n_frames, -1)
    return torch.cat([up, broadcast, torch.log1p(f0).unsqueeze(-1)], dim=-1)


class ResidualBlock(nn.Module):
    """Two convolutions per dilation (dilated then plain), residual added."""

    def __init__(self, channels: int, kernel: int, dilations, slope: float):
        super().__init__()
        self.act = nn.LeakyReLU(slope)
        self.dilated = nn.ModuleList(
            weight_norm(nn.Conv1d(channels, channels, kernel, dilation=d,
                                  padding=d * (kernel - 1) // 2))
            for d in dilations
        )
        self.plain = nn.ModuleList(
            weight_norm(nn.Conv1d(channels, channels, kernel, padding=(kernel - 1) // 2))
            for _ in dilations
        )

    def forward(self, x):
        for dilated, plain in zip(self.dilated, self.plain):
            h = dilated(self.act(x))
            h = plain(self.act(h))
            x = x + h
        return x


class Generator(nn.Module):
    """Frames (B, T, in_channels) to waveforms (B, hop * T) in [-1, 1]."""

    def __init__(self, in_channels: int, cfg: VocoderConfig = VocoderConfig()):
        super().__init__()
        self.cfg = cfg
        self.in_channels = in_channels
        self.hop = 1
        for r in cfg.upsample_rates:
            self.hop *= r

        self.pre = weight_norm(
            nn.Conv1d(in_channels, cfg.base_channels, cfg.pre_kernel,
                      padding=(cfg.pre_kernel - 1) // 2)
        )
        self.act = nn.LeakyReLU(cfg.leaky_slope)
        self.ups = nn.ModuleList()
        self.blocks = nn.ModuleList()
        ch = cfg.base_channels
        for rate, kernel in zip(cfg.upsample_rates, cfg.upsample_kernels):
            out_ch = max(ch // 2, 2)
            self.ups.append(
                weight_norm(
                    nn.ConvTranspose1d(
                        ch, out_ch, kernel, stride=rate,
                        padding=(kernel - rate + 1) // 2,
                        output_padding=(kernel - rate) % 2,
                    )
                )
            )
            self.blocks.append(
                nn.ModuleList(
                    ResidualBlock(out_ch, k, d, cfg.leaky_slope)
                    for k, d in zip(cfg.resblock_kernels, cfg.resblock_dilations)
                )
            )
            ch = out_ch
        self.post = weight_norm(
            nn.Conv1d(ch, 1, cfg.out_kernel, padding=(cfg.out_kernel - 1) // 2)
        )

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        if frames.dim() != 3 or frames.shape[2] != self.in_channels:
            raise ValueError(
                f"expected (B, T, {self.in_channels}) decoder input, got {tuple(frames.shape)}"
            )
        x = self.pre(frames.transpose(1, 2))
        for up, blocks in zip(self.ups, self.blocks):
            x = up(self.act(x))
            x = sum(block(x) for block in blocks) / len(blocks)
        x = torch.tanh(self.post(self.act(x)))
        return x.squeeze(1)


def _grouped(in_ch: int, out_ch: int, groups: int) -> int:
    return groups if in_ch % groups == 0 and out_ch % groups == 0 else 1


class PeriodDiscriminator(nn.Module):
    """2-D convolutions over the waveform folded at one period."""

    def __init__(self, period: int, cfg: VocoderConfig):
        super().__init__()
        self.period = period
        convs = []
        in_ch = 1
        for out_ch in cfg.mpd_channels:
            convs.append(weight_norm(nn.Conv2d(in_ch, out_ch, (5, 1), (3, 1), padding=(2, 0))))
            in_ch = out_ch
        convs.append(weight_norm(nn.Conv2d(in_ch, in_ch, (5, 1), padding=(2, 0))))
        self.convs = nn.ModuleList(convs)
        self.out = weight_norm(nn.Conv2d(in_ch, 1, (3, 1), padding=(1, 0)))
        self.act = nn.LeakyReLU(cfg.leaky_slope)

    def forward(self, wave: torch.Tensor):
        batch, n = wave.shape
        pad = (-n) % self.period
        if pad:
            wave = F.pad(wave, (0, pad), mode="reflect")
        x = wave.view(batch, 1, -1, self.period)
        features = []
        for conv in self.convs:
            x = self.act(conv(x))
            features.append(x)
        score = self.out(x)
        features.append(score)
        return score.flatten(1), features


class ScaleDiscriminator(nn.Module):
    """1-D convolution stack over one average-pooled scale."""

    _KERNELS = (15, 41, 41, 41, 41)
    _STRIDES = (1, 2, 2, 4, 4)

    def __init__(self, cfg: VocoderConfig):
        super().__init__()
        plan = (cfg.msd_channels[0], *cfg.msd_channels)
        convs = []
        in_ch = 1
        for out_ch, kernel, stride in zip(plan, self._KERNELS, self._STRIDES):
            convs.append(
                weight_norm(
                    nn.Conv1d(in_ch, out_ch, kernel, stride,
                              padding=(kernel - 1) // 2,
                              groups=_grouped(in_ch, out_ch, 4) if stride > 1 else 1)
                )
            )
            in_ch = out_ch
        convs.append(weight_norm(nn.Conv1d(in_ch, in_ch, 5, padding=2)))
        self.convs = nn.ModuleList(convs)
        self.out = weight_norm(nn.Conv1d(in_ch, 1, 3, padding=1))
        self.act = nn.LeakyReLU(cfg.leaky_slope)

    def forward(self, wave: torch.Tensor):
        x = wave.unsqueeze(1)
        features = []
        for conv in self.convs:
            x = self.act(conv(x))
            features.append(x)
        score = self.out(x)
        features.append(score)
        return score.flatten(1), features


class HifiDiscriminators(nn.Module):
    """All sub-discriminators: one per period, then one per scale."""

    def __init__(self, cfg: VocoderConfig = VocoderConfig()):
        super().__init__()
        self.cfg = cfg
        self.period_discs = nn.ModuleList(PeriodDiscriminator(p, cfg) for p in cfg.mpd_periods)
        self.scale_discs = nn.ModuleList(ScaleDiscriminator(cfg) for _ in range(3))
        self.pool = nn.AvgPool1d(4, stride=2, padding=2)

    def forward(self, wave: torch.Tensor):
        """Returns (scores, features): one entry per sub-discriminator."""
        if wave.dim() != 2:
            raise ValueError(f"expected (B, N) waveforms, got shape {tuple(wave.shape)}")
        if wave.shape[1] < self.cfg.min_wave_len:
            raise ValueError(
                f"waveform of {wave.shape[1]} samples is below the discriminator "
                f"minimum of {self.cfg.min_wave_len}"
            )
        scores, features = [], []
        for disc in self.period_discs:
            s, f = disc(wave)
            scores.append(s)
            features.append(f)
        scaled = wave
        for i, disc in enumerate(self.scale_discs):
            if i > 0:
                scaled = self.pool(scaled.unsqueeze(1)).squeeze(1)
            s, f = disc(scaled)
            scores.append(s)
            features.append(f)
        return scores, features
