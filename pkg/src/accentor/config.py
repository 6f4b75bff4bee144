"""Configuration dataclasses and INI-file round-tripping.

Every tunable constant of the system lives here: feature geometry,
model widths, adversary settings, loss weights, and the optimization
schedule.  ``paper_profile`` keeps the published schedule (3M steps,
batch 16); ``desk_profile`` is the reduced schedule meant for a single
workstation.
"""

import ast
import configparser
import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError


@dataclass
class FeatureConfig:
    sample_rate: int = 16000
    hop: int = 80                 # 5 ms
    win: int = 320                # 20 ms
    n_fft: int = 512
    n_mels: int = 80
    fmin: float = 0.0
    fmax: float = 8000.0
    log_floor: float = 1e-5       # mel power floor before natural log
    n_mfcc: int = 13
    segment_seconds: float = 1.12
    char_hop: int = 320           # 20 ms grid of the character frontend
    pron_upsample: int = 4        # 20 ms grid -> 5 ms grid

    @property
    def segment_samples(self) -> int:
        return round(self.segment_seconds * self.sample_rate)

    @property
    def frames_per_segment(self) -> int:
        return -(-self.segment_samples // self.hop)

    @property
    def char_frames_per_segment(self) -> int:
        return -(-self.segment_samples // self.char_hop)


@dataclass
class PitchConfig:
    fmin_hz: float = 50.0
    fmax_hz: float = 600.0
    corr_win: int = 640           # correlation window; frame grid stays hop/win above
    acf_threshold: float = 0.4    # voicing decision on the best candidate
    energy_threshold: float = 1e-4
    peak_ratio: float = 0.88      # candidate must reach this fraction of the frame max
    lag_bias: float = 0.02        # per-candidate penalty on ln(lag), favors shorter lags
    switch_cost: float = 0.6      # smoothness weight of the lag path
    max_candidates: int = 8


@dataclass
class FrontendConfig:
    kind: str = "synthetic"       # "cached" or "synthetic"
    cache_dir: str = ""
    vocab: str = "abcdefghijklmnopqrstuvwxyz'|"  # blank appended internally
    one_hot: bool = False         # pass argmax rows instead of full posteriors
    synthetic_seed: int = 0


@dataclass
class PronunciationConfig:
    d_model: int = 256
    accent_dim: int = 128
    ff_dim: int = 1024
    layers: int = 4
    heads: int = 8
    dropout: float = 0.3
    dropout_location: str = "output"
    max_frames: int = 224         # learned positional table size


@dataclass
class AcousticConfig:
    in_dim: int = 14              # 13 MFCCs + periodicity
    channels: tuple = (64, 128, 256, 256)
    kernel_sizes: tuple = (5, 3, 3, 1)
    dilations: tuple = (1, 2, 1, 1)
    attn_heads: int = 4
    embed_dim: int = 256
    leaky_slope: float = 0.1


@dataclass
class AdversaryConfig:
    enabled: bool = True          # false reproduces the ablation model
    hidden: int = 128
    clamp_eps: float = 1e-7


@dataclass
class VocoderConfig:
    base_channels: int = 128
    pre_kernel: int = 11
    upsample_rates: tuple = (5, 4, 2, 2)       # product must equal the feature hop
    upsample_kernels: tuple = (10, 8, 4, 4)
    resblock_kernels: tuple = (3, 7, 11)
    resblock_dilations: tuple = ((1, 3, 5), (1, 3, 5), (1, 3, 5))
    out_kernel: int = 7
    leaky_slope: float = 0.1
    mpd_periods: tuple = (2, 3, 5, 7, 11)
    mpd_channels: tuple = (32, 128, 256, 256)
    msd_channels: tuple = (16, 64, 128, 128)
    min_wave_len: int = 640       # discriminator receptive-field guard


@dataclass
class TrainConfig:
    lr: float = 2e-4
    lr_decay: float = 0.999
    lr_decay_every: int = 1000
    adam_beta1: float = 0.8
    adam_beta2: float = 0.99
    weight_decay: float = 0.01
    batch_size: int = 16
    warmup_steps: int = 50000     # accent-discriminator-only phase
    total_steps: int = 3000000
    grad_clip: float = 10.0
    seed: int = 1234
    lambda_mel: float = 45.0
    lambda_fm: float = 2.0
    lambda_hd: float = 1.0
    lambda_acc: float = 1.0
    checkpoint_every: int = 5000
    log_every: int = 10


@dataclass
class Config:
    features: FeatureConfig = field(default_factory=FeatureConfig)
    pitch: PitchConfig = field(default_factory=PitchConfig)
    frontend: FrontendConfig = field(default_factory=FrontendConfig)
    pronunciation: PronunciationConfig = field(default_factory=PronunciationConfig)
    acoustic: AcousticConfig = field(default_factory=AcousticConfig)
    adversary: AdversaryConfig = field(default_factory=AdversaryConfig)
    vocoder: VocoderConfig = field(default_factory=VocoderConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def validate(self) -> "Config":
        feats, voc, train = self.features, self.vocoder, self.train
        rate_product = 1
        for r in voc.upsample_rates:
            rate_product *= r
        if rate_product != feats.hop:
            raise ConfigError(
                f"upsample rates {voc.upsample_rates} multiply to {rate_product}, "
                f"expected the feature hop {feats.hop}"
            )
        if len(voc.upsample_rates) != len(voc.upsample_kernels):
            raise ConfigError("upsample_rates and upsample_kernels lengths differ")
        if len(voc.resblock_kernels) != len(voc.resblock_dilations):
            raise ConfigError("resblock_kernels and resblock_dilations lengths differ")
        if train.warmup_steps > train.total_steps:
            raise ConfigError("warmup_steps exceeds total_steps")
        if self.frontend.kind not in ("cached", "synthetic"):
            raise ConfigError(f"frontend.kind must be 'cached' or 'synthetic', got {self.frontend.kind!r}")
        if self.pronunciation.dropout_location != "output":
            raise ConfigError("only 'output' dropout placement is implemented")
        return self


def paper_profile() -> Config:
    """Published training schedule; impractical without a large corpus and GPU."""
    return Config().validate()


def desk_profile() -> Config:
    """Workstation-sized schedule: short run, small batch."""
    cfg = Config()
    cfg.train.total_steps = 20000
    cfg.train.warmup_steps = 1000
    cfg.train.batch_size = 4
    cfg.train.checkpoint_every = 2000
    return cfg.validate()


PROFILES = {"paper": paper_profile, "desk": desk_profile}


def to_dict(cfg: Config) -> dict:
    return dataclasses.asdict(cfg)


def from_dict(data: dict) -> Config:
    cfg = Config()
    for section_field in fields(Config):
        section = getattr(cfg, section_field.name)
        overrides = data.get(section_field.name, {})
        known = {f.name: f for f in fields(section)}
        for key, value in overrides.items():
            if key not in known:
                raise ConfigError(f"unknown config key [{section_field.name}] {key}")
            setattr(section, key, _coerce(value, getattr(section, key)))
    return cfg.validate()


def _coerce(value, template):
    if isinstance(template, tuple):
        return _to_tuple(value)
    if isinstance(template, bool):
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    return type(template)(value)


def _to_tuple(value):
    if isinstance(value, (list, tuple)):
        return tuple(tuple(v) if isinstance(v, (list, tuple)) else v for v in value)
    parsed = ast.literal_eval(str(value))
    if not isinstance(parsed, tuple):
        parsed = (parsed,)
    return tuple(tuple(v) if isinstance(v, (list, tuple)) else v for v in parsed)


def load_config(path) -> Config:
    """Read an INI-style config file; missing keys fall back to defaults."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    data: dict = {}
    for section in parser.sections():
        if section not in {f.name for f in fields(Config)}:
            raise ConfigError(f"unknown config section [{section}]")
        data[section] = dict(parser.items(section))
    return from_dict(data)


def save_config(cfg: Config, path) -> None:
    parser = configparser.ConfigParser()
    for section_field in fields(Config):
        section = getattr(cfg, section_field.name)
        parser[section_field.name] = {
            f.name: _render(getattr(section, f.name)) for f in fields(section)
        }
    path = Path(path)
    with path.open("w") as fh:
        parser.write(fh)


def _render(value) -> str:
    if isinstance(value, tuple):
        return repr(value)
    return str(value)
