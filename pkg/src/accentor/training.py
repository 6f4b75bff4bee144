"""Training harness: weighted batches, alternating updates, persistence.

Every step runs three phases in a fixed order: (a) the waveform
discriminators, (b) the accent discriminator, (c) the generator path
(both encoders plus the vocoder).  The accent-adversarial term joins
phase (c) only after the warm-up iterations; with the adversary
disabled, phase (b) is skipped entirely and the term stays at weight
zero, which is the ablation configuration.
"""

import csv
import io
import logging
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from . import config as config_mod
from .config import Config, TrainConfig
from .data import build_sampler, read_manifest
from .dsp import acoustic_frames, read_wav, resample, segment
from .errors import CheckpointVersionError, CorruptFileError, TrainingDiverged
from .frontend import CharVocab, as_one_hot, build_frontend, default_vocab, segment_clip_id
from .nets import (
    AccentDiscriminator,
    AcousticEncoder,
    Generator,
    HifiDiscriminators,
    PronunciationEncoder,
    adversarial_loss,
    discriminator_loss,
    loss_feature_matching,
    loss_hifigan_adversarial,
    loss_hifigan_discriminator,
    loss_mel,
)
from .nets.adversary import _frozen
from .pitch import extract_pitch

log = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"ACCK"
CHECKPOINT_VERSION = 1
_CKPT_HEADER = struct.Struct("<4sI")

CSV_COLUMNS = ("iteration", "L_mel", "L_AD", "L_AD_adv", "L_HD", "L_HD_adv", "L_FM", "lr")


def learning_rate(iteration: int, cfg: TrainConfig) -> float:
    """Stepped exponential decay: base rate times decay^(iteration // interval)."""
    if iteration < 0:
        raise ValueError("iteration must be non-negative")
    return cfg.lr * cfg.lr_decay ** (iteration // cfg.lr_decay_every)


@dataclass
class LossReport:
    iteration: int
    l_mel: float
    l_ad: float
    l_ad_adv: float
    l_hd: float
    l_hd_adv: float
    l_fm: float
    lr: float
    adv_weight: float  # effective weight of the accent-adversarial term

    def csv_row(self):
        return [self.iteration, self.l_mel, self.l_ad, self.l_ad_adv,
                self.l_hd, self.l_hd_adv, self.l_fm, self.lr]


class CsvLossLog:
    """Append-only loss log with the fixed column set."""

    def __init__(self, path):
        self.path = Path(path)
        if not self.path.exists():
            with self.path.open("w", newline="") as fh:
                csv.writer(fh).writerow(CSV_COLUMNS)

    def append(self, report: LossReport) -> None:
        with self.path.open("a", newline="") as fh:
            csv.writer(fh).writerow(report.csv_row())


@dataclass
class TrainingSample:
    """One fixed-length segment with all conditioning features."""

    wave: np.ndarray          # (segment_samples,)
    chars: np.ndarray         # (T_char, V)
    f0: np.ndarray            # (T,)
    frames: np.ndarray        # (T, in_dim)
    accent_index: int
    native: bool


def prepare_clip(entry, cfg: Config, vocab: CharVocab, frontend) -> list[TrainingSample]:
    """Load, resample, segment, and featurize one manifest entry."""
    wave = resample(read_wav(entry.clip_path), cfg.features.sample_rate)
    samples = []
    for idx, seg in enumerate(segment(wave, cfg.features.segment_seconds)):
        pitch = extract_pitch(seg, cfg.features, cfg.pitch)
        frames = acoustic_frames(seg, pitch, cfg.features)
        chars = frontend.predictions(segment_clip_id(entry.clip_path.stem, idx), seg)
        if cfg.frontend.one_hot:
            chars = as_one_hot(chars)
        samples.append(
            TrainingSample(
                wave=seg.samples.astype(np.float32),
                chars=chars.frames,
                f0=pitch.f0_hz.astype(np.float32),
                frames=frames.frames.astype(np.float32),
                accent_index=entry.accent.index,
                native=entry.accent.native_class,
            )
        )
    return samples


class BatchIterator:
    """Deterministic stream of feature batches.

    Clips are drawn by the weighted sampler; one segment of each drawn
    clip is picked uniformly.  Features are computed once per clip and
    cached in memory.  The stream is a pure function of (seed,
    start_iteration).
    """

    def __init__(self, manifest, cfg: Config, vocab: CharVocab, frontend,
                 weights=None, start_iteration: int = 0):
        self.cfg = cfg
        self.vocab = vocab
        self.frontend = frontend
        self.sampler = build_sampler(manifest, weights, seed=(cfg.train.seed, start_iteration, 1))
        self._segment_rng = np.random.default_rng((cfg.train.seed, start_iteration, 2))
        self._cache: dict = {}
        self._stream = iter(self.sampler)

    def _samples_for(self, entry) -> list[TrainingSample]:
        key = entry.clip_path
        if key not in self._cache:
            self._cache[key] = prepare_clip(entry, self.cfg, self.vocab, self.frontend)
        return self._cache[key]

    def next_batch(self) -> list[TrainingSample]:
        batch = []
        while len(batch) < self.cfg.train.batch_size:
            entry = next(self._stream)
            segments = self._samples_for(entry)
            if not segments:
                log.warning("clip %s shorter than half a segment; skipped", entry.clip_path)
                continue
            batch.append(segments[self._segment_rng.integers(len(segments))])
        return batch


@dataclass
class Models:
    pronunciation: PronunciationEncoder
    acoustic: AcousticEncoder
    accent_disc: AccentDiscriminator
    generator: Generator
    hifigan_discs: HifiDiscriminators

    def named(self):
        return {
            "pronunciation": self.pronunciation,
            "acoustic": self.acoustic,
            "accent_disc": self.accent_disc,
            "generator": self.generator,
            "hifigan_discs": self.hifigan_discs,
        }


def decoder_in_channels(cfg: Config) -> int:
    return cfg.pronunciation.d_model + cfg.acoustic.embed_dim + 1


def build_models(cfg: Config, vocab_size: int) -> Models:
    return Models(
        pronunciation=PronunciationEncoder(vocab_size, cfg.pronunciation),
        acoustic=AcousticEncoder(cfg.acoustic),
        accent_disc=AccentDiscriminator(cfg.acoustic.embed_dim, cfg.adversary),
        generator=Generator(decoder_in_channels(cfg), cfg.vocoder),
        hifigan_discs=HifiDiscriminators(cfg.vocoder),
    )


class Trainer:
    """Owns all parameters and the three alternating optimization phases."""

    def __init__(self, cfg: Config, vocab: CharVocab, _models: Models | None = None):
        cfg.validate()
        self.cfg = cfg
        self.vocab = vocab
        self.iteration = 0
        if _models is None:
            torch.manual_seed(cfg.train.seed)
            _models = build_models(cfg, vocab.size)
        self.models = _models
        t = cfg.train
        betas = (t.adam_beta1, t.adam_beta2)
        gen_params = (
            list(self.models.pronunciation.parameters())
            + list(self.models.acoustic.parameters())
            + list(self.models.generator.parameters())
        )
        self._gen_params = gen_params
        self.opt_gen = torch.optim.AdamW(gen_params, lr=t.lr, betas=betas,
                                         weight_decay=t.weight_decay)
        self.opt_hd = torch.optim.AdamW(self.models.hifigan_discs.parameters(), lr=t.lr,
                                        betas=betas, weight_decay=t.weight_decay)
        self.opt_ad = torch.optim.AdamW(self.models.accent_disc.parameters(), lr=t.lr,
                                        betas=betas, weight_decay=t.weight_decay)

    def _set_lr(self, lr: float) -> None:
        for opt in (self.opt_gen, self.opt_hd, self.opt_ad):
            for group in opt.param_groups:
                group["lr"] = lr

    @staticmethod
    def _collate(batch) -> dict:
        return {
            "wave": torch.from_numpy(np.stack([s.wave for s in batch])),
            "chars": torch.from_numpy(np.stack([s.chars for s in batch])),
            "f0": torch.from_numpy(np.stack([s.f0 for s in batch])),
            "frames": torch.from_numpy(np.stack([s.frames for s in batch])),
            "accents": torch.tensor([s.accent_index for s in batch], dtype=torch.long),
            "native": torch.tensor([s.native for s in batch], dtype=torch.bool),
        }

    @staticmethod
    def _check_finite(name: str, value: torch.Tensor, iteration: int) -> None:
        if not torch.isfinite(value):
            raise TrainingDiverged(f"loss term {name} became non-finite at iteration {iteration}")

    def train_step(self, batch) -> LossReport:
        from .nets.hifigan import assemble_decoder_input

        cfg = self.cfg
        it = self.iteration
        lr = learning_rate(it, cfg.train)
        self._set_lr(lr)
        data = self._collate(batch) if not isinstance(batch, dict) else batch

        for module in self.models.named().values():
            module.train()

        # generator-path forward, reused by all three phases
        z = self.models.acoustic(data["frames"])
        pron = self.models.pronunciation(data["chars"], data["accents"])
        dec_in = assemble_decoder_input(pron, z, data["f0"], cfg.features.pron_upsample)
        x_hat = self.models.generator(dec_in)
        x = data["wave"]

        l_hd = self._step_waveform_disc(x, x_hat)
        l_ad = self._step_accent_disc(z, data["native"])
        report = self._step_generator(x, x_hat, z, data["native"])

        self.iteration += 1
        return LossReport(
            iteration=it,
            l_mel=report["l_mel"],
            l_ad=float(l_ad),
            l_ad_adv=report["l_ad_adv"],
            l_hd=float(l_hd),
            l_hd_adv=report["l_hd_adv"],
            l_fm=report["l_fm"],
            lr=lr,
            adv_weight=report["adv_weight"],
        )

    def _step_waveform_disc(self, x, x_hat) -> float:
        real_scores, _ = self.models.hifigan_discs(x)
        fake_scores, _ = self.models.hifigan_discs(x_hat.detach())
        l_hd = loss_hifigan_discriminator(real_scores, fake_scores)
        self._check_finite("L_HD", l_hd, self.iteration)
        self.opt_hd.zero_grad()
        l_hd.backward()
        torch.nn.utils.clip_grad_norm_(self.models.hifigan_discs.parameters(),
                                       self.cfg.train.grad_clip)
        self.opt_hd.step()
        return float(l_hd.detach())

    def _step_accent_disc(self, z, native) -> float:
        if not self.cfg.adversary.enabled:
            with torch.no_grad():
                return float(discriminator_loss(self.models.accent_disc, z, native,
                                                self.cfg.adversary.clamp_eps))
        l_ad = discriminator_loss(self.models.accent_disc, z, native,
                                  self.cfg.adversary.clamp_eps)
        self._check_finite("L_AD", l_ad, self.iteration)
        self.opt_ad.zero_grad()
        l_ad.backward()
        torch.nn.utils.clip_grad_norm_(self.models.accent_disc.parameters(),
                                       self.cfg.train.grad_clip)
        self.opt_ad.step()
        return float(l_ad.detach())

    def _step_generator(self, x, x_hat, z, native) -> dict:
        cfg = self.cfg
        it = self.iteration
        with torch.no_grad():
            _, real_feats = self.models.hifigan_discs(x)
        with _frozen(self.models.hifigan_discs):
            fake_scores, fake_feats = self.models.hifigan_discs(x_hat)
        l_hd_adv = loss_hifigan_adversarial(fake_scores)
        l_fm = loss_feature_matching(real_feats, fake_feats)
        l_mel = loss_mel(x, x_hat, cfg.features)

        adv_active = cfg.adversary.enabled and it >= cfg.train.warmup_steps
        adv_weight = cfg.train.lambda_acc if adv_active else 0.0
        if adv_active:
            l_ad_adv = adversarial_loss(self.models.accent_disc, z, native,
                                        cfg.adversary.clamp_eps)
        else:
            with torch.no_grad():
                l_ad_adv = adversarial_loss(self.models.accent_disc, z, native,
                                            cfg.adversary.clamp_eps)

        for name, value in (("L_mel", l_mel), ("L_HD_adv", l_hd_adv),
                            ("L_FM", l_fm), ("L_AD_adv", l_ad_adv)):
            self._check_finite(name, value, it)

        total = (cfg.train.lambda_mel * l_mel
                 + cfg.train.lambda_hd * l_hd_adv
                 + cfg.train.lambda_fm * l_fm)
        if adv_active:
            total = total + adv_weight * l_ad_adv
        self.opt_gen.zero_grad()
        total.backward()
        torch.nn.utils.clip_grad_norm_(self._gen_params, cfg.train.grad_clip)
        self.opt_gen.step()
        return {
            "l_mel": float(l_mel.detach()),
            "l_hd_adv": float(l_hd_adv.detach()),
            "l_fm": float(l_fm.detach()),
            "l_ad_adv": float(l_ad_adv.detach()),
            "adv_weight": adv_weight,
        }

    # -- persistence ---------------------------------------------------

    def state_payload(self) -> dict:
        return {
            "config": config_mod.to_dict(self.cfg),
            "vocab": list(self.vocab.symbols),
            "iteration": self.iteration,
            "models": {k: m.state_dict() for k, m in self.models.named().items()},
            "optimizers": {
                "gen": self.opt_gen.state_dict(),
                "hd": self.opt_hd.state_dict(),
                "ad": self.opt_ad.state_dict(),
            },
            "torch_rng": torch.get_rng_state(),
        }

    def load_payload(self, payload: dict) -> None:
        self.iteration = int(payload["iteration"])
        for name, module in self.models.named().items():
            module.load_state_dict(payload["models"][name])
        self.opt_gen.load_state_dict(payload["optimizers"]["gen"])
        self.opt_hd.load_state_dict(payload["optimizers"]["hd"])
        self.opt_ad.load_state_dict(payload["optimizers"]["ad"])
        torch.set_rng_state(payload["torch_rng"])

    @classmethod
    def from_payload(cls, payload: dict) -> "Trainer":
        cfg = config_mod.from_dict(payload["config"])
        vocab = CharVocab(tuple(payload["vocab"]))
        trainer = cls(cfg, vocab)
        trainer.load_payload(payload)
        return trainer


def save_checkpoint(path, trainer: Trainer) -> None:
    """Atomically write header + payload; round-trips bit-exactly."""
    buf = io.BytesIO()
    torch.save(trainer.state_payload(), buf)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("wb") as fh:
        fh.write(_CKPT_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION))
        fh.write(buf.getvalue())
    os.replace(tmp, path)


def load_checkpoint(path) -> dict:
    raw = Path(path).read_bytes()
    if len(raw) < _CKPT_HEADER.size:
        raise CorruptFileError(f"{path}: shorter than the checkpoint header")
    magic, version = _CKPT_HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise CorruptFileError(f"{path}: not a checkpoint (bad magic {magic!r})")
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"{path}: checkpoint format version {version}, this build reads {CHECKPOINT_VERSION}"
        )
    try:
        return torch.load(io.BytesIO(raw[_CKPT_HEADER.size:]), weights_only=False)
    except Exception as exc:
        raise CorruptFileError(f"{path}: unreadable checkpoint payload ({exc})") from exc


def load_trainer(path) -> Trainer:
    return Trainer.from_payload(load_checkpoint(path))


def train(cfg: Config, manifest_path, out_dir, resume=None, weights=None) -> Path:
    """Run the training loop; returns the final checkpoint path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab = default_vocab(cfg.frontend)
    frontend = build_frontend(cfg.frontend, vocab)
    if resume is not None:
        trainer = load_trainer(resume)
        cfg = trainer.cfg
        vocab = trainer.vocab
    else:
        trainer = Trainer(cfg, vocab)
    manifest = read_manifest(manifest_path)
    batches = BatchIterator(manifest, cfg, vocab, frontend, weights=weights,
                            start_iteration=trainer.iteration)
    log_file = CsvLossLog(out_dir / "losses.csv")
    ckpt_path = out_dir / "checkpoint.pt"

    while trainer.iteration < cfg.train.total_steps:
        report = trainer.train_step(batches.next_batch())
        if report.iteration % cfg.train.log_every == 0:
            log_file.append(report)
            log.info(
                "it %d  L_mel %.4f  L_AD %.4f  L_HD %.4f  lr %.3g",
                report.iteration, report.l_mel, report.l_ad, report.l_hd, report.lr,
            )
        if (trainer.iteration % cfg.train.checkpoint_every == 0
                or trainer.iteration >= cfg.train.total_steps):
            save_checkpoint(ckpt_path, trainer)
    save_checkpoint(ckpt_path, trainer)
    return ckpt_path
