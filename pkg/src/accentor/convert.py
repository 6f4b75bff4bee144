"""Batch inference: checkpoint + WAV + target accent -> converted WAV.

The pipeline mirrors training: features and the acoustic embedding come
from the source audio, the pronunciation encoding is conditioned on the
requested target accent, and the vocoder re-synthesizes each 1.12 s
segment.  Long clips are processed segment by segment; the final
partial segment is zero-padded for the model and the output trimmed
back, so the converted waveform always has exactly the source's sample
count.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .accents import AccentId
from .config import Config
from .data import read_manifest
from .dsp import Waveform, acoustic_frames, read_wav, resample, write_wav
from .frontend import as_one_hot, build_frontend, segment_clip_id
from .pitch import extract_pitch
from .training import load_trainer
from .nets.hifigan import assemble_decoder_input

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConversionRequest:
    input_path: Path
    target_accent: AccentId
    checkpoint_path: Path
    output_path: Path
    frontend_kind: str | None = None   # overrides the checkpoint's frontend binding
    cache_dir: str | None = None


@dataclass
class BatchReport:
    outputs: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (clip, accent code, message)

    @property
    def ok(self) -> bool:
        return not self.failures


class Converter:
    """Loads a checkpoint once and converts any number of clips."""

    def __init__(self, cfg: Config, vocab, models, frontend):
        self.cfg = cfg
        self.vocab = vocab
        self.models = models
        self.frontend = frontend
        for module in models.named().values():
            module.eval()

    @classmethod
    def from_checkpoint(cls, path, frontend_kind: str | None = None,
                        cache_dir: str | None = None) -> "Converter":
        trainer = load_trainer(path)
        cfg = trainer.cfg
        if frontend_kind:
            cfg.frontend.kind = frontend_kind
        if cache_dir:
            cfg.frontend.cache_dir = str(cache_dir)
        frontend = build_frontend(cfg.frontend, trainer.vocab)
        return cls(cfg, trainer.vocab, trainer.models, frontend)

    def convert_waveform(self, wave: Waveform, target: AccentId, clip_stem: str) -> Waveform:
        feats = self.cfg.features
        wave = resample(wave, feats.sample_rate)
        n = len(wave)
        if n == 0:
            return Waveform(np.zeros(0), feats.sample_rate)
        seg_len = feats.segment_samples
        n_segments = -(-n // seg_len)
        padded = np.zeros(n_segments * seg_len)
        padded[:n] = wave.samples

        pieces = []
        with torch.no_grad():
            for k in range(n_segments):
                seg = Waveform(padded[k * seg_len : (k + 1) * seg_len], feats.sample_rate)
                pieces.append(self._convert_segment(seg, target, segment_clip_id(clip_stem, k)))
        out = np.concatenate(pieces)[:n]
        return Waveform(np.clip(out, -1.0, 1.0), feats.sample_rate)

    def _convert_segment(self, seg: Waveform, target: AccentId, clip_id: str) -> np.ndarray:
        pitch = extract_pitch(seg, self.cfg.features, self.cfg.pitch)
        frames = acoustic_frames(seg, pitch, self.cfg.features)
        chars = self.frontend.predictions(clip_id, seg)
        if self.cfg.frontend.one_hot:
            chars = as_one_hot(chars)

        chars_t = torch.from_numpy(chars.frames).unsqueeze(0)
        frames_t = torch.from_numpy(frames.frames.astype(np.float32)).unsqueeze(0)
        f0_t = torch.from_numpy(pitch.f0_hz.astype(np.float32)).unsqueeze(0)
        accent_t = torch.tensor([target.index], dtype=torch.long)

        z = self.models.acoustic(frames_t)
        pron = self.models.pronunciation(chars_t, accent_t)
        dec_in = assemble_decoder_input(pron, z, f0_t, self.cfg.features.pron_upsample)
        return self.models.generator(dec_in).squeeze(0).numpy().astype(np.float64)

    def convert_file(self, input_path, target: AccentId, output_path) -> Path:
        wave = read_wav(input_path)
        out = self.convert_waveform(wave, target, Path(input_path).stem)
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = output_path.with_name(output_path.name + ".part")
        write_wav(tmp, out)
        os.replace(tmp, output_path)
        return output_path


def convert(request: ConversionRequest) -> Path:
    converter = Converter.from_checkpoint(
        request.checkpoint_path, request.frontend_kind, request.cache_dir
    )
    return converter.convert_file(request.input_path, request.target_accent, request.output_path)


def batch_convert(manifest_path, accents, checkpoint_path, out_dir,
                  frontend_kind: str | None = None, cache_dir: str | None = None) -> BatchReport:
    """Convert every manifest clip to every accent; collect per-item failures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    converter = Converter.from_checkpoint(checkpoint_path, frontend_kind, cache_dir)
    report = BatchReport()
    for entry in read_manifest(manifest_path, require_exists=False):
        for accent in accents:
            out_path = out_dir / f"{entry.clip_path.stem}.{accent.code}.wav"
            try:
                converter.convert_file(entry.clip_path, accent, out_path)
                report.outputs.append(out_path)
            except Exception as exc:
                log.error("failed to convert %s to %s: %s", entry.clip_path, accent.code, exc)
                report.failures.append((str(entry.clip_path), accent.code, str(exc)))
    return report
