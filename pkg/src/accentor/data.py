"""Dataset ingestion: JSONL manifests, weighted sampling, synthetic fixtures.

A manifest line looks like::

    {"path": "clips/a.wav", "accent": "HI", "subset": "L2-Arctic", "duration_s": 3.1}

Subsets carry positive weights; a weight of n means each clip of that
subset is expected to appear n times per epoch, where one epoch is
``sum(weight * subset_size)`` draws with replacement.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .accents import AccentId, parse_accent
from .dsp import Waveform, write_wav
from .errors import ConfigError

DEFAULT_SUBSET_WEIGHTS = {
    "LibriTTS": 1.0,
    "VCTK": 6.0,
    "SAA": 10.0,
    "L2-Arctic": 15.0,
    "Indic TTS": 2.0,
}


@dataclass(frozen=True)
class ManifestEntry:
    clip_path: Path
    accent: AccentId
    subset: str
    duration_s: float


def read_manifest(path, require_exists: bool = True) -> list[ManifestEntry]:
    """Parse a JSONL manifest; clip files must exist unless told otherwise."""
    entries = []
    base = Path(path).parent
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            try:
                clip = Path(record["path"])
                if not clip.is_absolute():
                    clip = base / clip
                entry = ManifestEntry(
                    clip_path=clip,
                    accent=parse_accent(record["accent"]),
                    subset=str(record["subset"]),
                    duration_s=float(record["duration_s"]),
                )
            except KeyError as exc:
                raise ValueError(f"{path}:{lineno}: missing manifest key {exc}") from exc
            if require_exists and not entry.clip_path.exists():
                raise FileNotFoundError(f"{path}:{lineno}: clip not found: {entry.clip_path}")
            entries.append(entry)
    return entries


def write_manifest(path, entries) -> None:
    with open(path, "w") as fh:
        for e in entries:
            fh.write(
                json.dumps(
                    {
                        "path": str(e.clip_path),
                        "accent": e.accent.code,
                        "subset": e.subset,
                        "duration_s": e.duration_s,
                    }
                )
                + "\n"
            )


class WeightedClipSampler:
    """Samples clips with replacement, proportionally to subset weights.

    Over one epoch of ``round(sum(weight * subset_size))`` draws, the
    expected appearance count of every clip equals its subset's weight.
    The draw stream is a pure function of the seed.
    """

    def __init__(self, manifest, weights: dict, seed: int):
        if not manifest:
            raise ValueError("empty manifest")
        missing = {e.subset for e in manifest} - set(weights)
        if missing:
            raise ConfigError(f"no sampling weight for subsets: {sorted(missing)}")
        bad = {s: w for s, w in weights.items() if w <= 0}
        if bad:
            raise ConfigError(f"subset weights must be positive: {bad}")
        self.manifest = list(manifest)
        clip_weights = np.array([weights[e.subset] for e in self.manifest], dtype=np.float64)
        self._probs = clip_weights / clip_weights.sum()
        self.epoch_length = int(round(clip_weights.sum()))
        self._rng = np.random.default_rng(seed)

    def draw(self, n: int) -> list:
        idx = self._rng.choice(len(self.manifest), size=n, replace=True, p=self._probs)
        return [self.manifest[i] for i in idx]

    def epoch(self) -> list:
        return self.draw(self.epoch_length)

    def __iter__(self):
        while True:
            yield from self.epoch()


def build_sampler(manifest, weights: dict | None = None, seed: int = 0) -> WeightedClipSampler:
    return WeightedClipSampler(manifest, DEFAULT_SUBSET_WEIGHTS if weights is None else weights, seed)


def synthetic_clip(seed: int, duration_s: float, sample_rate: int = 16000) -> Waveform:
    """Deterministic voice-like test clip: harmonic tone with vibrato,
    a slow formant-ish filter sweep, and a little noise."""
    rng = np.random.default_rng(seed)
    n = round(duration_s * sample_rate)
    t = np.arange(n) / sample_rate
    f0 = rng.uniform(110.0, 280.0)
    vibrato = 1.0 + 0.02 * np.sin(2 * np.pi * rng.uniform(4.0, 7.0) * t)
    phase = 2 * np.pi * np.cumsum(f0 * vibrato) / sample_rate
    x = np.zeros(n)
    for harmonic, gain in ((1, 1.0), (2, 0.5), (3, 0.3), (4, 0.15)):
        x += gain * np.sin(harmonic * phase + rng.uniform(0, 2 * np.pi))
    envelope = 0.6 + 0.4 * np.sin(2 * np.pi * rng.uniform(0.5, 2.0) * t + rng.uniform(0, 2 * np.pi))
    x = x * envelope + 0.01 * rng.standard_normal(n)
    x *= 0.45 / max(np.abs(x).max(), 1e-9)
    return Waveform(x, sample_rate)


def build_synthetic_dataset(
    out_dir, n_clips: int = 8, seed: int = 0, min_duration_s: float = 1.2, max_duration_s: float = 3.5
) -> Path:
    """Write WAV fixtures plus a manifest covering all eight accents.

    Returns the manifest path.  Subsets cycle through the default
    weight table so sampling tests have realistic imbalance.
    """
    from .accents import ACCENT_CODES

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    subsets = list(DEFAULT_SUBSET_WEIGHTS)
    entries = []
    for i in range(n_clips):
        duration = float(rng.uniform(min_duration_s, max_duration_s))
        wave = synthetic_clip(seed=seed * 10007 + i, duration_s=duration)
        clip_path = out_dir / f"clip{i:03d}.wav"
        write_wav(clip_path, wave)
        entries.append(
            ManifestEntry(
                clip_path=clip_path,
                accent=AccentId(ACCENT_CODES[i % len(ACCENT_CODES)]),
                subset=subsets[i % len(subsets)],
                duration_s=duration,
            )
        )
    manifest_path = out_dir / "manifest.jsonl"
    write_manifest(manifest_path, entries)
    return manifest_path
