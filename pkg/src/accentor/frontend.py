"""Character-level prediction frontend on the 20 ms grid.

The heavyweight ASR checkpoint never runs inside this package: its
frame-level character posteriors are either read from cache files
(written offline in the feature-dump format) or replaced by a
deterministic synthetic provider that spreads pseudo-text over the
frame grid, CTC-style.  Both providers satisfy the same contract, so
the rest of the pipeline is indifferent to which one is bound.
"""

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .config import FrontendConfig
from .dsp import Waveform, num_frames, read_frames, write_frames
from .errors import FeatureFormatError, FrontendUnavailableError

CHAR_HOP = 320  # samples per character frame at 16 kHz
BLANK = "<b>"
ROW_SUM_TOL = 1e-5
TARGET_MASS = 0.95  # probability mass on the intended symbol

CACHE_SUFFIX = ".chr"


@dataclass(frozen=True)
class CharVocab:
    """Ordered character inventory including the blank symbol."""

    symbols: tuple

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("vocabulary symbols must be unique")
        if BLANK not in self.symbols:
            raise ValueError(f"vocabulary must contain the blank symbol {BLANK!r}")
        if len(self.symbols) < 2:
            raise ValueError("vocabulary needs at least one non-blank symbol")

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def blank_index(self) -> int:
        return self.symbols.index(BLANK)

    def index(self, symbol: str) -> int:
        return self.symbols.index(symbol)


def default_vocab(cfg: FrontendConfig = FrontendConfig()) -> CharVocab:
    """26 letters + apostrophe + word boundary + blank (V = 29) by default."""
    return CharVocab(tuple(cfg.vocab) + (BLANK,))


@dataclass(frozen=True)
class CharPosteriorSequence:
    """(T, V) row-stochastic character posteriors at 20 ms hop."""

    frames: np.ndarray
    hop: int = CHAR_HOP

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float32)
        if frames.ndim != 2:
            raise ValueError("character posteriors must be 2-D")
        if frames.size:
            if frames.min() < 0:
                raise ValueError("character posteriors must be non-negative")
            sums = frames.sum(axis=1)
            worst = float(np.abs(sums - 1.0).max())
            if worst > ROW_SUM_TOL:
                raise ValueError(f"rows must sum to 1 within {ROW_SUM_TOL}, worst error {worst:g}")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return self.frames.shape[0]


class CharPredictionProvider(Protocol):
    """Provider contract: deterministic posteriors for a clip's waveform."""

    def predictions(self, clip_id: str, waveform: Waveform) -> CharPosteriorSequence: ...


def char_frame_count(n_samples: int) -> int:
    return num_frames(n_samples, CHAR_HOP)


def segment_clip_id(stem: str, seg_index: int) -> str:
    """Cache key for one fixed-length segment of a clip."""
    return f"{stem}.seg{seg_index:03d}"


def synthetic_predictions(
    text: str, duration_frames: int, vocab: CharVocab, seed: int
) -> CharPosteriorSequence:
    """Spread a text over the frame grid as near-one-hot posteriors.

    Each character gets an equal span of frames: the first half of the
    span argmaxes to the character, the rest to blank, so collapsing
    repeats and dropping blanks recovers the text.  The 5% off-target
    mass is drawn deterministically from ``seed``.
    """
    if duration_frames < len(text):
        raise ValueError(
            f"{duration_frames} frames cannot carry {len(text)} characters"
        )
    targets = np.full(duration_frames, vocab.blank_index, dtype=np.int64)
    if text:
        span = duration_frames // len(text)
        char_len = max(1, (span + 1) // 2)
        for i, ch in enumerate(text):
            start = i * span
            targets[start : start + char_len] = vocab.index(ch)

    rng = np.random.default_rng(seed)
    frames = np.empty((duration_frames, vocab.size), dtype=np.float64)
    for t in range(duration_frames):
        noise = rng.random(vocab.size - 1)
        noise *= (1.0 - TARGET_MASS) / noise.sum()
        frames[t] = np.insert(noise, targets[t], TARGET_MASS)
    return CharPosteriorSequence(frames.astype(np.float32))


def decode_argmax(seq: CharPosteriorSequence, vocab: CharVocab) -> str:
    """CTC-style decode: collapse repeats, then drop blanks."""
    ids = seq.frames.argmax(axis=1)
    out = []
    prev = -1
    for i in ids:
        if i != prev and i != vocab.blank_index:
            out.append(vocab.symbols[i])
        prev = i
    return "".join(out)


def as_one_hot(seq: CharPosteriorSequence) -> CharPosteriorSequence:
    """Replace posterior rows with exact argmax one-hots (ablation switch)."""
    frames = np.zeros_like(seq.frames)
    frames[np.arange(len(seq)), seq.frames.argmax(axis=1)] = 1.0
    return CharPosteriorSequence(frames, seq.hop)


def save_predictions(path, seq: CharPosteriorSequence) -> None:
    write_frames(path, seq.frames, seq.hop)


def load_cached_predictions(path, vocab: CharVocab) -> CharPosteriorSequence:
    """Read a cached posterior file, checking dimensions against the vocab."""
    frames, hop = read_frames(path)
    if frames.shape[1] != vocab.size:
        raise FeatureFormatError(
            f"{path}: {frames.shape[1]} posterior dims, vocabulary has {vocab.size}"
        )
    if hop != CHAR_HOP:
        raise FeatureFormatError(f"{path}: hop {hop} samples, expected {CHAR_HOP}")
    return CharPosteriorSequence(frames, hop)


class SyntheticFrontend:
    """Deterministic stand-in for the ASR checkpoint.

    Pseudo-text and the per-clip seed are derived from a digest of the
    waveform contents, so identical audio always produces identical
    posteriors regardless of call order.
    """

    def __init__(self, vocab: CharVocab, seed: int = 0):
        self.vocab = vocab
        self.seed = seed
        self._letters = [s for s in vocab.symbols if s != BLANK]

    def predictions(self, clip_id: str, waveform: Waveform) -> CharPosteriorSequence:
        frames = char_frame_count(len(waveform))
        digest = hashlib.blake2s(
            waveform.samples.tobytes() + self.seed.to_bytes(8, "little", signed=True)
        ).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        n_chars = min(frames, max(1, frames // 8)) if frames else 0
        text = "".join(rng.choice(self._letters) for _ in range(n_chars))
        return synthetic_predictions(text, frames, self.vocab, int.from_bytes(digest[8:12], "little"))


class CachedFrontend:
    """Reads per-clip posterior files named ``<clip_id>.chr`` from a directory."""

    def __init__(self, cache_dir, vocab: CharVocab):
        self.cache_dir = Path(cache_dir)
        self.vocab = vocab

    def path_for(self, clip_id: str) -> Path:
        return self.cache_dir / f"{clip_id}{CACHE_SUFFIX}"

    def predictions(self, clip_id: str, waveform: Waveform) -> CharPosteriorSequence:
        path = self.path_for(clip_id)
        if not path.exists():
            raise FrontendUnavailableError(
                f"no cached character predictions for clip {clip_id!r} at {path}"
            )
        seq = load_cached_predictions(path, self.vocab)
        expected = char_frame_count(len(waveform))
        if len(seq) != expected:
            raise FeatureFormatError(
                f"{path}: {len(seq)} frames cached, waveform needs {expected}"
            )
        return seq


def build_frontend(cfg: FrontendConfig, vocab: CharVocab):
    if cfg.kind == "synthetic":
        return SyntheticFrontend(vocab, cfg.synthetic_seed)
    if cfg.kind == "cached":
        if not cfg.cache_dir:
            raise FrontendUnavailableError("cached frontend requires frontend.cache_dir")
        return CachedFrontend(cfg.cache_dir, vocab)
    raise FrontendUnavailableError(f"unknown frontend kind {cfg.kind!r}")
