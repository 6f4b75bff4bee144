"""Deterministic signal-processing front end.

All operations are pure functions on immutable value types: resampling,
1.12 s segmentation, the 80-bin log-mel transform, MFCC+periodicity
frames, frame-rate upsampling, and the binary feature-dump format used
to cache per-clip features.

Frame geometry everywhere: centered frames (reflect padding of half a
window) with ``n_frames == ceil(n_samples / hop)``, so a standard
17920-sample training segment yields 224 frames on the 5 ms grid and
56 on the 20 ms grid.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft
import scipy.io.wavfile
import scipy.signal

from .config import FeatureConfig
from .errors import CorruptFileError, FeatureFormatError, FrameGridError

DEFAULT_FEATURES = FeatureConfig()

FRAME_DUMP_MAGIC = b"AFRM"
FRAME_DUMP_VERSION = 1
_HEADER = struct.Struct("<4sIIII")  # magic, version, n_frames, n_dims, hop_samples

INT16_SCALE = 32768.0


@dataclass(frozen=True)
class Waveform:
    """Mono audio samples in [-1, 1] plus their sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"waveform must be 1-D, got shape {samples.shape}")
        if samples.size and not np.isfinite(samples).all():
            raise ValueError("waveform contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class MelSpectrogram:
    """(T, n_mels) natural-log mel energies on a fixed hop grid."""

    frames: np.ndarray
    hop: int


@dataclass(frozen=True)
class AcousticFrames:
    """(T, n_mfcc + 1) MFCCs plus one periodicity value per 5 ms frame."""

    frames: np.ndarray
    hop: int
    win: int


@dataclass(frozen=True)
class PitchTrack:
    """Per-frame F0 with voicing flags and voicing-strength values.

    ``f0_hz[t] == 0`` exactly where ``voicing[t]`` is false; periodicity
    is the normalized autocorrelation peak at the chosen lag, zero for
    unvoiced frames.
    """

    f0_hz: np.ndarray
    voicing: np.ndarray
    periodicity: np.ndarray

    def __post_init__(self):
        f0 = np.asarray(self.f0_hz, dtype=np.float64)
        voiced = np.asarray(self.voicing, dtype=bool)
        per = np.asarray(self.periodicity, dtype=np.float64)
        if not (f0.shape == voiced.shape == per.shape):
            raise ValueError("pitch track arrays must share one shape")
        if np.any((f0 == 0) == voiced):
            raise ValueError("f0 must be zero exactly on unvoiced frames")
        object.__setattr__(self, "f0_hz", f0)
        object.__setattr__(self, "voicing", voiced)
        object.__setattr__(self, "periodicity", per)

    def __len__(self) -> int:
        return self.f0_hz.size


def read_wav(path) -> Waveform:
    """Load a PCM WAV file as a mono [-1, 1] waveform."""
    rate, data = scipy.io.wavfile.read(path)
    if data.dtype == np.int16:
        x = data / INT16_SCALE
    elif data.dtype == np.int32:
        x = data / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        x = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype}")
    if x.ndim == 2:  # downmix channels
        x = x.mean(axis=1)
    return Waveform(x, int(rate))


def write_wav(path, waveform: Waveform) -> None:
    """Write 16-bit PCM WAV."""
    clipped = np.clip(waveform.samples, -1.0, 1.0)
    ints = np.clip(np.round(clipped * INT16_SCALE), -32768, 32767).astype(np.int16)
    scipy.io.wavfile.write(path, waveform.sample_rate, ints)


def resample(waveform: Waveform, target_rate: int) -> Waveform:
    """Polyphase resampling; duration is preserved within one sample period."""
    if target_rate <= 0:
        raise ValueError(f"target rate must be positive, got {target_rate}")
    if waveform.sample_rate == target_rate:
        return waveform
    if len(waveform) == 0:
        return Waveform(np.zeros(0), target_rate)
    g = np.gcd(waveform.sample_rate, target_rate)
    up, down = target_rate // g, waveform.sample_rate // g
    out = scipy.signal.resample_poly(waveform.samples, up, down)
    return Waveform(np.clip(out, -1.0, 1.0), target_rate)


def segment(waveform: Waveform, seg_seconds: float = 1.12) -> list[Waveform]:
    """Split into fixed-length training segments.

    The final partial segment is zero-padded to full length when at
    least half filled and dropped otherwise.
    """
    seg_len = round(seg_seconds * waveform.sample_rate)
    x = waveform.samples
    out = [
        Waveform(x[start : start + seg_len], waveform.sample_rate)
        for start in range(0, len(x) - seg_len + 1, seg_len)
    ]
    remainder = len(x) % seg_len if seg_len else 0
    if remainder and 2 * remainder >= seg_len:
        tail = np.zeros(seg_len)
        tail[:remainder] = x[len(x) - remainder :]
        out.append(Waveform(tail, waveform.sample_rate))
    return out


def num_frames(n_samples: int, hop: int) -> int:
    """Frame count under centered framing: ceil(n_samples / hop)."""
    return -(-n_samples // hop)


def _pad_centered(x: np.ndarray, pad: int) -> np.ndarray:
    if pad == 0:
        return x
    if len(x) > pad:
        return np.pad(x, pad, mode="reflect")
    return np.pad(x, pad, mode="constant")


def frame_signal(x: np.ndarray, win: int, hop: int) -> np.ndarray:
    """Centered frames of a 1-D signal, ``ceil(len / hop)`` rows."""
    count = num_frames(len(x), hop)
    if count == 0:
        return np.zeros((0, win))
    padded = _pad_centered(np.asarray(x, dtype=np.float64), win // 2)
    windows = np.lib.stride_tricks.sliding_window_view(padded, win)[::hop]
    return np.ascontiguousarray(windows[:count])


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    n_mels: int, n_fft: int, sample_rate: int, fmin: float, fmax: float
) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, n_fft // 2 + 1)."""
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    bin_hz = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)
    lower, center, upper = edges_hz[:-2, None], edges_hz[1:-1, None], edges_hz[2:, None]
    rising = (bin_hz - lower) / np.maximum(center - lower, 1e-12)
    falling = (upper - bin_hz) / np.maximum(upper - center, 1e-12)
    return np.maximum(0.0, np.minimum(rising, falling))


def mel_spectrogram(waveform: Waveform, cfg: FeatureConfig = DEFAULT_FEATURES) -> MelSpectrogram:
    """Natural-log mel spectrogram with a fixed power floor.

    Silence maps every bin to ``log(cfg.log_floor)`` exactly; no input
    can produce a bin below that floor.
    """
    frames = frame_signal(waveform.samples, cfg.win, cfg.hop)
    if frames.shape[0] == 0:
        return MelSpectrogram(np.zeros((0, cfg.n_mels)), cfg.hop)
    spectrum = np.fft.rfft(frames * hann_window(cfg.win), n=cfg.n_fft)
    power = spectrum.real**2 + spectrum.imag**2
    fb = mel_filterbank(cfg.n_mels, cfg.n_fft, cfg.sample_rate, cfg.fmin, cfg.fmax)
    mel_power = power @ fb.T
    return MelSpectrogram(np.log(np.maximum(mel_power, cfg.log_floor)), cfg.hop)


def mfcc(waveform: Waveform, cfg: FeatureConfig = DEFAULT_FEATURES) -> np.ndarray:
    """(T, n_mfcc) cepstral coefficients c0..c(n_mfcc-1) from the log-mel bins."""
    logmel = mel_spectrogram(waveform, cfg).frames
    return scipy.fft.dct(logmel, type=2, norm="ortho", axis=1)[:, : cfg.n_mfcc]


def acoustic_frames(
    waveform: Waveform, pitch: PitchTrack, cfg: FeatureConfig = DEFAULT_FEATURES
) -> AcousticFrames:
    """MFCCs concatenated with the per-frame periodicity value."""
    coeffs = mfcc(waveform, cfg)
    if coeffs.shape[0] != len(pitch):
        raise FrameGridError(
            f"MFCC grid has {coeffs.shape[0]} frames but pitch track has {len(pitch)}"
        )
    periodicity = np.where(pitch.voicing, np.clip(pitch.periodicity, 0.0, 1.0), 0.0)
    return AcousticFrames(np.hstack([coeffs, periodicity[:, None]]), cfg.hop, cfg.win)


def upsample_frames(seq, factor: int = 4) -> np.ndarray:
    """Repeat each row ``factor`` times (20 ms grid -> 5 ms grid for factor 4)."""
    if int(factor) != factor or factor < 1:
        raise ValueError(f"upsample factor must be a positive integer, got {factor}")
    seq = np.asarray(seq)
    return np.repeat(seq, int(factor), axis=0)


def write_frames(path, frames: np.ndarray, hop_samples: int) -> None:
    """Write a frame matrix in the binary feature-dump format."""
    frames = np.ascontiguousarray(frames, dtype="<f4")
    if frames.ndim != 2:
        raise ValueError("frame dump requires a 2-D matrix")
    header = _HEADER.pack(
        FRAME_DUMP_MAGIC, FRAME_DUMP_VERSION, frames.shape[0], frames.shape[1], hop_samples
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(frames.tobytes())


def read_frames(path) -> tuple[np.ndarray, int]:
    """Read a feature dump; returns (float32 frames, hop_samples)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CorruptFileError(f"{path}: shorter than the feature-dump header")
    magic, version, n_frames, n_dims, hop_samples = _HEADER.unpack_from(raw)
    if magic != FRAME_DUMP_MAGIC:
        raise CorruptFileError(f"{path}: not a feature dump (bad magic {magic!r})")
    if version != FRAME_DUMP_VERSION:
        raise FeatureFormatError(
            f"{path}: feature-dump version {version}, expected {FRAME_DUMP_VERSION}"
        )
    expected = _HEADER.size + 4 * n_frames * n_dims
    if len(raw) != expected:
        raise CorruptFileError(f"{path}: expected {expected} bytes, found {len(raw)}")
    frames = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(n_frames, n_dims)
    return frames.copy(), hop_samples
