"""Autocorrelation pitch tracker on the 5 ms frame grid.

Candidate lags come from local maxima of the energy-normalized
autocorrelation of centered analysis windows; a dynamic-programming
pass picks the smoothest lag path, with a small bias toward shorter
lags so sub-harmonic peaks of periodic signals lose ties.  Voicing
combines a frame-energy gate with a peak-strength threshold.

The frame grid matches every other 5 ms feature stream: a waveform of
``n`` samples yields ``ceil(n / hop)`` frames.
"""

import numpy as np

from . import backend
from .config import FeatureConfig, PitchConfig
from .dsp import DEFAULT_FEATURES, PitchTrack, Waveform, frame_signal

DEFAULT_PITCH = PitchConfig()


def extract_pitch(
    waveform: Waveform,
    cfg: FeatureConfig = DEFAULT_FEATURES,
    pitch_cfg: PitchConfig = DEFAULT_PITCH,
) -> PitchTrack:
    """Track F0 over the waveform; zero/unvoiced outside [fmin_hz, fmax_hz]."""
    if waveform.sample_rate != cfg.sample_rate:
        raise ValueError(
            f"pitch tracker expects {cfg.sample_rate} Hz audio, got {waveform.sample_rate}"
        )
    if len(waveform) < cfg.win:
        raise ValueError(f"waveform shorter than one analysis window ({cfg.win} samples)")

    sr = cfg.sample_rate
    lag_min = int(np.ceil(sr / pitch_cfg.fmax_hz))
    lag_max = int(np.floor(sr / pitch_cfg.fmin_hz))

    frames = frame_signal(waveform.samples, pitch_cfg.corr_win, cfg.hop)
    frames = frames - frames.mean(axis=1, keepdims=True)
    rms = np.sqrt(np.mean(frames**2, axis=1))
    acf = backend.acf_matrix(frames, lag_min, lag_max)

    n_frames = frames.shape[0]
    max_k = pitch_cfg.max_candidates
    cand_lags = np.zeros((n_frames, max_k), dtype=np.int32)
    cand_scores = np.zeros((n_frames, max_k), dtype=np.float64)
    cand_counts = np.zeros(n_frames, dtype=np.int32)
    peak_values = np.zeros((n_frames, max_k), dtype=np.float64)

    for t in range(n_frames):
        row = acf[t]
        peak_idx = _local_maxima(row)
        if peak_idx.size == 0 or rms[t] <= pitch_cfg.energy_threshold:
            continue
        frame_max = row[peak_idx].max()
        if frame_max < pitch_cfg.acf_threshold:
            continue
        keep = peak_idx[row[peak_idx] >= pitch_cfg.peak_ratio * frame_max]
        if keep.size > max_k:
            keep = keep[np.argsort(row[keep])[::-1][:max_k]]
        k = keep.size
        lags = keep + lag_min
        cand_lags[t, :k] = lags
        peak_values[t, :k] = row[keep]
        cand_scores[t, :k] = row[keep] - pitch_cfg.lag_bias * np.log(lags / lag_min)
        cand_counts[t] = k

    choice = backend.viterbi_lags(cand_lags, cand_scores, cand_counts, pitch_cfg.switch_cost)

    f0 = np.zeros(n_frames)
    periodicity = np.zeros(n_frames)
    voicing = choice >= 0
    for t in np.flatnonzero(voicing):
        k = choice[t]
        lag = float(cand_lags[t, k])
        lag += _parabolic_offset(acf[t], int(lag) - lag_min)
        f0[t] = np.clip(sr / lag, pitch_cfg.fmin_hz, pitch_cfg.fmax_hz)
        periodicity[t] = np.clip(peak_values[t, k], 0.0, 1.0)
    return PitchTrack(f0, voicing, periodicity)


def _local_maxima(row: np.ndarray) -> np.ndarray:
    """Indices of strict-rise / non-strict-fall local maxima, edges included."""
    idx = np.flatnonzero((row[1:-1] > row[:-2]) & (row[1:-1] >= row[2:])) + 1
    edges = []
    if row.size >= 2 and row[0] > row[1]:
        edges.append(0)
    if row.size >= 2 and row[-1] > row[-2]:
        edges.append(row.size - 1)
    if edges:
        idx = np.sort(np.concatenate([idx, np.asarray(edges, dtype=idx.dtype)]))
    return idx


def _parabolic_offset(row: np.ndarray, j: int) -> float:
    """Sub-sample peak refinement from the three points around index j."""
    if j <= 0 or j >= row.size - 1:
        return 0.0
    ym, y0, yp = row[j - 1], row[j], row[j + 1]
    denom = ym - 2.0 * y0 + yp
    if denom >= 0.0:
        return 0.0
    return float(np.clip(0.5 * (ym - yp) / denom, -0.5, 0.5))
