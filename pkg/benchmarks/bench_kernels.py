#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the two hot pitch-tracking kernels on a realistic workload (one
5 s clip framed on the 5 ms grid) plus the end-to-end tracker.
"""

import argparse
import time

import numpy as np

from accentor import _kernels_py
from accentor.config import PitchConfig
from accentor.dsp import Waveform, frame_signal

try:
    from accentor import _kernels
except ImportError:
    _kernels = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seconds", type=float, default=5.0)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    pitch_cfg = PitchConfig()
    sr = 16000
    t = np.arange(round(args.seconds * sr)) / sr
    wave = 0.4 * np.sin(2 * np.pi * 180.0 * t) + 0.05 * np.sin(2 * np.pi * 850.0 * t)
    frames = frame_signal(wave, pitch_cfg.corr_win, 80)
    frames = frames - frames.mean(axis=1, keepdims=True)
    lag_min, lag_max = 27, 320
    print(f"workload: {frames.shape[0]} frames x {frames.shape[1]} window, lags {lag_min}..{lag_max}")

    rng = np.random.default_rng(0)
    n, k = frames.shape[0], 8
    lags = rng.integers(lag_min, lag_max, size=(n, k)).astype(np.int32)
    scores = rng.random((n, k))
    counts = np.full(n, k, dtype=np.int32)

    rows = []
    backends = [("numpy fallback", _kernels_py)]
    if _kernels is not None:
        backends.insert(0, ("compiled", _kernels))
    for name, mod in backends:
        acf_t = timeit(lambda: mod.acf_matrix(frames, lag_min, lag_max), args.repeats)
        vit_t = timeit(lambda: mod.viterbi_lags(lags, scores, counts, 0.6), args.repeats)
        rows.append((name, acf_t, vit_t))

    print(f"\n{'backend':<16} {'acf_matrix':>12} {'viterbi_lags':>13}")
    for name, acf_t, vit_t in rows:
        print(f"{name:<16} {acf_t * 1e3:>10.2f}ms {vit_t * 1e3:>11.2f}ms")
    if len(rows) == 2:
        print(f"{'speedup':<16} {rows[1][1] / rows[0][1]:>11.2f}x {rows[1][2] / rows[0][2]:>12.2f}x")

    from accentor.pitch import extract_pitch

    wf = Waveform(wave, sr)
    e2e = timeit(lambda: extract_pitch(wf), args.repeats)
    print(f"\nextract_pitch end to end ({args.seconds:.1f}s clip): {e2e * 1e3:.1f}ms")
    if _kernels is None:
        print("note: compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
