"""Pure-numpy implementations of the pitch-tracking kernels.

Drop-in fallback for the compiled ``accentor._kernels`` extension; both
expose ``acf_matrix`` and ``viterbi_lags`` with identical semantics.
"""

import numpy as np

_EPS = 1e-12


def acf_matrix(frames, min_lag, max_lag):
    """Normalized autocorrelation of each frame over a lag range.

    Args:
        frames: (T, W) float64 array of analysis frames.
        min_lag: smallest lag in samples (>= 1).
        max_lag: largest lag in samples (< W).

    Returns:
        (T, max_lag - min_lag + 1) float64 array; entry [t, j] is the
        energy-normalized correlation of frame t at lag min_lag + j.
    """
    frames = np.ascontiguousarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise ValueError("frames must be 2-D")
    n_frames, width = frames.shape
    if not 1 <= min_lag <= max_lag < width:
        raise ValueError(f"invalid lag range [{min_lag}, {max_lag}] for width {width}")

    # prefix sums of squares give both window energies in O(1) per lag
    csq = np.zeros((n_frames, width + 1), dtype=np.float64)
    np.cumsum(frames * frames, axis=1, out=csq[:, 1:])

    n_lags = max_lag - min_lag + 1
    out = np.empty((n_frames, n_lags), dtype=np.float64)
    for j in range(n_lags):
        lag = min_lag + j
        num = np.einsum("ti,ti->t", frames[:, : width - lag], frames[:, lag:])
        e_head = csq[:, width - lag]
        e_tail = csq[:, width] - csq[:, lag]
        out[:, j] = num / (np.sqrt(e_head * e_tail) + _EPS)
    return out


def viterbi_lags(cand_lags, cand_scores, cand_counts, switch_cost):
    """Smoothest lag path through per-frame pitch candidates.

    Maximizes the summed candidate score minus ``switch_cost`` times the
    absolute log-ratio of consecutive lags.  Frames with zero candidates
    break the path; they receive -1 and the dynamic program restarts.

    Args:
        cand_lags: (T, K) int32 candidate lags, left-filled per frame.
        cand_scores: (T, K) float64 candidate scores.
        cand_counts: (T,) int32 number of valid candidates per frame.
        switch_cost: float cost weight on lag jumps.

    Returns:
        (T,) int32 chosen candidate index per frame, -1 where none.
    """
    cand_lags = np.ascontiguousarray(cand_lags, dtype=np.int32)
    cand_scores = np.ascontiguousarray(cand_scores, dtype=np.float64)
    cand_counts = np.ascontiguousarray(cand_counts, dtype=np.int32)
    n_frames = cand_lags.shape[0]
    choice = np.full(n_frames, -1, dtype=np.int32)

    t = 0
    while t < n_frames:
        if cand_counts[t] == 0:
            t += 1
            continue
        run_end = t
        while run_end < n_frames and cand_counts[run_end] > 0:
            run_end += 1
        _viterbi_run(cand_lags, cand_scores, cand_counts, switch_cost, t, run_end, choice)
        t = run_end
    return choice


def _viterbi_run(lags, scores, counts, switch_cost, start, end, choice):
    k0 = counts[start]
    total = scores[start, :k0].copy()
    back = np.zeros((end - start, lags.shape[1]), dtype=np.int32)
    log_lags = [np.log(lags[start, :k0].astype(np.float64))]
    for t in range(start + 1, end):
        k = counts[t]
        log_now = np.log(lags[t, :k].astype(np.float64))
        log_lags.append(log_now)
        trans = switch_cost * np.abs(log_now[None, :] - log_lags[-2][:, None])
        combined = total[:, None] - trans
        best_prev = np.argmax(combined, axis=0)
        total = scores[t, :k] + combined[best_prev, np.arange(k)]
        back[t - start, :k] = best_prev

    k = int(np.argmax(total))
    for t in range(end - 1, start - 1, -1):
        choice[t] = k
        k = int(back[t - start, k])
