# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pitch-tracking kernels.

Same contract as ``accentor._kernels_py``; selected at import by
``accentor.backend`` when the extension has been built.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log, sqrt

cnp.import_array()

DEF EPS = 1e-12


def acf_matrix(frames, int min_lag, int max_lag):
    """Normalized autocorrelation of each frame over a lag range."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.ascontiguousarray(frames, dtype=np.float64)
    cdef int n_frames = x.shape[0]
    cdef int width = x.shape[1]
    if not 1 <= min_lag <= max_lag < width:
        raise ValueError(f"invalid lag range [{min_lag}, {max_lag}] for width {width}")

    cdef int n_lags = max_lag - min_lag + 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n_frames, n_lags), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] csq = np.empty(width + 1, dtype=np.float64)
    cdef int t, j, i, lag
    cdef double acc, e_head, e_tail

    for t in range(n_frames):
        csq[0] = 0.0
        for i in range(width):
            csq[i + 1] = csq[i] + x[t, i] * x[t, i]
        for j in range(n_lags):
            lag = min_lag + j
            acc = 0.0
            for i in range(width - lag):
                acc += x[t, i] * x[t, i + lag]
            e_head = csq[width - lag]
            e_tail = csq[width] - csq[lag]
            out[t, j] = acc / (sqrt(e_head * e_tail) + EPS)
    return out


def viterbi_lags(cand_lags, cand_scores, cand_counts, double switch_cost):
    """Smoothest lag path through per-frame pitch candidates."""
    cdef cnp.ndarray[cnp.int32_t, ndim=2] lags = np.ascontiguousarray(cand_lags, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] scores = np.ascontiguousarray(cand_scores, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] counts = np.ascontiguousarray(cand_counts, dtype=np.int32)
    cdef int n_frames = lags.shape[0]
    cdef int max_k = lags.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] choice = np.full(n_frames, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] back = np.zeros((n_frames, max_k), dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] total = np.empty(max_k, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] total_new = np.empty(max_k, dtype=np.float64)
    cdef int t, run_end, k, j, kk, best_j
    cdef double best, cost, log_now

    t = 0
    while t < n_frames:
        if counts[t] == 0:
            t += 1
            continue
        run_end = t
        while run_end < n_frames and counts[run_end] > 0:
            run_end += 1

        for k in range(counts[t]):
            total[k] = scores[t, k]
        for kk in range(t + 1, run_end):
            for k in range(counts[kk]):
                log_now = log(<double>lags[kk, k])
                best = -1e300
                best_j = 0
                for j in range(counts[kk - 1]):
                    cost = total[j] - switch_cost * fabs(log_now - log(<double>lags[kk - 1, j]))
                    if cost > best:
                        best = cost
                        best_j = j
                total_new[k] = scores[kk, k] + best
                back[kk, k] = best_j
            for k in range(counts[kk]):
                total[k] = total_new[k]

        best = -1e300
        best_j = 0
        for k in range(counts[run_end - 1]):
            if total[k] > best:
                best = total[k]
                best_j = k
        k = best_j
        for kk in range(run_end - 1, t - 1, -1):
            choice[kk] = k
            k = back[kk, k]
        t = run_end
    return choice
