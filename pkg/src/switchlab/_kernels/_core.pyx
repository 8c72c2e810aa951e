# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: sliding-window extrema, trend reduction, epsilon stacking."""

import numpy as np

from libc.math cimport isnan, isfinite
from libc.stdint cimport int64_t, int8_t


cdef void _sliding_max(const double[::1] p, Py_ssize_t w, double[::1] out,
                       int64_t[::1] dq) noexcept nogil:
    # out[i] = max(p[i:i+w]) via a monotonic deque of indices
    cdef Py_ssize_t n = p.shape[0], i, head = 0, tail = 0
    for i in range(n):
        while tail > head and p[dq[tail - 1]] <= p[i]:
            tail -= 1
        dq[tail] = i
        tail += 1
        if dq[head] <= i - w:
            head += 1
        if i >= w - 1:
            out[i - w + 1] = p[dq[head]]


cdef void _sliding_min(const double[::1] p, Py_ssize_t w, double[::1] out,
                       int64_t[::1] dq) noexcept nogil:
    cdef Py_ssize_t n = p.shape[0], i, head = 0, tail = 0
    for i in range(n):
        while tail > head and p[dq[tail - 1]] >= p[i]:
            tail -= 1
        dq[tail] = i
        tail += 1
        if dq[head] <= i - w:
            head += 1
        if i >= w - 1:
            out[i - w + 1] = p[dq[head]]


def window_extrema(const double[::1] prices, Py_ssize_t order):
    """Indices of order-``order`` maxima and minima (strict on the left, weak on the right)."""
    cdef Py_ssize_t n = prices.shape[0]
    cdef Py_ssize_t m = n - order + 1
    cdef double[::1] wmax = np.empty(m, dtype=np.float64)
    cdef double[::1] wmin = np.empty(m, dtype=np.float64)
    cdef int64_t[::1] dq = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] maxima = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] minima = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t t, nmax = 0, nmin = 0
    cdef double x
    with nogil:
        _sliding_max(prices, order, wmax, dq)
        _sliding_min(prices, order, wmin, dq)
        for t in range(order, n - order):
            x = prices[t]
            if wmax[t - order] < x and wmax[t + 1] <= x:
                maxima[nmax] = t
                nmax += 1
            elif wmin[t - order] > x and wmin[t + 1] >= x:
                minima[nmin] = t
                nmin += 1
    return np.asarray(maxima[:nmax]).copy(), np.asarray(minima[:nmin]).copy()


def reduce_alternating(const int64_t[::1] index, const int8_t[::1] kind,
                       const double[::1] prices):
    """Collapse same-kind runs to their most extreme member (ties keep the earliest)."""
    cdef Py_ssize_t m = index.shape[0], i, k = 0
    cdef int64_t[::1] out_idx = np.empty(m, dtype=np.int64)
    cdef int8_t[::1] out_kind = np.empty(m, dtype=np.int8)
    cdef int64_t cur
    cdef int8_t ck
    if m == 0:
        return np.asarray(out_idx), np.asarray(out_kind)
    with nogil:
        cur = index[0]
        ck = kind[0]
        for i in range(1, m):
            if kind[i] == ck:
                if (ck > 0 and prices[index[i]] > prices[cur]) or \
                   (ck < 0 and prices[index[i]] < prices[cur]):
                    cur = index[i]
            else:
                out_idx[k] = cur
                out_kind[k] = ck
                k += 1
                cur = index[i]
                ck = kind[i]
        out_idx[k] = cur
        out_kind[k] = ck
        k += 1
    return np.asarray(out_idx[:k]).copy(), np.asarray(out_kind[:k]).copy()


def stack_windows(const double[::1] series, const int64_t[::1] starts,
                  const int64_t[::1] peaks, Py_ssize_t nbins, bint half,
                  bint normalize, Py_ssize_t min_duration):
    """Accumulate per-bin sum, sum of squares and count over trend epsilon windows.

    ``series`` is indexed by price time; NaN marks a missing sample. Sample t
    describes the interval (t - 1, t], so a window covers t = s + 1 .. s + 2L. With
    ``half`` the sample sits at t - 1/2, otherwise at t.
    """
    cdef Py_ssize_t T = series.shape[0] - 1
    cdef Py_ssize_t m = starts.shape[0], j, t, lo, hi, b
    cdef int64_t s, L, pos2, h = 1 if half else 0
    cdef double[::1] sums = np.zeros(nbins, dtype=np.float64)
    cdef double[::1] sumsq = np.zeros(nbins, dtype=np.float64)
    cdef int64_t[::1] counts = np.zeros(nbins, dtype=np.int64)
    cdef double acc, scale, v
    cdef Py_ssize_t nacc, used = 0
    with nogil:
        for j in range(m):
            s = starts[j]
            L = peaks[j] - s
            if L < min_duration or L <= 0:
                continue
            lo = s + 1
            hi = s + 2 * L
            if hi > T:
                hi = T
            if lo > hi:
                continue
            scale = 1.0
            if normalize:
                acc = 0.0
                nacc = 0
                for t in range(lo, hi + 1):
                    v = series[t]
                    if not isnan(v):
                        acc += v
                        nacc += 1
                if nacc == 0:
                    continue
                acc = acc / nacc
                if not (acc > 0.0) or not isfinite(acc):
                    continue
                scale = 1.0 / acc
            used += 1
            for t in range(lo, hi + 1):
                v = series[t]
                if isnan(v):
                    continue
                v = v * scale
                pos2 = 2 * (t - s) - h
                b = (pos2 * nbins) // (4 * L)
                if b >= nbins:
                    b = nbins - 1
                sums[b] += v
                sumsq[b] += v * v
                counts[b] += 1
    return np.asarray(sums), np.asarray(sumsq), np.asarray(counts), used
