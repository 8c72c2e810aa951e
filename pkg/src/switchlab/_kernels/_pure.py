"""Vectorized numpy fallback for the compiled core.

Accumulation order matches ``_core.pyx`` (trend by trend, time ascending); the two
backends agree bit-for-bit whenever a call fits in one batch.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

# trends per vectorized batch; bounds the size of the expanded index arrays
_BATCH_SAMPLES = 1 << 22


def _window(filt, p: np.ndarray, w: int) -> np.ndarray:
    # out[i] = filt(p[i:i+w]) for i in 0..n-w
    full = filt(p, size=w, origin=-(w // 2), mode="nearest")
    return full[: p.size - w + 1]


def window_extrema(prices: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    n = prices.size
    t = np.arange(order, n - order, dtype=np.int64)
    if t.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    wmax = _window(maximum_filter1d, prices, order)
    wmin = _window(minimum_filter1d, prices, order)
    x = prices[t]
    is_max = (wmax[t - order] < x) & (wmax[t + 1] <= x)
    is_min = ~is_max & (wmin[t - order] > x) & (wmin[t + 1] >= x)
    return t[is_max], t[is_min]


def reduce_alternating(index: np.ndarray, kind: np.ndarray, prices: np.ndarray):
    if index.size == 0:
        return index.astype(np.int64), kind.astype(np.int8)
    run = np.concatenate([[0], np.cumsum(kind[1:] != kind[:-1])])
    # most extreme first, earliest index breaking ties
    key = -prices[index] * kind
    order = np.lexsort((index, key, run))
    first = np.concatenate([[True], run[order][1:] != run[order][:-1]])
    pick = order[first]
    return index[pick].astype(np.int64), kind[pick].astype(np.int8)


def _expand(lo: np.ndarray, hi: np.ndarray):
    lengths = hi - lo + 1
    owner = np.repeat(np.arange(lo.size), lengths)
    offsets = np.cumsum(lengths) - lengths
    t = np.arange(lengths.sum(), dtype=np.int64) - np.repeat(offsets, lengths) + lo[owner]
    return owner, t


def stack_windows(series, starts, peaks, nbins, half, normalize, min_duration):
    T = series.size - 1
    h = 1 if half else 0
    sums = np.zeros(nbins)
    sumsq = np.zeros(nbins)
    counts = np.zeros(nbins, dtype=np.int64)
    used = 0

    L = peaks - starts
    keep = (L >= min_duration) & (L > 0)
    starts, L = starts[keep], L[keep]
    lo = starts + 1
    hi = np.minimum(starts + 2 * L, T)
    ok = lo <= hi
    starts, L, lo, hi = starts[ok], L[ok], lo[ok], hi[ok]

    span = np.cumsum(hi - lo + 1)
    cut = 0
    while cut < starts.size:
        stop = int(np.searchsorted(span, (span[cut - 1] if cut else 0) + _BATCH_SAMPLES, side="right"))
        stop = max(stop, cut + 1)
        sl = slice(cut, stop)
        cut = stop
        owner, t = _expand(lo[sl], hi[sl])
        v = series[t]
        present = ~np.isnan(v)
        owner, t, v = owner[present], t[present], v[present]
        m = sl.stop - sl.start
        if normalize:
            wsum = np.bincount(owner, v, minlength=m)
            wcnt = np.bincount(owner, minlength=m)
            with np.errstate(divide="ignore", invalid="ignore"):
                wmean = wsum / wcnt
            good = (wcnt > 0) & (wmean > 0) & np.isfinite(wmean)
            scale = np.zeros(m)
            scale[good] = 1.0 / wmean[good]
            sel = good[owner]
            owner, t, v = owner[sel], t[sel], v[sel] * scale[owner[sel]]
            used += int(good.sum())
        else:
            used += m
        s = starts[sl][owner]
        b = ((2 * (t - s) - h) * nbins) // (4 * L[sl][owner])
        np.minimum(b, nbins - 1, out=b)
        sums += np.bincount(b, v, minlength=nbins)
        sumsq += np.bincount(b, v * v, minlength=nbins)
        counts += np.bincount(b, minlength=nbins)
    return sums, sumsq, counts, used
