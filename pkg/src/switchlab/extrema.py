"""Local extrema of order ``dt``, alternating trends and the renormalized epsilon axis.

A maximum of order ``dt`` at ``t0`` needs ``p(t0) >= p(t)`` on the whole window
``[t0 - dt, t0 + dt]``, which must fit inside the series. Within a plateau only its
first index is reported, i.e. the left half of the window is compared strictly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidArgument

MAX, MIN = 1, -1


@dataclass(frozen=True)
class Extremum:
    t0: int
    kind: int  # MAX or MIN
    order: int
    value: float


@dataclass(frozen=True)
class Trend:
    start: int
    peak: int
    sign: int  # +1: min -> max, -1: max -> min

    @property
    def duration(self) -> int:
        return self.peak - self.start


@dataclass(frozen=True, eq=False)
class ExtremaSet:
    """All extrema of one order, sorted by index."""

    index: np.ndarray
    kind: np.ndarray
    value: np.ndarray
    order: int

    def __len__(self):
        return self.index.size

    def __iter__(self):
        for t, k, v in zip(self.index.tolist(), self.kind.tolist(), self.value.tolist()):
            yield Extremum(t, k, self.order, v)

    def of_kind(self, kind: int) -> np.ndarray:
        return self.index[self.kind == kind]

    @classmethod
    def from_records(cls, records, order: int | None = None) -> "ExtremaSet":
        records = sorted(records, key=lambda e: e.t0)
        if order is None:
            order = records[0].order if records else 0
        return cls(
            np.array([e.t0 for e in records], dtype=np.int64),
            np.array([e.kind for e in records], dtype=np.int8),
            np.array([e.value for e in records], dtype=np.float64),
            order,
        )


@dataclass(frozen=True, eq=False)
class TrendSet:
    start: np.ndarray
    peak: np.ndarray
    sign: np.ndarray
    order: int

    def __len__(self):
        return self.start.size

    def __iter__(self):
        for s, p, g in zip(self.start.tolist(), self.peak.tolist(), self.sign.tolist()):
            yield Trend(s, p, g)

    @property
    def duration(self) -> np.ndarray:
        return self.peak - self.start

    def select(self, sign: int) -> "TrendSet":
        m = self.sign == sign
        return TrendSet(self.start[m], self.peak[m], self.sign[m], self.order)


def find_extrema(prices, order: int) -> ExtremaSet:
    """Every order-``order`` maximum and minimum whose full window fits in the series."""
    p = np.ascontiguousarray(prices, dtype=np.float64)
    if int(order) != order or order < 1:
        raise InvalidArgument(f"order must be an integer >= 1, got {order}")
    order = int(order)
    if p.ndim != 1 or p.size < 2 * order + 1:
        raise InvalidArgument(f"series of length {p.size} too short for order {order}")
    if not np.all(np.isfinite(p)):
        raise InvalidArgument("prices must be finite")
    maxima, minima = _kernels.window_extrema(p, order)
    index = np.concatenate([maxima, minima])
    kind = np.concatenate([np.full(maxima.size, MAX, np.int8), np.full(minima.size, MIN, np.int8)])
    srt = np.argsort(index, kind="stable")
    index, kind = index[srt], kind[srt]
    return ExtremaSet(index, kind, p[index], order)


def segment_trends(extrema) -> TrendSet:
    """Alternating trends between consecutive opposite-kind extrema.

    Runs of same-kind extrema collapse to the most extreme member, ties to the
    earliest index. Fewer than two extrema give an empty set.
    """
    if not isinstance(extrema, ExtremaSet):
        extrema = ExtremaSet.from_records(list(extrema))
    if np.any(np.diff(extrema.index) <= 0):
        raise InvalidArgument("extrema must be sorted by strictly increasing index")
    # the reduction kernel reads values through an index; give it a compact view
    pos = np.arange(len(extrema), dtype=np.int64)
    keep, kind = _kernels.reduce_alternating(pos, np.ascontiguousarray(extrema.kind, np.int8),
                                             np.ascontiguousarray(extrema.value, np.float64))
    index = extrema.index[keep]
    if index.size < 2:
        empty = np.empty(0, np.int64)
        return TrendSet(empty, empty.copy(), np.empty(0, np.int8), extrema.order)
    return TrendSet(index[:-1].copy(), index[1:].copy(), kind[1:].astype(np.int8), extrema.order)


@dataclass(frozen=True)
class EpsilonWindow:
    """Affine map ``eps(t) = (t - start) / duration`` restricted to ``0 <= eps <= 2``."""

    trend: Trend
    support_start: int
    support_end: int
    complete: bool

    def epsilon_of(self, t):
        return (np.asarray(t, dtype=np.float64) - self.trend.start) / self.trend.duration

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.support_start, self.support_end + 1)


def epsilon_window(trend: Trend, series_len: int) -> EpsilonWindow:
    if trend.duration < 1:
        raise InvalidArgument(f"trend duration must be >= 1, got {trend.duration}")
    full_end = trend.start + 2 * trend.duration
    end = min(full_end, series_len - 1)
    return EpsilonWindow(trend, trend.start, end, end == full_end)
