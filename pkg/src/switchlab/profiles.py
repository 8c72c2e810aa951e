"""Epsilon-stacked conditional profiles and conditional increment distributions."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import EmptyDistribution, InvalidArgument
from .extrema import MAX, MIN, ExtremaSet, TrendSet, find_extrema, segment_trends
from .stats import Moments

QUANTITIES = ("volatility", "volume", "intertrade")
NORMALIZATIONS = ("none", "per-window")
# A sample at index t describes the interval (t-1, t]; a trend window stacks the
# intervals inside [start, start + 2L]. "mid" places it at t - 1/2, "end" at t.
PLACEMENTS = ("mid", "end")
DEFAULT_BINS = 100
DEFAULT_MIN_DURATION = 5


def local_volatility(path) -> np.ndarray:
    """Squared single-step increments, aligned with ``path.increments``."""
    return np.square(path.increments)


def trends_by_order(prices, orders) -> dict[int, TrendSet]:
    return {int(o): segment_trends(find_extrema(prices, o)) for o in orders}


@dataclass
class OrderPart:
    sums: np.ndarray
    sumsq: np.ndarray
    counts: np.ndarray
    n_trends: int = 0

    def __add__(self, other: "OrderPart") -> "OrderPart":
        return OrderPart(self.sums + other.sums, self.sumsq + other.sumsq,
                         self.counts + other.counts, self.n_trends + other.n_trends)


@dataclass(eq=False)
class StackedProfile:
    """Binned conditional average on the epsilon grid ``[0, 2]``.

    Per-order accumulators are kept separately; ``mean`` averages the per-order bin
    means with equal weight per order (orders with an empty bin are skipped there).
    """

    quantity: str
    nbins: int
    kind: int = MAX
    normalization: str = "per-window"
    placement: str = "end"
    parts: dict[int, OrderPart] = field(default_factory=dict)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(sorted(self.parts))

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 2.0, self.nbins + 1)

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.nbins) + 0.5) * (2.0 / self.nbins)

    @property
    def width(self) -> float:
        return 2.0 / self.nbins

    @property
    def count(self) -> np.ndarray:
        total = np.zeros(self.nbins, dtype=np.int64)
        for o in self.orders:
            total += self.parts[o].counts
        return total

    @property
    def n_trends(self) -> int:
        return sum(p.n_trends for p in self.parts.values())

    def _per_order(self):
        means, ses = [], []
        for o in self.orders:
            p = self.parts[o]
            c = p.counts.astype(np.float64)
            with np.errstate(divide="ignore", invalid="ignore"):
                m = np.where(c > 0, p.sums / c, np.nan)
                var = (p.sumsq - c * m * m) / (c - 1)
                se = np.where(c > 1, np.sqrt(np.maximum(var, 0.0) / c), np.nan)
            means.append(m)
            ses.append(se)
        return np.array(means).reshape(-1, self.nbins), np.array(ses).reshape(-1, self.nbins)

    @property
    def mean(self) -> np.ndarray:
        means, _ = self._per_order()
        k = np.sum(~np.isnan(means), axis=0)
        with np.errstate(invalid="ignore"):
            return np.where(k > 0, np.nansum(means, axis=0) / np.maximum(k, 1), np.nan)

    @property
    def sem(self) -> np.ndarray:
        means, ses = self._per_order()
        k = np.sum(~np.isnan(means), axis=0)
        with np.errstate(invalid="ignore"):
            return np.where(k > 0, np.sqrt(np.nansum(ses**2, axis=0)) / np.maximum(k, 1), np.nan)

    def bin_of(self, eps: float) -> int:
        """Index of the half-open bin ``[lo, hi)`` holding ``eps`` (``eps = 2`` -> last bin)."""
        return min(int(np.floor(eps * self.nbins / 2.0)), self.nbins - 1)

    def region(self, lo: float, hi: float) -> tuple[float, float]:
        """Pooled mean and standard error over bins whose centres lie in ``[lo, hi]``."""
        sel = (self.centers >= lo) & (self.centers <= hi)
        ms, vs = [], []
        for o in self.orders:
            p = self.parts[o]
            c = p.counts[sel].sum()
            if c < 2:
                continue
            s, sq = p.sums[sel].sum(), p.sumsq[sel].sum()
            m = s / c
            ms.append(m)
            vs.append(max(sq - c * m * m, 0.0) / (c - 1) / c)
        if not ms:
            return float("nan"), float("nan")
        k = len(ms)
        return float(np.mean(ms)), float(np.sqrt(np.sum(vs)) / k)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon_center", "mean", "count"])
        for c, m, n in zip(self.centers, self.mean, self.count):
            w.writerow([repr(float(c)), "" if np.isnan(m) else repr(float(m)), int(n)])
        return buf.getvalue()

    @classmethod
    def from_means(cls, means, counts=None, quantity: str = "", kind: int = MAX) -> "StackedProfile":
        """Single pseudo-order profile with the given bin means (NaN = empty bin)."""
        means = np.asarray(means, dtype=np.float64)
        if counts is None:
            counts = np.where(np.isnan(means), 0, 1)
        counts = np.asarray(counts, dtype=np.int64)
        m = np.where(counts > 0, np.nan_to_num(means), 0.0)
        prof = cls(quantity, means.size, kind)
        prof.parts[0] = OrderPart(m * counts, m * m * counts, counts, 0)
        return prof

    @classmethod
    def from_csv(cls, text: str, quantity: str = "", kind: int = MAX) -> "StackedProfile":
        """Rebuild a profile (as a single pseudo-order) from :meth:`to_csv` output."""
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or set(rows[0]) != {"epsilon_center", "mean", "count"}:
            raise InvalidArgument("profile CSV needs columns epsilon_center, mean, count")
        nbins = len(rows)
        counts = np.array([int(r["count"]) for r in rows], dtype=np.int64)
        means = np.array([float(r["mean"]) if r["mean"] else 0.0 for r in rows])
        centers = (np.arange(nbins) + 0.5) * (2.0 / nbins)
        if not np.allclose([float(r["epsilon_center"]) for r in rows], centers):
            raise InvalidArgument("profile CSV grid is not uniform on [0, 2]")
        return cls.from_means(np.where(counts > 0, means, np.nan), counts, quantity, kind)


def _check_grid(nbins):
    if int(nbins) != nbins or nbins < 1:
        raise InvalidArgument(f"grid needs a positive number of bins, got {nbins}")
    return int(nbins)


def stack_profile(
    series,
    trends,
    nbins: int = DEFAULT_BINS,
    normalization: str = "per-window",
    *,
    kind: int = MAX,
    placement: str = "end",
    min_duration: int = DEFAULT_MIN_DURATION,
    quantity: str = "",
) -> StackedProfile:
    """Stack ``series`` over the epsilon windows of every trend ending in a ``kind`` peak.

    ``series`` is indexed by price time ``t`` (NaN where undefined). ``trends`` is a
    :class:`TrendSet`, an iterable of them (one per order), or a mapping
    ``order -> TrendSet``. Per-window normalization divides each trend's samples by
    their mean over the window before accumulation.
    """
    nbins = _check_grid(nbins)
    if normalization not in NORMALIZATIONS:
        raise InvalidArgument(f"unknown normalization {normalization!r}")
    if placement not in PLACEMENTS:
        raise InvalidArgument(f"unknown placement {placement!r}")
    if kind not in (MAX, MIN):
        raise InvalidArgument(f"kind must be MAX (1) or MIN (-1), got {kind}")
    if isinstance(trends, TrendSet):
        trends = [trends]
    elif isinstance(trends, dict):
        trends = list(trends.values())
    series = np.ascontiguousarray(series, dtype=np.float64)
    prof = StackedProfile(quantity, nbins, kind, normalization, placement)
    for ts in trends:
        sel = ts.select(kind)
        sums, sumsq, counts, used = _kernels.stack_windows(
            series,
            np.ascontiguousarray(sel.start, np.int64),
            np.ascontiguousarray(sel.peak, np.int64),
            nbins,
            placement == "mid",
            normalization == "per-window",
            int(min_duration),
        )
        part = OrderPart(np.asarray(sums), np.asarray(sumsq), np.asarray(counts, np.int64), int(used))
        prof.parts[ts.order] = prof.parts[ts.order] + part if ts.order in prof.parts else part
    return prof


def merge_profiles(a: StackedProfile, b: StackedProfile) -> StackedProfile:
    """Count-weighted merge; orders present in both are summed bin by bin."""
    for attr in ("quantity", "nbins", "kind", "normalization", "placement"):
        if getattr(a, attr) != getattr(b, attr):
            raise InvalidArgument(f"cannot merge profiles with different {attr}: "
                                  f"{getattr(a, attr)!r} vs {getattr(b, attr)!r}")
    parts = {}
    for o in sorted(set(a.parts) | set(b.parts)):
        if o in a.parts and o in b.parts:
            parts[o] = a.parts[o] + b.parts[o]
        else:
            src = a.parts.get(o) or b.parts[o]
            parts[o] = OrderPart(src.sums.copy(), src.sumsq.copy(), src.counts.copy(), src.n_trends)
    return StackedProfile(a.quantity, a.nbins, a.kind, a.normalization, a.placement, parts)


@dataclass(eq=False)
class ConditionalDistribution:
    """Distribution of ``dp(t0 + offset)`` over peaks ``t0`` of one kind."""

    offset: int
    edges: np.ndarray
    counts: np.ndarray
    moments: Moments
    uncond: Moments
    n_neg: int = 0
    n_pos: int = 0
    n_zero: int = 0

    @property
    def n(self) -> int:
        return self.moments.n

    @property
    def histogram(self) -> np.ndarray:
        """Density on ``edges``; out-of-range samples are folded into the end bins."""
        return self.counts / (self.counts.sum() * np.diff(self.edges))

    @property
    def cond_mean(self) -> float:
        return self.moments.mean

    @property
    def cond_sem(self) -> float:
        return self.moments.sem

    @property
    def uncond_mean(self) -> float:
        return self.uncond.mean

    def skewness(self, bias: bool = True) -> float:
        return self.moments.skewness(bias)

    def merge(self, other: "ConditionalDistribution") -> "ConditionalDistribution":
        if self.offset != other.offset or not np.array_equal(self.edges, other.edges):
            raise InvalidArgument("conditional distributions differ in offset or edges")
        m = Moments(**vars(self.moments)).merge(other.moments)
        u = Moments(**vars(self.uncond)).merge(other.uncond)
        return ConditionalDistribution(self.offset, self.edges, self.counts + other.counts, m, u,
                                       self.n_neg + other.n_neg, self.n_pos + other.n_pos,
                                       self.n_zero + other.n_zero)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "density", "count"])
        for lo, hi, d, c in zip(self.edges[:-1], self.edges[1:], self.histogram, self.counts):
            w.writerow([repr(float(lo)), repr(float(hi)), repr(float(d)), int(c)])
        return buf.getvalue()


def conditional_increment_stats(
    increments,
    extrema,
    offset: int,
    *,
    kind: int | None = None,
    edges=None,
    bins: int = 60,
) -> ConditionalDistribution:
    """Collect ``dp(t0 + offset)`` over the given extrema.

    ``offset = 0`` is the move into the peak, ``p(t0) - p(t0 - 1)``. ``extrema`` is
    an :class:`ExtremaSet` (filtered to ``kind`` when given, otherwise it must be of a
    single kind) or an array of peak indices. ``increments`` may also be a path.
    """
    if hasattr(increments, "increments"):
        increments = increments.increments
    dp = np.asarray(increments, dtype=np.float64)
    if isinstance(extrema, ExtremaSet):
        kinds = np.unique(extrema.kind)
        if kind is None:
            if kinds.size > 1:
                raise InvalidArgument("extrema mix maxima and minima; pass kind=")
            idx = extrema.index
        else:
            idx = extrema.of_kind(kind)
    else:
        idx = np.asarray(extrema, dtype=np.int64)
    t = idx + int(offset)
    t = t[(t >= 1) & (t <= dp.size)]
    if t.size == 0:
        raise EmptyDistribution(f"no extrema leave dp(t0{int(offset):+d}) inside the series")
    x = dp[t - 1]
    if edges is None:
        span = max(np.max(np.abs(x)), np.max(np.abs(dp)), 1e-12)
        edges = np.linspace(-span, span, bins + 1)
    edges = np.asarray(edges, dtype=np.float64)
    b = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, edges.size - 2)
    counts = np.bincount(b, minlength=edges.size - 1)
    return ConditionalDistribution(
        int(offset), edges, counts, Moments.of(x), Moments.of(dp),
        int(np.sum(x < 0)), int(np.sum(x > 0)), int(np.sum(x == 0)),
    )
