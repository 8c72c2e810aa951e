"""Synthetic price, volume and intertrade-time series.

All generators work in transaction time ``t = 0..T``. ``prices[t]`` is the price
after trade ``t``; ``increments[t-1] = prices[t] - prices[t-1]``; attached volume
and intertrade series are aligned with ``increments``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from . import gp
from .gp import QmfParams
from .errors import InvalidArgument
from .seeding import rng
from .stats import pearson_corr

GAUSSIAN = "gaussian-unit"
DISCRETE = "discrete"
LAG1 = "lag1-anticorrelated"
INCREMENT_KINDS = (GAUSSIAN, DISCRETE, LAG1)


@dataclass(frozen=True)
class IncrementSpec:
    """Law of the iid (or AR(1)) price increments.

    ``p_zero`` is used only by ``discrete`` (mass at zero, the rest split evenly on
    -1/+1); ``rho`` only by ``lag1-anticorrelated`` (AR(1) coefficient, unit
    innovation variance).
    """

    kind: str = GAUSSIAN
    p_zero: float = 0.0
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in INCREMENT_KINDS:
            raise InvalidArgument(f"unknown increment kind {self.kind!r}")
        if not 0.0 <= self.p_zero <= 1.0:
            raise InvalidArgument(f"p_zero must lie in [0, 1], got {self.p_zero}")
        if not -1.0 < self.rho <= 0.0:
            raise InvalidArgument(f"rho must lie in (-1, 0], got {self.rho}")


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PricePath:
    prices: np.ndarray
    volume: np.ndarray | None = None
    intertrade: np.ndarray | None = None
    seed: int | None = None
    model: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "prices", _frozen(self.prices))
        if self.prices.ndim != 1 or self.prices.size < 2:
            raise InvalidArgument("a price path needs at least 2 prices")
        for name in ("volume", "intertrade"):
            series = getattr(self, name)
            if series is None:
                continue
            series = _frozen(series)
            if series.shape != (self.prices.size - 1,):
                raise InvalidArgument(f"{name} must have one entry per increment")
            if np.any(series < 0):
                raise InvalidArgument(f"{name} must be non-negative")
            object.__setattr__(self, name, series)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.prices)

    @property
    def n(self) -> int:
        return self.prices.size

    def time_indexed(self, series: np.ndarray) -> np.ndarray:
        """Place an increment-aligned series on the price-time axis (NaN at t=0)."""
        out = np.empty(self.prices.size)
        out[0] = np.nan
        out[1:] = series
        return out


def _check_n(n):
    if int(n) != n or n < 2:
        raise InvalidArgument(f"path length must be an integer >= 2, got {n}")
    return int(n)


def _cumulate(increments) -> np.ndarray:
    prices = np.empty(increments.size + 1)
    prices[0] = 0.0
    np.cumsum(increments, out=prices[1:])
    return prices


def draw_increments(m: int, spec: IncrementSpec, gen: np.random.Generator) -> np.ndarray:
    if spec.kind == GAUSSIAN:
        return gen.standard_normal(m)
    if spec.kind == DISCRETE:
        u = gen.random(m)
        half = spec.p_zero + (1.0 - spec.p_zero) / 2.0
        return np.where(u < spec.p_zero, 0.0, np.where(u < half, -1.0, 1.0))
    e = gen.standard_normal(m)
    # stationary start: first value has the AR(1) marginal variance
    e[0] /= np.sqrt(1.0 - spec.rho**2)
    return lfilter([1.0], [1.0, -spec.rho], e)


def gen_random_walk(n: int, spec: IncrementSpec = IncrementSpec(), seed: int = 0) -> PricePath:
    """Random walk ``p(t) = sum_{i<t} xi(i)`` with ``p(0) = 0``."""
    n = _check_n(n)
    xi = draw_increments(n - 1, spec, rng(seed, "price"))
    return PricePath(_cumulate(xi), seed=seed, model=spec.kind)


def gen_gbm(n: int, drift: float = 0.0, vol: float = 1.0, seed: int = 0) -> PricePath:
    """Geometric Brownian motion on the unit time grid, started at 1."""
    n = _check_n(n)
    if not vol > 0:
        raise InvalidArgument(f"vol must be > 0, got {vol}")
    g = rng(seed, "price")
    logret = (drift - 0.5 * vol**2) + vol * g.standard_normal(n - 1)
    return PricePath(np.exp(_cumulate(logret)), seed=seed, model="gbm")


def gen_qmf(
    n: int,
    params: QmfParams = QmfParams(),
    seed: int = 0,
    *,
    quad_tol: float = gp.DEFAULT_QUAD_TOL,
    dense_cap: int = gp.DEFAULT_DENSE_CAP,
) -> PricePath:
    """Quasi-multifractal walk: increments ``xi(i) * exp(omega(i))``.

    ``omega`` is the stationary Gaussian sequence with covariance from
    :func:`gp.cov_eval`; it and ``xi`` come from independent sub-streams.
    """
    n = _check_n(n)
    table = gp.build_cov_table(params, n - 1, quad_tol)
    omega = gp.sample_stationary_gaussian(table, n - 1, seed=seed, dense_cap=dense_cap)
    xi = rng(seed, "xi").standard_normal(n - 1)
    path = PricePath(_cumulate(xi * np.exp(omega)), seed=seed, model="qmf")
    path.meta["omega"] = omega
    return path


def attach_volume(path: PricePath, sigma_mu: float, seed: int = 0) -> PricePath:
    """Volume ``v(t) = | |dp(t)| + sigma_mu * mu(t) |`` with iid standard normal ``mu``."""
    if not sigma_mu >= 0:
        raise InvalidArgument(f"sigma_mu must be >= 0, got {sigma_mu}")
    absdp = np.abs(path.increments)
    mu = rng(seed, "volume").standard_normal(absdp.size)
    return replace(path, volume=np.abs(absdp + sigma_mu * mu), meta=dict(path.meta))


def calibrate_sigma_mu(
    target_corr: float,
    n_cal: int = 1_000_000,
    seed: int = 0,
    *,
    increments: np.ndarray | None = None,
    tol: float = 1e-4,
    max_iter: int = 200,
) -> float:
    """Noise scale giving ``corr(|dp|, v) = target_corr`` on a calibration path.

    Bisection on a fixed draw (Gaussian-unit increments unless ``increments`` is
    given); the correlation decreases monotonically in ``sigma_mu``.
    """
    if increments is None:
        increments = gen_random_walk(n_cal, seed=seed).increments
    absdp = np.abs(np.asarray(increments, dtype=np.float64))
    mu = rng(seed, "volume-calibration").standard_normal(absdp.size)

    def corr(s):
        return pearson_corr(absdp, np.abs(absdp + s * mu))

    if not 0 < target_corr < corr(0.0):
        raise InvalidArgument(
            f"target correlation {target_corr} not reachable (must lie in (0, {corr(0.0):.6f}))"
        )
    lo, hi = 0.0, 1.0
    while corr(hi) > target_corr:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise InvalidArgument(f"target correlation {target_corr} not reachable")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        c = corr(mid)
        if abs(c - target_corr) <= tol:
            return mid
        if c > target_corr:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def continuation_mask(increments: np.ndarray) -> np.ndarray:
    """True where ``dp(t)`` is nonzero and has the sign of the previous nonzero move."""
    sign = np.sign(increments)
    pos = np.where(sign != 0, np.arange(sign.size), -1)
    last = np.maximum.accumulate(pos)
    prev = np.zeros_like(sign)
    has_prev = last[:-1] >= 0
    prev[1:][has_prev] = sign[last[:-1][has_prev]]
    return (sign != 0) & (sign == prev)


def attach_intertrade(path: PricePath, p0: float, rate: float = 1.0, seed: int = 0) -> PricePath:
    """Intertrade times: exponential, except an atom at 0 (mass ``p0``) on continuations."""
    if not 0.0 <= p0 <= 1.0:
        raise InvalidArgument(f"p0 must lie in [0, 1], got {p0}")
    if not rate > 0:
        raise InvalidArgument(f"rate must be > 0, got {rate}")
    g = rng(seed, "intertrade")
    m = path.n - 1
    tau = g.exponential(1.0 / rate, m)
    atom = g.random(m) < p0
    tau[continuation_mask(path.increments) & atom] = 0.0
    return replace(path, intertrade=tau, meta=dict(path.meta))
