"""Fits of stacked profiles around the peak at eps = 1.

Both forms are fitted against the distance ``d = |eps - 1|`` on one side of the
peak: ``post`` uses bins with centre above 1, ``pre`` those below.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InsufficientData, InvalidArgument
from .profiles import StackedProfile

SIDES = ("pre", "post")
DEFAULT_BETA_GRID = np.round(np.arange(0.05, 0.95 + 1e-9, 0.005), 10)


@dataclass(frozen=True)
class PowerLawFit:
    side: str
    beta: float
    log_amplitude: float
    d_lo: float
    d_hi: float
    r2: float
    n_points: int
    n_excluded: int = 0
    weighted: bool = False
    error: str | None = None

    @property
    def range(self) -> tuple[float, float]:
        return self.d_lo, self.d_hi

    def to_dict(self) -> dict:
        return {"form": "power_law", **asdict(self)}


@dataclass(frozen=True)
class SingularFit:
    """``mean(d) ~ a - b * d**beta``."""

    side: str
    a: float
    b: float
    beta: float
    d_lo: float
    d_hi: float
    sse: float
    n_points: int

    @property
    def range(self) -> tuple[float, float]:
        return self.d_lo, self.d_hi

    def to_dict(self) -> dict:
        return {"form": "finite_singularity", **asdict(self)}


def side_points(profile: StackedProfile, side: str, d_range):
    """Distances, means and counts of populated bins inside ``d_range`` on ``side``."""
    if side not in SIDES:
        raise InvalidArgument(f"side must be 'pre' or 'post', got {side!r}")
    d_lo, d_hi = map(float, d_range)
    if not 0 < d_lo < d_hi:
        raise InvalidArgument(f"need 0 < d_lo < d_hi, got [{d_lo}, {d_hi}]")
    c = profile.centers
    d = c - 1.0 if side == "post" else 1.0 - c
    count = profile.count
    sel = (d > 0) & (d >= d_lo) & (d <= d_hi) & (count > 0)
    return d[sel], profile.mean[sel], count[sel]


def fit_power_law(profile: StackedProfile, side: str, d_range, *, weighted: bool = False) -> PowerLawFit:
    """OLS of ``log(mean)`` on ``log(d)``; the slope is the exponent."""
    d, y, n = side_points(profile, side, d_range)
    ok = np.isfinite(y) & (y > 0)
    excluded = int(np.sum(~ok))
    d, y, n = d[ok], y[ok], n[ok]
    if d.size < 3:
        raise InsufficientData(f"{d.size} usable bins on the {side} side in {tuple(d_range)}; need 3")
    x, ly = np.log(d), np.log(y)
    w = n.astype(np.float64) if weighted else np.ones_like(x)
    xm, ym = np.average(x, weights=w), np.average(ly, weights=w)
    dx, dy = x - xm, ly - ym
    sxx = np.sum(w * dx * dx)
    beta = np.sum(w * dx * dy) / sxx
    intercept = ym - beta * xm
    resid = dy - beta * dx
    sst = np.sum(w * dy * dy)
    r2 = 1.0 - np.sum(w * resid * resid) / sst if sst > 0 else 1.0
    return PowerLawFit(side, float(beta), float(intercept), float(d_range[0]), float(d_range[1]),
                       float(r2), int(d.size), excluded, weighted)


def fit_finite_singularity(profile: StackedProfile, side: str, d_range, beta_grid=None) -> SingularFit:
    """Grid search over ``beta`` with an exact linear solve for ``(a, b)`` at each node.

    Among equal residuals the smallest ``beta`` wins.
    """
    d, y, _ = side_points(profile, side, d_range)
    ok = np.isfinite(y)
    d, y = d[ok], y[ok]
    if d.size < 4:
        raise InsufficientData(f"{d.size} usable bins on the {side} side in {tuple(d_range)}; need 4")
    grid = DEFAULT_BETA_GRID if beta_grid is None else np.sort(np.asarray(beta_grid, dtype=np.float64))
    if grid.size == 0 or np.any(grid <= 0):
        raise InvalidArgument("beta grid must be non-empty and positive")
    fits = []
    for beta in grid:
        A = np.column_stack([np.ones_like(d), -(d**beta)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        r = A @ coef - y
        fits.append((float(r @ r), float(beta), float(coef[0]), float(coef[1])))
    sse = np.array([f[0] for f in fits])
    best = sse.min()
    i = int(np.argmax(sse <= best * (1 + 1e-9) + 1e-20 * (1.0 + y @ y)))
    s, beta, a, b = fits[i]
    return SingularFit(side, a, b, beta, float(d_range[0]), float(d_range[1]), s, int(d.size))


def scan_fit_range(profile: StackedProfile, side: str, candidates, *, weighted: bool = False) -> list[PowerLawFit]:
    """One power-law fit per candidate range; failures are kept as marked entries."""
    out = []
    for rng_ in candidates:
        try:
            out.append(fit_power_law(profile, side, rng_, weighted=weighted))
        except InsufficientData as exc:
            out.append(PowerLawFit(side, float("nan"), float("nan"), float(rng_[0]), float(rng_[1]),
                                   float("nan"), 0, 0, weighted, error=str(exc)))
    return out
