"""Streaming moments, Pearson correlation, Fisher-z intervals and skewness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import InsufficientData, InvalidArgument, UndefinedCorrelation

CHUNK = 1 << 16

# two-sided standard normal critical values
Z_CRIT = {0.80: 1.2815515655446004, 0.90: 1.6448536269514722, 0.95: 1.959963984540054,
          0.98: 2.3263478740408408, 0.99: 2.5758293035489004, 0.999: 3.2905267314919255}


@dataclass
class Moments:
    """Mergeable accumulator of count, mean and 2nd/3rd central moment sums."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    lo: float = math.inf
    hi: float = -math.inf

    @classmethod
    def of(cls, x) -> "Moments":
        acc = cls()
        x = np.asarray(x, dtype=np.float64).ravel()
        for i in range(0, x.size, CHUNK):
            c = x[i : i + CHUNK]
            mu = c.mean()
            d = c - mu
            acc.merge(cls(c.size, float(mu), float(d @ d), float((d * d) @ d), float(c.min()), float(c.max())))
        return acc

    def merge(self, other: "Moments") -> "Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.m2, self.m3, self.lo, self.hi = (
                other.n, other.mean, other.m2, other.m3, other.lo, other.hi)
            return self
        na, nb = self.n, other.n
        n = na + nb
        delta = other.mean - self.mean
        self.m3 = (self.m3 + other.m3 + delta**3 * na * nb * (na - nb) / n**2
                   + 3.0 * delta * (na * other.m2 - nb * self.m2) / n)
        self.m2 = self.m2 + other.m2 + delta**2 * na * nb / n
        self.mean = self.mean + delta * nb / n
        self.n = n
        self.lo, self.hi = min(self.lo, other.lo), max(self.hi, other.hi)
        return self

    @property
    def var(self) -> float:
        return self.m2 / self.n

    @property
    def sem(self) -> float:
        return math.sqrt(self.m2 / (self.n - 1) / self.n) if self.n > 1 else math.nan

    def skewness(self, bias: bool = True) -> float:
        if self.n < 3:
            raise InsufficientData("skewness needs at least 3 samples")
        if self.lo == self.hi or self.m2 <= 0:
            raise UndefinedCorrelation("skewness undefined for a constant sample")
        g1 = math.sqrt(self.n) * self.m3 / self.m2**1.5
        if bias:
            return g1
        return g1 * math.sqrt(self.n * (self.n - 1)) / (self.n - 2)


@dataclass
class CoMoments:
    """Mergeable accumulator for the Pearson correlation of paired samples."""

    n: int = 0
    mx: float = 0.0
    my: float = 0.0
    sxx: float = 0.0
    syy: float = 0.0
    sxy: float = 0.0
    const_x: bool = True
    const_y: bool = True
    _x0: float = math.nan
    _y0: float = math.nan

    def update(self, x, y) -> "CoMoments":
        x = np.asarray(x, dtype=np.float64).ravel()
        y = np.asarray(y, dtype=np.float64).ravel()
        if x.size != y.size:
            raise InvalidArgument(f"length mismatch: {x.size} vs {y.size}")
        for i in range(0, x.size, CHUNK):
            cx, cy = x[i : i + CHUNK], y[i : i + CHUNK]
            ax, ay = cx.mean(), cy.mean()
            dx, dy = cx - ax, cy - ay
            part = CoMoments(cx.size, float(ax), float(ay), float(dx @ dx), float(dy @ dy), float(dx @ dy),
                             bool(np.all(cx == cx[0])), bool(np.all(cy == cy[0])), float(cx[0]), float(cy[0]))
            self.merge(part)
        return self

    def merge(self, other: "CoMoments") -> "CoMoments":
        if other.n == 0:
            return self
        if self.n == 0:
            self.__dict__.update(other.__dict__)
            return self
        n = self.n + other.n
        f = self.n * other.n / n
        dx, dy = other.mx - self.mx, other.my - self.my
        self.sxx += other.sxx + dx * dx * f
        self.syy += other.syy + dy * dy * f
        self.sxy += other.sxy + dx * dy * f
        self.mx += dx * other.n / n
        self.my += dy * other.n / n
        self.const_x = self.const_x and other.const_x and self._x0 == other._x0
        self.const_y = self.const_y and other.const_y and self._y0 == other._y0
        self.n = n
        return self

    def corr(self) -> float:
        if self.n < 3:
            raise InsufficientData(f"correlation needs at least 3 pairs, got {self.n}")
        if self.const_x or self.const_y or self.sxx <= 0 or self.syy <= 0:
            raise UndefinedCorrelation("correlation undefined: constant input")
        r = self.sxy / math.sqrt(self.sxx * self.syy)
        return min(1.0, max(-1.0, r))


def pearson_corr(x, y) -> float:
    """Sample Pearson coefficient, accumulated in numerically stable chunks."""
    return CoMoments().update(x, y).corr()


def z_critical(level: float) -> float:
    if not 0 < level < 1:
        raise InvalidArgument(f"confidence level must lie in (0, 1), got {level}")
    z = Z_CRIT.get(round(level, 12))
    return z if z is not None else float(ndtri(0.5 * (1.0 + level)))


def fisher_ci(r: float, n: int, level: float = 0.95) -> tuple[float, float]:
    """Fisher-z confidence interval ``tanh(atanh(r) -/+ z / sqrt(n - 3))``."""
    if not abs(r) < 1:
        raise InvalidArgument(f"|r| must be < 1, got {r}")
    if n < 4:
        raise InsufficientData(f"Fisher interval needs n >= 4, got {n}")
    z = math.atanh(r)
    hw = z_critical(level) / math.sqrt(n - 3)
    return math.tanh(z - hw), math.tanh(z + hw)


@dataclass(frozen=True)
class CorrelationReport:
    r: float
    n: int
    ci_lo: float
    ci_hi: float
    level: float = 0.95

    def to_dict(self) -> dict:
        return {"r": self.r, "n": self.n, "ci_lo": self.ci_lo, "ci_hi": self.ci_hi, "level": self.level}


def correlation_report(x, y, level: float = 0.95) -> CorrelationReport:
    acc = CoMoments().update(x, y)
    r = acc.corr()
    lo, hi = fisher_ci(r, acc.n, level)
    return CorrelationReport(r, acc.n, lo, hi, level)


def skewness(sample, bias: bool = True) -> float:
    """Standardized third central moment; ``bias=False`` applies the usual G1 correction."""
    return Moments.of(sample).skewness(bias)
