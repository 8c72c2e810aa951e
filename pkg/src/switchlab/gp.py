"""Log-volatility covariance of the quasi-multifractal model and a stationary sampler.

The covariance at lag ``k`` is

    B(k) = (sigma2 * phi / 2) * int_0^inf dx / ((1 + x) (1 + x + k))^(phi + 1/2)

evaluated after the substitution ``x = u / (1 - u)``, which turns it into
``int_0^1 (1 - u)^(2 phi - 1) (1 + k (1 - u))^-(phi + 1/2) du``. The endpoint
factor is handled as an algebraic weight by adaptive quadrature (QUADPACK QAWS).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.linalg import eigh, toeplitz

from .errors import InvalidArgument, NumericsError
from .seeding import rng

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_DENSE_CAP = 4096
DEFAULT_TOL_NEG = 1e-8


@dataclass(frozen=True)
class QmfParams:
    phi: float = 0.1
    sigma2: float = 5.0

    def __post_init__(self):
        if not self.phi > 0:
            raise InvalidArgument(f"phi must be > 0, got {self.phi}")
        if not self.sigma2 > 0:
            raise InvalidArgument(f"sigma2 must be > 0, got {self.sigma2}")


@dataclass(frozen=True, eq=False)
class CovarianceTable:
    params: QmfParams
    values: np.ndarray
    quad_tol: float

    def __len__(self):
        return self.values.size


def cov_eval(params: QmfParams, k: int, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Covariance ``B(k)`` to absolute error ``quad_tol``."""
    if k < 0 or int(k) != k:
        raise InvalidArgument(f"lag must be a non-negative integer, got {k}")
    if not quad_tol > 0:
        raise InvalidArgument(f"quad_tol must be > 0, got {quad_tol}")
    phi, a = params.phi, params.phi + 0.5
    scale = 0.5 * params.sigma2 * phi
    res = integrate.quad(
        lambda u: (1.0 + k * (1.0 - u)) ** (-a),
        0.0,
        1.0,
        weight="alg",
        wvar=(0.0, 2.0 * phi - 1.0),
        epsabs=quad_tol / scale,
        epsrel=0.0,
        limit=500,
        full_output=1,
    )
    value, abserr = res[0], res[1]
    if len(res) > 3 or not np.isfinite(value) or abserr * scale > quad_tol:
        raise NumericsError(
            f"quadrature for B({k}) did not converge",
            lag=int(k),
            estimate=value * scale,
            abserr=abserr * scale,
            message=res[3] if len(res) > 3 else "",
        )
    return scale * value


_TABLE_CACHE: dict[tuple[float, float, float], np.ndarray] = {}


def build_cov_table(params: QmfParams, K: int, quad_tol: float = DEFAULT_QUAD_TOL) -> CovarianceTable:
    """Tabulate ``B(0..K-1)``; lags are cached per (phi, sigma2, quad_tol)."""
    if K < 1:
        raise InvalidArgument(f"K must be >= 1, got {K}")
    key = (float(params.phi), float(params.sigma2), float(quad_tol))
    have = _TABLE_CACHE.get(key, np.empty(0))
    if have.size < K:
        extra = np.array([cov_eval(params, k, quad_tol) for k in range(have.size, K)])
        have = np.concatenate([have, extra])
        _TABLE_CACHE[key] = have
    values = have[:K].copy()
    values.setflags(write=False)
    return CovarianceTable(params, values, quad_tol)


def circulant_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Spectrum of the minimal circulant embedding (ring length ``2 (n - 1)``)."""
    row = np.concatenate([cov, cov[-2:0:-1]])
    return np.fft.fft(row).real


def sample_stationary_gaussian(
    table: CovarianceTable,
    n: int,
    seed: int = 0,
    *,
    size: int | None = None,
    method: str = "auto",
    dense_cap: int = DEFAULT_DENSE_CAP,
    tol_neg: float = DEFAULT_TOL_NEG,
) -> np.ndarray:
    """Zero-mean Gaussian sequence(s) of length ``n`` with covariance ``B(|i - j|)``.

    ``method`` is ``"circulant"``, ``"dense"`` (symmetric square root of the full
    covariance matrix) or ``"auto"``: circulant embedding, falling back to the dense
    root when the embedding has eigenvalues below ``-tol_neg * max``. Returns shape
    ``(n,)``, or ``(size, n)`` when ``size`` is given.
    """
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    if len(table) < n:
        raise InvalidArgument(f"covariance table has {len(table)} lags, need {n}")
    if method not in ("auto", "circulant", "dense"):
        raise InvalidArgument(f"unknown sampling method {method!r}")
    cov = np.asarray(table.values[:n], dtype=np.float64)
    g = rng(seed, "omega")
    shape = (1 if size is None else size, n)

    if n == 1:
        out = np.sqrt(cov[0]) * g.standard_normal(shape)
    elif method == "dense":
        out = _sample_dense(cov, shape, g)
    else:
        lam = circulant_eigenvalues(cov)
        worst = lam.min()
        if worst < -tol_neg * lam.max():
            if method == "auto" and n <= dense_cap:
                out = _sample_dense(cov, shape, g)
            else:
                raise NumericsError(
                    f"circulant embedding is not non-negative definite "
                    f"(most negative eigenvalue {worst:.3e}) and n={n} exceeds the dense cap",
                    most_negative_eigenvalue=float(worst),
                    n=n,
                    dense_cap=dense_cap,
                )
        else:
            out = _sample_circulant(np.clip(lam, 0.0, None), n, shape, g)
    return out[0] if size is None else out


def _sample_circulant(lam, n, shape, g):
    m = lam.size
    z = g.standard_normal((shape[0], m)) + 1j * g.standard_normal((shape[0], m))
    w = np.fft.fft(np.sqrt(lam / m) * z, axis=-1)
    return np.ascontiguousarray(w.real[:, :n])


def _sample_dense(cov, shape, g):
    lam, vec = eigh(toeplitz(cov))
    root = (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.T
    return g.standard_normal(shape) @ root
