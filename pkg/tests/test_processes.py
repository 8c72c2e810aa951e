from __future__ import annotations

import numpy as np
import pytest
from scipy import stats as sps

from switchlab.errors import InvalidArgument
from switchlab.gp import QmfParams, build_cov_table, sample_stationary_gaussian
from switchlab.processes import (DISCRETE, GAUSSIAN, LAG1, IncrementSpec, PricePath,
                                 attach_intertrade, attach_volume, calibrate_sigma_mu,
                                 continuation_mask, gen_gbm, gen_qmf, gen_random_walk)
from switchlab.stats import pearson_corr


def lag1(x):
    return pearson_corr(x[:-1], x[1:])


def test_minimal_path():
    p = gen_random_walk(2, seed=5)
    assert p.prices.shape == (2,) and p.prices[0] == 0.0
    assert p.increments.shape == (1,)


def test_gaussian_moments_and_ks():
    xi = gen_random_walk(1_000_001, seed=1).increments
    assert abs(xi.var() - 1) < 0.01
    assert abs(xi.mean()) < 3 / np.sqrt(xi.size)
    assert sps.kstest(xi[:100_000], "norm").pvalue > 0.01


def test_discrete_zero_fraction():
    xi = gen_random_walk(1_000_001, IncrementSpec(DISCRETE, p_zero=0.4), seed=2).increments
    assert set(np.unique(xi)) == {-1.0, 0.0, 1.0}
    assert abs(np.mean(xi == 0) - 0.4) < 0.002
    assert abs(np.mean(xi == 1) - np.mean(xi == -1)) < 0.003


def test_lag1_anticorrelated():
    rho = -0.3
    xi = gen_random_walk(400_001, IncrementSpec(LAG1, rho=rho), seed=3).increments
    assert abs(lag1(xi) - rho) < 0.01
    # unit innovations: stationary variance 1 / (1 - rho^2)
    assert xi.var() == pytest.approx(1 / (1 - rho**2), rel=0.02)


def test_determinism_and_independence_of_streams():
    a = gen_random_walk(1000, seed=7)
    b = gen_random_walk(1000, seed=7)
    np.testing.assert_array_equal(a.prices, b.prices)
    assert not np.array_equal(a.prices, gen_random_walk(1000, seed=8).prices)
    v = attach_volume(a, 1.0, seed=7)
    np.testing.assert_array_equal(v.prices, a.prices)


def test_path_arrays_are_readonly():
    p = attach_volume(gen_random_walk(10, seed=1), 0.5, seed=1)
    for arr in (p.prices, p.volume):
        with pytest.raises(ValueError):
            arr[0] = 1.0


@pytest.mark.parametrize("n", [0, 1, 2.5])
def test_bad_length(n):
    with pytest.raises(InvalidArgument):
        gen_random_walk(n)


@pytest.mark.parametrize("kw", [dict(kind="levy"), dict(p_zero=1.5), dict(p_zero=-0.1),
                                dict(rho=0.2), dict(rho=-1.0)])
def test_bad_increment_spec(kw):
    with pytest.raises(InvalidArgument):
        IncrementSpec(**kw)


def test_path_validation():
    with pytest.raises(InvalidArgument):
        PricePath(np.zeros(5), volume=np.ones(3))
    with pytest.raises(InvalidArgument):
        PricePath(np.zeros(5), intertrade=-np.ones(4))


def test_gbm():
    n, vol = 100_001, 0.01
    p = gen_gbm(n, drift=0.0, vol=vol, seed=4)
    assert p.prices[0] == 1.0 and np.all(p.prices > 0)
    logret = np.diff(np.log(p.prices))
    # log-increments have mean drift - vol^2 / 2
    assert abs(logret.mean() - (-0.5 * vol**2)) < 3 * vol / np.sqrt(n - 1)
    tiny = gen_gbm(100, vol=1e-12, seed=1).prices
    np.testing.assert_allclose(tiny, 1.0, atol=1e-9)
    with pytest.raises(InvalidArgument):
        gen_gbm(10, vol=0.0)


def test_qmf_omega_variance():
    # omega is long-memory: a single path's sample variance converges slowly, so pool
    # the second moment over many independent short realizations
    table = build_cov_table(QmfParams(0.1, 5.0), 256)
    w = sample_stationary_gaussian(table, 256, seed=21, size=4000)
    assert abs(np.mean(w**2) - 1.25) < 0.05 * 1.25


def test_qmf_increment_correlations():
    n = 1 << 18
    p = gen_qmf(n + 1, QmfParams(0.1, 5.0), seed=5)
    dp = p.increments
    # heavy tails inflate the spread of the plain sample autocorrelation; with
    # symmetric xi independent of omega the signs are iid given |dp|, so the
    # self-normalized lag-1 sum is standard normal under no correlation
    prod = dp[:-1] * dp[1:]
    assert abs(prod.sum() / np.sqrt(np.sum(prod**2))) < 3
    assert lag1(np.abs(dp)) > 3 / np.sqrt(n)
    assert p.meta["omega"].shape == (n,)


def test_qmf_deterministic():
    a = gen_qmf(5000, seed=2).prices
    np.testing.assert_array_equal(a, gen_qmf(5000, seed=2).prices)


def test_volume_zero_noise():
    p = gen_random_walk(1000, seed=1)
    np.testing.assert_array_equal(attach_volume(p, 0.0).volume, np.abs(p.increments))
    with pytest.raises(InvalidArgument):
        attach_volume(p, -1.0)


def test_calibration():
    s2 = calibrate_sigma_mu(0.2, 1_000_000, seed=0)
    s3 = calibrate_sigma_mu(0.3, 1_000_000, seed=0)
    assert s3 < s2
    p = attach_volume(gen_random_walk(1_000_001, seed=99), s2, seed=99)
    dp, v = p.increments, p.volume
    assert abs(pearson_corr(np.abs(dp), v) - 0.2) < 0.01
    assert abs(pearson_corr(dp, v)) < 3 / np.sqrt(dp.size)
    assert pearson_corr(np.abs(dp), v) > abs(pearson_corr(dp, v))


@pytest.mark.parametrize("target", [1.0, 1.5, 0.0, -0.2])
def test_calibration_unreachable(target):
    with pytest.raises(InvalidArgument):
        calibrate_sigma_mu(target, 10_000)


def test_continuation_mask():
    dp = np.array([1, 1, 0, 1, -1, 0, 0, -1, 1, 1], dtype=float)
    assert continuation_mask(dp).tolist() == [False, True, False, True, False, False, False,
                                              True, False, True]


def test_intertrade_atom():
    p = gen_random_walk(400_001, IncrementSpec(DISCRETE, p_zero=0.5), seed=6)
    t = attach_intertrade(p, 0.5, seed=6).intertrade
    cont = continuation_mask(p.increments)
    m = cont.sum()
    assert np.all(t >= 0)
    assert np.all(t[~cont] > 0)
    assert abs(np.mean(t[cont] == 0) - 0.5) < 3 * np.sqrt(0.25 / m)


def test_intertrade_edge_probabilities():
    p = gen_random_walk(10_001, IncrementSpec(DISCRETE, p_zero=0.3), seed=2)
    assert np.all(attach_intertrade(p, 0.0, seed=1).intertrade > 0)
    up = PricePath(np.arange(20.0))
    t = attach_intertrade(up, 1.0).intertrade
    assert t[0] > 0 and np.all(t[1:] == 0)
    with pytest.raises(InvalidArgument):
        attach_intertrade(up, 1.2)
    with pytest.raises(InvalidArgument):
        attach_intertrade(up, 0.5, rate=0.0)


def test_constants():
    assert IncrementSpec().kind == GAUSSIAN
