"""Estimators and distances against the limit laws."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from trawlsim import (LevySeedSpec, LimitTarget, ecf_distance, cumulant,
                      empirical_cov_matrix, empirical_moments, exponential_trawl,
                      hurst_from_increments, ks_distance, simulate_fbm,
                      simulate_gaussian_ma, trawl_fourth_central_moment)


def rng(seed=0):
    return np.random.default_rng(seed)


# --- moments ------------------------------------------------------------------

def test_empirical_moments_degenerate_sample():
    m = empirical_moments(np.array([1.0, 1.0, 1.0]))
    assert m.var == 0.0
    assert m.central4 == 0.0


def test_empirical_moments_requires_two_samples():
    with pytest.raises(ValueError):
        empirical_moments(np.array([1.0]))


def test_empirical_moments_gaussian_oracle():
    x = rng(1).normal(size=100_000)
    m = empirical_moments(x)
    assert abs(m.var - 1.0) <= 3 * m.se_var
    assert abs(m.mean) <= 3 * m.se_mean


def test_empirical_moments_poisson_fourth():
    x = rng(2).poisson(2.0, size=100_000).astype(float)
    m = empirical_moments(x)
    # Poisson(2) central fourth moment: mu (1 + 3 mu) = 14
    assert m.central4 == pytest.approx(14.0, rel=0.05)


def test_limit_target_validation():
    LimitTarget(kind="normal", var=1.0)
    with pytest.raises(ValueError):
        LimitTarget(kind="normal", var=0.0, sigma2=0.0)


# --- fourth central moment of X_0 ---------------------------------------------

def test_trawl_fourth_central_moment_poisson():
    out = trawl_fourth_central_moment(LevySeedSpec.poisson(2.0),
                                      exponential_trawl(1.0))
    assert out["value"] == pytest.approx(14.0)
    assert out["paper_displayed"] == pytest.approx(6.0)


def test_trawl_fourth_central_moment_gaussian():
    out = trawl_fourth_central_moment(LevySeedSpec.gaussian(0.0, 1.0),
                                      exponential_trawl(1.0))
    assert out["value"] == pytest.approx(3.0)       # N(., 1) kurtosis


@settings(max_examples=30, derandomize=True, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.1, 3.0))
def test_fourth_moment_correct_dominates_displayed(intensity, lam):
    seed = LevySeedSpec.poisson(intensity)
    tr = exponential_trawl(lam)
    out = trawl_fourth_central_moment(seed, tr)
    leb_var = intensity * tr.lebesgue_A()
    # difference is exactly 2 (Leb(A) kappa_2)^2 >= 0
    assert out["value"] - out["paper_displayed"] \
        == pytest.approx(2.0 * leb_var**2, rel=1e-9)


# --- KS distance --------------------------------------------------------------

def test_ks_distance_oracle_draws():
    x = rng(3).normal(size=10_000)
    assert ks_distance(x, norm.cdf) < 1.63 / np.sqrt(10_000)


def test_ks_distance_trivial_cases():
    assert ks_distance(np.array([0.0]), norm.cdf) == pytest.approx(0.5)
    assert ks_distance(np.zeros(1000), norm.cdf) == pytest.approx(0.5)


@settings(max_examples=30, derandomize=True, deadline=None)
@given(st.lists(st.floats(-50.0, 50.0), min_size=2, max_size=200))
def test_ks_distance_bounded_and_permutation_invariant(xs):
    x = np.array(xs)
    d = ks_distance(x, norm.cdf)
    assert 0.0 <= d <= 1.0
    assert ks_distance(x[::-1], norm.cdf) == pytest.approx(d)
    # duplicating every sample leaves the empirical cdf unchanged
    assert ks_distance(np.repeat(x, 2), norm.cdf) == pytest.approx(d)


def test_ks_distance_adversarial_mass_dominates():
    # appending n copies of a far-right value forces distance >= ~1/2
    x = rng(4).normal(size=500)
    adversarial = np.concatenate((x, np.full(500, 1e9)))
    assert ks_distance(adversarial, norm.cdf) >= 0.499


# --- ECF distance -------------------------------------------------------------

def test_ecf_distance_exact_target_draws():
    seed = LevySeedSpec.poisson(1.0)
    n = 100_000
    x = rng(5).poisson(1.0, size=n).astype(float)
    z = np.arange(-5.0, 5.01, 0.25)
    assert ecf_distance(x, lambda v: cumulant(seed, v), 1.0, z) < 4.0 / np.sqrt(n)


def test_ecf_distance_zero_grid():
    x = rng(6).normal(size=100)
    assert ecf_distance(x, lambda v: -v**2 / 2, 1.0, np.array([0.0])) \
        == pytest.approx(0.0, abs=1e-12)


def test_ecf_distance_detects_shift():
    x = rng(7).normal(size=20_000) + 1.0
    z = np.array([np.pi])
    d = ecf_distance(x, lambda v: -v**2 / 2, 1.0, z)
    assert d >= abs(np.exp(1j * np.pi) - 1.0) * np.exp(-np.pi**2 / 2) - 0.05


@settings(max_examples=20, derandomize=True, deadline=None)
@given(st.lists(st.floats(-10.0, 10.0), min_size=2, max_size=100))
def test_ecf_distance_bounded_by_two(xs):
    x = np.array(xs)
    z = np.linspace(-5, 5, 21)
    d = ecf_distance(x, lambda v: -abs(v), 1.0, z)
    assert 0.0 <= d <= 2.0
    assert ecf_distance(x[::-1], lambda v: -abs(v), 1.0, z) == pytest.approx(d)


# --- covariance tables --------------------------------------------------------

def test_empirical_cov_matrix_iid_columns():
    v = rng(8).normal(size=(20_000, 3))
    cov, se = empirical_cov_matrix(v)
    for a in range(3):
        for b in range(3):
            target = 1.0 if a == b else 0.0
            assert abs(cov[a, b] - target) <= 3 * se[a, b]


def test_empirical_cov_matrix_fbm_oracle():
    times = np.array([0.5, 1.0, 2.0])
    p = simulate_fbm(0.75, times, rng(9), num_paths=20_000)
    cov, se = empirical_cov_matrix(p)
    H = 0.75
    for a in range(3):
        for b in range(3):
            t, s = times[a], times[b]
            target = 0.5 * (t**(2*H) + s**(2*H) - abs(t - s)**(2*H))
            assert abs(cov[a, b] - target) <= 4 * se[a, b]


def test_empirical_cov_matrix_ma_variance():
    draws = np.array([simulate_gaussian_ma(lambda s: np.exp(-s), [1.0], 20.0,
                                           0.02, rng(10 + i))
                      for i in range(4000)])
    cov, se = empirical_cov_matrix(np.column_stack((draws, draws)))
    assert abs(cov[0, 0] - 0.5) <= 4 * se[0, 0]


def test_empirical_cov_matrix_validates():
    with pytest.raises(ValueError):
        empirical_cov_matrix(np.zeros((1, 3)))


# --- Hurst estimation ---------------------------------------------------------

def test_hurst_brownian():
    bm = np.cumsum(rng(11).normal(size=(3000, 64)), axis=1)
    assert hurst_from_increments(bm, block=4) == pytest.approx(0.5, abs=0.05)


def test_hurst_fbm075():
    times = np.linspace(0.0, 32.0, 65)[1:]
    p = simulate_fbm(0.75, times, rng(12), num_paths=3000)
    assert hurst_from_increments(p, block=4) == pytest.approx(0.75, abs=0.05)


def test_hurst_linear_paths():
    t = np.arange(33, dtype=float)
    slopes = rng(13).normal(size=(2000, 1))
    assert hurst_from_increments(slopes * t) == pytest.approx(1.0, abs=1e-6)


def test_hurst_degenerate_signals():
    with pytest.raises(ValueError):
        hurst_from_increments(np.ones((100, 16)))
    with pytest.raises(ValueError):
        hurst_from_increments(np.zeros((100, 3)), block=2)
