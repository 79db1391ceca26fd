"""Seed families: exponents, moments, BG index and exact cell laws."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from trawlsim import (InfiniteMomentError, LevySeedSpec, bg_index, cell_sample,
                      cumulant, fixed_jumps, normal_jumps, seed_moments,
                      stable_exponent)
from trawlsim.levy import LevyMeasureSpec, stable_sigma_rho


def rng(seed=0):
    return np.random.default_rng(seed)


# --- characteristic exponents ------------------------------------------------

def test_cumulant_poisson_closed_form():
    # lambda (e^{iz} - 1) at lambda = 2, z = 1
    val = cumulant(LevySeedSpec.poisson(2.0), 1.0)
    assert val == pytest.approx(-0.91939539 + 1.68294197j, abs=1e-7)


def test_cumulant_gaussian():
    assert cumulant(LevySeedSpec.gaussian(0.0, 1.0), 2.0) == pytest.approx(-2.0)
    assert cumulant(LevySeedSpec.gaussian(1.0, 0.0), 3.0) == pytest.approx(3.0j)


def test_cumulant_zero_is_zero_for_every_family():
    seeds = [
        LevySeedSpec.poisson(2.0),
        LevySeedSpec.gaussian(0.5, 1.0),
        LevySeedSpec.compound_poisson(1.0, normal_jumps(0.0, 2.0)),
        LevySeedSpec.stable(1.5, 1.0, 0.5),
        LevySeedSpec.custom(0.1, 1.0, LevyMeasureSpec(
            nu_plus=lambda x: np.exp(-x), nu_minus=lambda x: 0.0)),
    ]
    for seed in seeds:
        assert cumulant(seed, 0.0) == pytest.approx(0.0, abs=1e-9)


def test_cumulant_compound_poisson_matches_jump_cf():
    jumps = normal_jumps(0.3, 1.1)
    seed = LevySeedSpec.compound_poisson(2.0, jumps, gamma=0.0)
    for z in (0.4, -1.3):
        expected = 2.0 * (jumps.char_fn(z) - 1.0)
        assert cumulant(seed, z) == pytest.approx(expected, abs=1e-9)


def test_cumulant_custom_matches_exponential_density_oracle():
    # nu(dx) = e^{-x} dx on x > 0: int (e^{izx} - 1 - izx 1_{|x|<=1}) e^{-x} dx
    nu = LevyMeasureSpec(nu_plus=lambda x: np.exp(-x), nu_minus=lambda x: 0.0)
    seed = LevySeedSpec.custom(0.2, 0.7, nu)
    for z in (0.6, 1.3, -2.1):
        closed = (1.0 / (1.0 - 1j * z) - 1.0) \
            - 1j * z * (1.0 - 2.0 * np.exp(-1.0)) \
            + 0.2j * z - 0.5 * 0.7**2 * z**2
        assert cumulant(seed, z) == pytest.approx(closed, abs=1e-8)


def test_stable_exponent_examples():
    # beta = 0.5, K_+ = K_- = 1: sigma = Gamma(1.5)/(0.5*0.5) cos(pi/4) * 2
    assert stable_exponent(0.5, 1.0, 1.0, 0.0, 1.0) \
        == pytest.approx(-5.0132565, abs=1e-6)
    assert stable_exponent(1.0, 1.0, 1.0, 0.0, 2.0) \
        == pytest.approx(-2 * np.pi, abs=1e-12)
    assert stable_exponent(1.2, 1.0, 0.3, 3.5, 0.0) == 0.0


def test_stable_exponent_symmetry_and_skew_sign():
    z = 1.7
    sym = stable_exponent(1.5, 1.0, 1.0, 0.0, z)
    assert sym.imag == pytest.approx(0.0, abs=1e-12)
    skew = stable_exponent(1.5, 2.0, 0.5, (2.0 - 0.5) / 0.5, z)
    assert skew.imag != pytest.approx(0.0, abs=1e-6)


def test_stable_exponent_rejects_bad_parameters():
    with pytest.raises(ValueError):
        stable_exponent(2.0, 1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        stable_exponent(1.0, 1.0, 0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        stable_exponent(1.5, 0.0, 0.0, 0.0, 1.0)


def test_stable_sigma_monotone_in_total_mass():
    sig = [stable_sigma_rho(1.3, k, k)[0] for k in (0.5, 1.0, 2.0)]
    assert sig[0] < sig[1] < sig[2]


@settings(max_examples=40, derandomize=True, deadline=None)
@given(st.floats(-10.0, 10.0))
def test_exponent_conjugate_symmetry_and_cf_bound(z):
    for seed in (LevySeedSpec.poisson(1.5),
                 LevySeedSpec.gaussian(0.3, 1.2),
                 LevySeedSpec.stable(1.4, 1.0, 0.5)):
        psi = cumulant(seed, z)
        assert cumulant(seed, -z) == pytest.approx(np.conj(psi), abs=1e-9)
        assert abs(np.exp(psi)) <= 1.0 + 1e-12


# --- seed construction and validation ----------------------------------------

def test_seed_constructors_reject_invalid():
    with pytest.raises(ValueError):
        LevySeedSpec.poisson(0.0)
    with pytest.raises(ValueError):
        LevySeedSpec.gaussian(0.0, -1.0)
    with pytest.raises(ValueError):
        LevySeedSpec.stable(2.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        LevySeedSpec.stable(1.0, 1.0, 0.5)          # beta=1 must be symmetric
    with pytest.raises(ValueError):
        LevySeedSpec.stable(1.5, 1.0, 0.5, gamma_s=99.0)
    with pytest.raises(ValueError):
        LevySeedSpec.compound_poisson(-1.0, fixed_jumps(1.0))


def test_strict_stability_drift_is_derived():
    seed = LevySeedSpec.stable(1.5, 2.0, 0.5)
    assert seed.gamma == pytest.approx((2.0 - 0.5) / 0.5)


# --- moments ------------------------------------------------------------------

def test_seed_moments_poisson():
    m = seed_moments(LevySeedSpec.poisson(2.0))
    assert (m.mean, m.variance, m.fourth_cumulant) == (2.0, 2.0, 2.0)


def test_seed_moments_gaussian():
    m = seed_moments(LevySeedSpec.gaussian(1.0, 2.0))
    assert (m.mean, m.variance, m.fourth_cumulant) == (1.0, 4.0, 0.0)


def test_seed_moments_stable_is_infinite():
    with pytest.raises(InfiniteMomentError):
        seed_moments(LevySeedSpec.stable(1.5, 1.0, 1.0))


def test_seed_moments_compound_poisson_normal_jumps():
    m = seed_moments(LevySeedSpec.compound_poisson(2.0, normal_jumps(0.0, 1.0)))
    # kappa_k = rate * E J^k: var = 2, kappa_4 = 2 * E J^4 = 6
    assert m.mean == pytest.approx(0.0, abs=1e-9)
    assert m.variance == pytest.approx(2.0, abs=1e-9)
    assert m.fourth_cumulant == pytest.approx(6.0, abs=1e-6)


def test_seed_moments_custom_by_tail_integration():
    nu = LevyMeasureSpec(nu_plus=lambda x: np.exp(-x), nu_minus=lambda x: 0.0)
    m = seed_moments(LevySeedSpec.custom(0.0, 1.0, nu))
    # var = b^2 + int x^2 e^{-x} = 1 + 2; kappa_4 = 4! = 24
    assert m.variance == pytest.approx(3.0, rel=1e-6)
    assert m.fourth_cumulant == pytest.approx(24.0, rel=1e-6)


# --- Blumenthal-Getoor index --------------------------------------------------

def test_bg_index_named_families():
    assert bg_index(LevySeedSpec.poisson(3.0)) == 0.0
    assert bg_index(LevySeedSpec.gaussian(0.0, 1.0)) == 0.0
    assert bg_index(LevySeedSpec.compound_poisson(1.0, fixed_jumps(1.0))) == 0.0


@pytest.mark.parametrize("beta", [0.3, 0.7, 1.0, 1.4, 1.8])
def test_bg_index_stable_grid(beta):
    kp = 1.0
    km = 1.0 if beta == 1.0 else 0.5
    assert bg_index(LevySeedSpec.stable(beta, kp, km)) == beta


def test_bg_index_custom_power_tail():
    nu = LevyMeasureSpec(nu_plus=lambda x: x**-0.7,
                         nu_minus=lambda x: 0.5 * x**-0.7)
    assert bg_index(LevySeedSpec.custom(0.0, 0.0, nu)) == pytest.approx(0.7, abs=0.02)


def test_bg_index_custom_finite_activity():
    nu = LevyMeasureSpec(nu_plus=lambda x: np.exp(-x), nu_minus=lambda x: 0.0)
    assert bg_index(LevySeedSpec.custom(0.0, 1.0, nu)) == pytest.approx(0.0, abs=0.01)


# --- cell sampling ------------------------------------------------------------

def test_cell_sample_zero_area_is_zero():
    for seed in (LevySeedSpec.poisson(2.0), LevySeedSpec.gaussian(0.0, 1.0),
                 LevySeedSpec.stable(1.2, 1.0, 1.0)):
        out = cell_sample(seed, np.zeros(16), rng())
        assert np.all(out == 0.0)


def test_cell_sample_rejects_negative_area():
    with pytest.raises(ValueError):
        cell_sample(LevySeedSpec.poisson(1.0), -0.5, rng())


def test_cell_sample_poisson_mean():
    draws = cell_sample(LevySeedSpec.poisson(2.0), np.full(100_000, 0.5), rng(1))
    se = np.sqrt(1.0 / 100_000)
    assert abs(draws.mean() - 1.0) <= 3 * se


def test_cell_sample_gaussian_variance():
    draws = cell_sample(LevySeedSpec.gaussian(0.0, 1.0), np.full(100_000, 4.0),
                        rng(2))
    assert draws.var(ddof=1) == pytest.approx(4.0, rel=0.05)


def test_cell_sample_moments_match_area_times_seed_moments():
    area = 0.7
    n = 60_000
    for i, seed in enumerate((LevySeedSpec.poisson(1.3),
                              LevySeedSpec.gaussian(0.4, 1.1),
                              LevySeedSpec.compound_poisson(
                                  2.0, normal_jumps(0.1, 0.8)))):
        m = seed_moments(seed)
        draws = cell_sample(seed, np.full(n, area), rng(10 + i))
        se_mean = np.sqrt(area * m.variance / n)
        assert abs(draws.mean() - area * m.mean) <= 3 * se_mean
        var = draws.var(ddof=1)
        se_var = np.sqrt(2.0 / n) * (area * m.variance + 1.0)
        assert abs(var - area * m.variance) <= 3 * se_var


def test_exponent_additivity_via_ecf():
    # sum of independent cells of areas a1, a2 has exponent (a1 + a2) psi
    seed = LevySeedSpec.poisson(1.0)
    a1, a2 = 0.6, 1.1
    n = 100_000
    r = rng(3)
    total = cell_sample(seed, np.full(n, a1), r) + cell_sample(seed, np.full(n, a2), r)
    for z in (0.5, 1.0, 2.0):
        ecf = np.exp(1j * z * total).mean()
        target = np.exp((a1 + a2) * cumulant(seed, z))
        assert abs(ecf - target) < 4.0 / np.sqrt(n)


def test_cell_sample_stable_matches_cf():
    seed = LevySeedSpec.stable(1.2, 1.0, 0.5)
    n = 200_000
    draws = cell_sample(seed, np.full(n, 0.8), rng(4))
    for z in (0.5, 1.5, -1.0):
        ecf = np.exp(1j * z * draws).mean()
        target = np.exp(0.8 * cumulant(seed, z))
        assert abs(ecf - target) < 4.0 / np.sqrt(n)


def test_cell_sample_cauchy_case_matches_cf():
    seed = LevySeedSpec.stable(1.0, 0.7, 0.7)
    n = 200_000
    draws = cell_sample(seed, np.full(n, 1.3), rng(5))
    for z in (0.4, 1.1):
        ecf = np.exp(1j * z * draws).mean()
        target = np.exp(1.3 * cumulant(seed, z))
        assert abs(ecf - target) < 4.0 / np.sqrt(n)


def test_cell_sample_custom_matches_cf():
    nu = LevyMeasureSpec(nu_plus=lambda x: np.exp(-x),
                         nu_minus=lambda x: 0.5 * np.exp(-2.0 * x))
    seed = LevySeedSpec.custom(0.0, 0.5, nu)
    n = 100_000
    draws = cell_sample(seed, np.full(n, 1.0), rng(6))
    for z in (0.5, 1.5):
        ecf = np.exp(1j * z * draws).mean()
        target = np.exp(cumulant(seed, z))
        assert abs(ecf - target) < 4.0 / np.sqrt(n)


def test_custom_small_jump_substitution_variance_matches():
    # total variance must be b^2 + int x^2 nu regardless of the cutoff
    nu = LevyMeasureSpec(nu_plus=lambda x: np.exp(-x), nu_minus=lambda x: 0.0)
    n = 100_000
    for cutoff in (1e-2, 1e-3):
        seed = LevySeedSpec.custom(0.0, 0.0, nu, small_jump_cutoff=cutoff)
        draws = cell_sample(seed, np.full(n, 1.0), rng(7))
        assert draws.var(ddof=1) == pytest.approx(2.0, rel=0.05)
