"""Partial sums of trawl paths, variance asymptotics and limit constants.

Collects the rescaling factor and the constants of the limit law for each
sampling regime, the exact and asymptotic variance of the partial sum
S_m = sum_{k<m} (X_{k Delta} - E X), and the plumbing for the mu-finite
Riemann-sum experiment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .levy import (COMPOUND_POISSON, CUSTOM, GAUSSIAN, POISSON, STABLE,
                   InfiniteMomentError, LevySeedSpec, seed_moments)
from .trawl import (EXPONENTIAL, LONG_MEMORY, POWER_LAW_LM, SHORT_MEMORY,
                    TrawlFunction)

FINITE_MU = "finite_mu"
ZERO_MU_FIRST = "zero_mu_first"
ZERO_MU_SECOND_GAUSS = "zero_mu_second_gauss"
ZERO_MU_SECOND_STABLE = "zero_mu_second_stable"
SHORT_MEMORY_CLT = "short_memory"
LONG_MEMORY_GAUSS = "long_memory_gauss"
LONG_MEMORY_STABLE_I = "long_memory_stable_i"
LONG_MEMORY_STABLE_II = "long_memory_stable_ii"
STABLE_BASIS_I = "stable_basis_i"

ALL_REGIMES = (FINITE_MU, ZERO_MU_FIRST, ZERO_MU_SECOND_GAUSS,
               ZERO_MU_SECOND_STABLE, SHORT_MEMORY_CLT, LONG_MEMORY_GAUSS,
               LONG_MEMORY_STABLE_I, LONG_MEMORY_STABLE_II, STABLE_BASIS_I)


@dataclass(frozen=True)
class RegimeSpec:
    """A sampling/limit regime with its parameters.

    kappa is the long-memory exponent in (2, 3); beta the stable index in
    (0, 2); beta_nu the Blumenthal-Getoor index of the seed; mu the limit
    of n * Delta_n when finite.
    """

    name: str
    mu: float = np.nan
    kappa: float = np.nan
    beta: float = np.nan
    beta_nu: float = np.nan

    def __post_init__(self):
        if self.name not in ALL_REGIMES:
            raise ValueError(f"unknown regime {self.name!r}")
        if self.name == FINITE_MU and not (np.isfinite(self.mu) and self.mu > 0):
            raise ValueError("finite_mu requires mu in (0, inf)")
        if self.name in (LONG_MEMORY_GAUSS, LONG_MEMORY_STABLE_I,
                         LONG_MEMORY_STABLE_II):
            if not 2 < self.kappa < 3:
                raise ValueError("long-memory regimes require kappa in (2, 3)")
        if self.name in (ZERO_MU_SECOND_STABLE, STABLE_BASIS_I):
            if not 0 < self.beta < 2:
                raise ValueError("stable regimes require beta in (0, 2)")
        if self.name == LONG_MEMORY_STABLE_I:
            if not (0 < self.beta_nu < 2 and self.beta_nu < self.kappa - 1):
                raise ValueError("case i requires 0 < beta_nu < kappa - 1")
        if self.name == LONG_MEMORY_STABLE_II:
            if not (self.kappa - 1 < self.beta_nu < 2):
                raise ValueError("case ii requires kappa - 1 < beta_nu < 2")


def partial_sums(path: np.ndarray, mean: float) -> np.ndarray:
    """Prefix sums S_1..S_n of the centered path (S_0 = 0 is implicit)."""
    return np.cumsum(np.asarray(path, dtype=float) - mean)


def trawl_mean(seed: LevySeedSpec, trawl: TrawlFunction) -> float:
    """E X = (seed mean) * Leb(A); 0 for strictly stable seeds."""
    try:
        return seed_moments(seed).mean * trawl.lebesgue_A()
    except InfiniteMomentError:
        return 0.0


def _tail2(trawl: TrawlFunction, h: float) -> float:
    """int_h^inf tail(u) du, closed form for the named families."""
    if trawl.family == EXPONENTIAL:
        return float(np.exp(-trawl.lam * h)) / trawl.lam**2
    if trawl.family == POWER_LAW_LM:
        k = trawl.kappa
        if k <= 3:
            raise ValueError("tail of the ACF is not integrable for kappa <= 3")
        return trawl.c_a * (1 + h) ** (3 - k) / ((k - 1) * (k - 2) * (3 - k))
    return quad(lambda u: float(trawl.tail(u)), h, np.inf, epsabs=1e-9,
                limit=400)[0]


def _double_tail_integral(trawl: TrawlFunction, mu: float) -> float:
    """int_0^mu int_0^r tail(u) du dr."""
    if trawl.family == EXPONENTIAL:
        lam = trawl.lam
        return (mu / lam - (1 - np.exp(-lam * mu)) / lam**2) / lam
    if trawl.family == POWER_LAW_LM:
        k, c = trawl.kappa, trawl.c_a
        # int_0^r tail = c [(1+r)^(3-k) - 1] / ((k-1)(k-2)(3-k))
        inner = (((1 + mu) ** (4 - k) - 1) / (4 - k) - mu) / (3 - k)
        return c * inner / ((k - 1) * (k - 2))
    return quad(lambda r: quad(lambda u: float(trawl.tail(u)), 0, r,
                               epsabs=1e-9, limit=200)[0],
                0, mu, epsabs=1e-9, limit=200)[0]


def theoretical_var_S(trawl: TrawlFunction, var_seed: float, m: int,
                      delta: float) -> float:
    """Exact Var(S_m) = m Gamma(0) + 2 sum_{j=1}^{m-1} (m - j) Gamma(j Delta)."""
    if m < 1 or delta <= 0:
        raise ValueError("need m >= 1 and delta > 0")
    gam = var_seed * np.asarray(trawl.tail(delta * np.arange(m)), dtype=float)
    j = np.arange(1, m)
    return float(m * gam[0] + 2 * np.sum((m - j) * gam[1:]))


def asymptotic_var_S(case: str, trawl: TrawlFunction, var_seed: float,
                     m: int, delta: float, mu: float = np.nan) -> float:
    """Leading variance term of the Lemma per case.

    case "i": Delta m -> 0, m^2 Gamma(0); "ii": Delta m -> mu finite,
    (2/Delta^2) int_0^mu int_0^r Gamma; "iii_a": integrable ACF,
    (m/Delta) int_R Gamma; "iii_b": long memory,
    c_alpha Var(L') a(m Delta) m^3 Delta with alpha = kappa - 1.
    """
    if case == "i":
        return m**2 * var_seed * float(trawl.tail(0.0))
    if case == "ii":
        if not (np.isfinite(mu) and mu > 0):
            raise ValueError("case ii requires finite mu > 0")
        return (2.0 / delta**2) * var_seed * _double_tail_integral(trawl, mu)
    if case == "iii_a":
        if trawl.memory_class != SHORT_MEMORY:
            raise ValueError("case iii_a requires an integrable ACF")
        return (m / delta) * 2.0 * var_seed * _tail2(trawl, 0.0)
    if case == "iii_b":
        if trawl.family != POWER_LAW_LM:
            raise ValueError("case iii_b requires the long-memory family")
        alpha = trawl.kappa - 1
        c_alpha = 2.0 / ((alpha - 1) * (2 - alpha) * (3 - alpha))
        return c_alpha * var_seed * float(trawl.a(m * delta)) * m**3 * delta
    raise ValueError(f"unknown case {case!r}")


def rescale_factor(regime: RegimeSpec, n: int, delta: float,
                   trawl: TrawlFunction, seed: Optional[LevySeedSpec] = None) -> float:
    """Scaling applied to the partial-sum functional in the given regime."""
    if n < 1 or delta <= 0:
        raise ValueError("need n >= 1 and delta > 0")
    T = n * delta
    name = regime.name
    if name == FINITE_MU:
        return delta
    if name == ZERO_MU_FIRST:
        return 1.0 / n
    if name == ZERO_MU_SECOND_GAUSS:
        return T ** -0.5
    if name == ZERO_MU_SECOND_STABLE:
        return T ** (-1.0 / regime.beta)
    if name == SHORT_MEMORY_CLT:
        if trawl.memory_class != SHORT_MEMORY:
            raise ValueError("short_memory regime requires an integrable ACF")
        return float(np.sqrt(delta / n))
    if name == LONG_MEMORY_GAUSS:
        _require_long_memory(trawl)
        return 1.0 / (n * np.sqrt(float(trawl.a(T)) * T))
    if name == LONG_MEMORY_STABLE_I:
        _require_long_memory(trawl)
        return delta / (trawl.c_a * T) ** (1.0 / (regime.kappa - 1))
    if name == LONG_MEMORY_STABLE_II:
        _require_long_memory(trawl)
        return 1.0 / (n * (float(trawl.a(T)) * T) ** (1.0 / regime.beta_nu))
    if name == STABLE_BASIS_I:
        return delta / T ** (1.0 / regime.beta)
    raise ValueError(f"unknown regime {name!r}")


def _require_long_memory(trawl: TrawlFunction):
    if trawl.family != POWER_LAW_LM:
        raise ValueError("long-memory regimes require the PowerLawLM family")


def k_kappa(seed: LevySeedSpec, kappa: float) -> tuple[float, float]:
    """(K_{+,kappa}, K_{-,kappa}) = int over each half line of |x|^(kappa-1) nu."""
    p = kappa - 1
    if seed.family == POISSON:
        return seed.intensity, 0.0
    if seed.family == CUSTOM:
        nu = seed.nu

        def half(tail_fn):
            return quad(lambda x: p * x ** (p - 1) * tail_fn(x), 0, np.inf,
                        epsabs=1e-9, limit=400)[0]

        return half(nu.nu_plus), half(nu.nu_minus)
    if seed.family == GAUSSIAN:
        return 0.0, 0.0
    raise InfiniteMomentError(
        f"K_kappa not available in closed form for family {seed.family!r}")


def limit_constants(regime: RegimeSpec, trawl: TrawlFunction,
                    seed: LevySeedSpec) -> dict:
    """Constants of the regime's limit law.

    For short_memory both the variance-lemma constant sigma_a2 (the one the
    harness verifies) and the theorem's displayed Var(L') int a are
    reported; they differ for, e.g., the exponential trawl.
    """
    name = regime.name
    out: dict = {"regime": name}
    if name in (FINITE_MU, ZERO_MU_FIRST):
        return out
    if name == ZERO_MU_SECOND_GAUSS:
        b2 = seed_moments(seed).variance if seed.family == GAUSSIAN else seed.b**2
        out["sigma"] = b2 * float(trawl.a(0.0))
        return out
    if name == ZERO_MU_SECOND_STABLE:
        out["rho"] = regime.beta * float(trawl.a(0.0))
        out["k_plus_tilde"] = seed.k_plus / regime.beta
        out["k_minus_tilde"] = seed.k_minus / regime.beta
        return out
    if name == SHORT_MEMORY_CLT:
        var = seed_moments(seed).variance
        out["sigma_a2"] = 2.0 * var * _tail2(trawl, 0.0)
        out["sigma_a2_displayed"] = 2.0 * var * float(trawl.tail(0.0))
        return out
    if name == LONG_MEMORY_GAUSS:
        k = regime.kappa
        b2 = seed_moments(seed).variance
        out["H"] = 2.0 - k / 2.0
        out["sigma_kappa2"] = b2 / ((k - 2) * (3 - k) * (4 - k))
        return out
    if name == LONG_MEMORY_STABLE_I:
        k = regime.kappa
        kp, km = k_kappa(seed, k)
        out["alpha"] = k - 1
        out["k_plus_kappa"], out["k_minus_kappa"] = kp, km
        return out
    if name == LONG_MEMORY_STABLE_II:
        k, bn = regime.kappa, regime.beta_nu
        rho_a = 1.0 / (k - 2) \
            + (k - 1) * quad(lambda s: (1 - s) * s ** (bn - k), 0, 1,
                             epsabs=1e-9, limit=400)[0] \
            + 2.0 * quad(lambda s: s ** (bn - k + 1), 0, 1,
                         epsabs=1e-9, limit=400)[0]
        out["rho_a"] = rho_a
        return out
    if name == STABLE_BASIS_I:
        beta = regime.beta
        if trawl.family == POWER_LAW_LM:
            k = trawl.kappa
            if beta >= k - 1:
                raise ValueError("stable_basis_i requires beta < kappa - 1")
            rho_a = trawl.c_a * gamma_fn(beta + 1) * gamma_fn(k - 1 - beta) \
                / gamma_fn(k)
        else:
            rho_a = quad(lambda s: s**beta * float(trawl.a_prime(s)), 0, np.inf,
                         epsabs=1e-9, limit=400)[0]
        out["rho_a"] = rho_a
        out["k_plus_limit"] = rho_a * seed.k_plus
        out["k_minus_limit"] = rho_a * seed.k_minus
        return out
    raise ValueError(f"unknown regime {name!r}")


def coarse_sums_from_fine(fine_path: np.ndarray, fine_delta: float,
                          coarse_stride: int, mean: float = 0.0):
    """(Delta_c * S at coarse times, trapezoid integral at the same times).

    Both functionals come from the same realization, as the mu-finite
    proposition couples them.  Arrays have length n_fine // stride + 1 and
    start at 0.
    """
    path = np.asarray(fine_path, dtype=float) - mean
    n = path.size
    if coarse_stride < 1 or n % coarse_stride != 0:
        raise ValueError("coarse_stride must divide the fine grid size")
    dc = fine_delta * coarse_stride
    coarse = path[::coarse_stride]
    riemann = dc * np.concatenate(([0.0], np.cumsum(coarse)))
    # trapezoid over [0, m * dc]; the fine grid ends one step short of the
    # horizon, so the last panel is closed with the final value held flat
    extended = np.concatenate((path, [path[-1]]))
    panel = 0.5 * (extended[:-1] + extended[1:]) * fine_delta
    integral_fine = np.concatenate(([0.0], np.cumsum(panel)))
    integral = integral_fine[::coarse_stride]
    return riemann, integral
