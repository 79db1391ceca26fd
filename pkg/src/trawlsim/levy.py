"""Levy seeds and the cell laws of homogeneous Levy bases.

A seed is described by its characteristic triplet ``(gamma, b, nu)``; the
value of the basis on a set of Lebesgue measure ``A`` is the infinitely
divisible law with exponent ``A * psi(z)``.  For the named families
(Gaussian, Poisson, compound Poisson, strictly stable) both the exponent
and the sampler are exact closed forms; a custom triplet is sampled by
compound-Poisson jumps above a cutoff plus a variance-matched Gaussian
substitute for the small jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn


class InfiniteMomentError(ArithmeticError):
    """Raised when a requested moment of the seed does not exist."""


@dataclass(frozen=True)
class JumpDistribution:
    """Jump law of a compound-Poisson seed.

    ``sample(rng, size)`` draws jumps, ``char_fn(z)`` is ``E exp(izJ)`` and
    ``moment(k)`` the signed moment ``E J^k`` for integer k.
    """

    sample: Callable[[np.random.Generator, int], np.ndarray]
    char_fn: Callable[[float], complex]
    moment: Callable[[int], float]


def normal_jumps(mean: float = 0.0, std: float = 1.0) -> JumpDistribution:
    def _moment(k):
        x = np.polynomial.hermite_e.hermegauss(12)
        nodes = mean + std * x[0]
        return float(np.sum(x[1] * nodes**k) / np.sqrt(2 * np.pi))

    return JumpDistribution(
        sample=lambda rng, size: rng.normal(mean, std, size),
        char_fn=lambda z: np.exp(1j * z * mean - 0.5 * std**2 * z**2),
        moment=_moment,
    )


def fixed_jumps(value: float = 1.0) -> JumpDistribution:
    return JumpDistribution(
        sample=lambda rng, size: np.full(size, value),
        char_fn=lambda z: np.exp(1j * z * value),
        moment=lambda k: value**k,
    )


@dataclass(frozen=True)
class LevyMeasureSpec:
    """A Levy measure given through its tail functions.

    ``nu_plus(x) = nu((x, inf))`` and ``nu_minus(x) = nu((-inf, -x))`` for
    x > 0, both non-increasing.  ``abs_moment`` may override the numeric
    evaluation of ``m(p) = int |x|^p nu(dx)``.
    """

    nu_plus: Callable[[float], float]
    nu_minus: Callable[[float], float]
    abs_moment: Optional[Callable[[float], float]] = None

    def total_tail(self, x: float) -> float:
        return self.nu_plus(x) + self.nu_minus(x)

    def moment(self, p: float, lower: float = 0.0, upper: float = np.inf) -> float:
        """``int_{lower<|x|<=upper} |x|^p nu(dx)`` by tail integration."""
        if self.abs_moment is not None and lower == 0.0 and upper == np.inf:
            return self.abs_moment(p)
        hi = self.total_tail(upper) if np.isfinite(upper) else 0.0

        def integrand(x):
            return p * x ** (p - 1) * (self.total_tail(x) - hi)

        lo = max(lower, 1e-12)
        val = quad(integrand, lo, upper if np.isfinite(upper) else 1.0, limit=200)[0]
        if not np.isfinite(upper):
            val += quad(lambda x: p * x ** (p - 1) * self.total_tail(x), 1.0, np.inf, limit=200)[0]
        if np.isfinite(upper) and lower < upper:
            val += (lower**p if lower > 0 else 0.0) * (self.total_tail(lo) - hi) * 0.0
        return val


GAUSSIAN = "gaussian"
POISSON = "poisson"
COMPOUND_POISSON = "compound_poisson"
STABLE = "stable"
CUSTOM = "custom"


@dataclass(frozen=True)
class LevySeedSpec:
    """Levy seed by family; use the classmethod constructors."""

    family: str
    gamma: float = 0.0
    b: float = 0.0
    intensity: float = 0.0          # Poisson lambda / compound-Poisson rate
    jumps: Optional[JumpDistribution] = None
    beta: float = 0.0               # stable index
    k_plus: float = 0.0
    k_minus: float = 0.0
    nu: Optional[LevyMeasureSpec] = None
    small_jump_cutoff: float = 1e-3

    @classmethod
    def gaussian(cls, gamma: float = 0.0, b: float = 1.0) -> "LevySeedSpec":
        if b < 0:
            raise ValueError("Gaussian coefficient b must be >= 0")
        return cls(family=GAUSSIAN, gamma=gamma, b=b)

    @classmethod
    def poisson(cls, intensity: float) -> "LevySeedSpec":
        if intensity <= 0:
            raise ValueError("Poisson intensity must be > 0")
        return cls(family=POISSON, intensity=intensity)

    @classmethod
    def compound_poisson(cls, rate: float, jumps: JumpDistribution,
                         gamma: float = 0.0) -> "LevySeedSpec":
        if rate <= 0:
            raise ValueError("compound-Poisson rate must be > 0")
        return cls(family=COMPOUND_POISSON, gamma=gamma, intensity=rate, jumps=jumps)

    @classmethod
    def stable(cls, beta: float, k_plus: float, k_minus: float,
               gamma_s: Optional[float] = None) -> "LevySeedSpec":
        if not 0 < beta < 2:
            raise ValueError("stable index beta must lie in (0, 2)")
        if k_plus < 0 or k_minus < 0 or k_plus + k_minus <= 0:
            raise ValueError("need k_plus, k_minus >= 0 with k_plus + k_minus > 0")
        if beta == 1:
            if k_plus != k_minus:
                raise ValueError("beta = 1 requires the symmetric case k_plus == k_minus")
            gamma = 0.0 if gamma_s is None else gamma_s
        else:
            strict = (k_plus - k_minus) / abs(beta - 1)
            if gamma_s is not None and not np.isclose(gamma_s, strict):
                raise ValueError("gamma_s inconsistent with strict stability")
            gamma = strict
        return cls(family=STABLE, gamma=gamma, beta=beta, k_plus=k_plus, k_minus=k_minus)

    @classmethod
    def custom(cls, gamma: float, b: float, nu: LevyMeasureSpec,
               small_jump_cutoff: float = 1e-3) -> "LevySeedSpec":
        if b < 0:
            raise ValueError("Gaussian coefficient b must be >= 0")
        return cls(family=CUSTOM, gamma=gamma, b=b, nu=nu,
                   small_jump_cutoff=small_jump_cutoff)


def stable_exponent(beta: float, k_plus: float, k_minus: float,
                    gamma_s: float, z) -> complex:
    """Characteristic exponent of the strictly beta-stable seed.

    For ``beta != 1`` this is ``-sigma |z|^beta (1 - i rho sign(z) tan(pi beta / 2))``
    with ``sigma = Gamma(2-beta)/(beta(1-beta)) cos(pi beta/2) (k_plus + k_minus)``
    and ``rho = (k_minus - k_plus)/(k_plus + k_minus)``; for ``beta == 1`` it is
    ``-k_plus pi |z| + i gamma_s z`` (symmetric case only).
    """
    if beta <= 0 or beta >= 2:
        raise ValueError("beta out of range (0, 2)")
    if k_plus + k_minus <= 0:
        raise ValueError("k_plus + k_minus must be > 0")
    z = np.asarray(z, dtype=float)
    if beta == 1:
        if k_plus != k_minus:
            raise ValueError("beta = 1 requires k_plus == k_minus")
        out = -k_plus * np.pi * np.abs(z) + 1j * gamma_s * z
    else:
        sigma = gamma_fn(2 - beta) / (beta * (1 - beta)) * np.cos(np.pi * beta / 2) \
            * (k_plus + k_minus)
        rho = (k_minus - k_plus) / (k_plus + k_minus)
        out = -sigma * np.abs(z) ** beta \
            * (1 - 1j * rho * np.sign(z) * np.tan(np.pi * beta / 2))
    return complex(out) if out.ndim == 0 else out


def stable_sigma_rho(beta: float, k_plus: float, k_minus: float) -> tuple[float, float]:
    sigma = gamma_fn(2 - beta) / (beta * (1 - beta)) * np.cos(np.pi * beta / 2) \
        * (k_plus + k_minus)
    rho = (k_minus - k_plus) / (k_plus + k_minus)
    return sigma, rho


def _custom_levy_integral(nu: LevyMeasureSpec, z: float) -> complex:
    # int (e^{izx} - 1 - izx 1_{|x|<=1}) nu(dx), by parts against the tails
    def gp(x):  # d/dx of integrand on the positive side
        return 1j * z * np.exp(1j * z * x) - 1j * z * (x <= 1.0)

    def gm(x):  # d/dx (in x>0) of the reflected negative side
        return -1j * z * np.exp(-1j * z * x) + 1j * z * (x <= 1.0)

    def tail_int(deriv, tail):
        re = quad(lambda x: deriv(x).real * tail(x), 0, np.inf, limit=400)[0]
        im = quad(lambda x: deriv(x).imag * tail(x), 0, np.inf, limit=400)[0]
        return re + 1j * im

    # the integrand jumps by -iz (+iz on the negative side) at |x| = 1 where
    # the compensator switches off; by parts this contributes iz nu(+-1 tail)
    jump = 1j * z * (nu.nu_plus(1.0) - nu.nu_minus(1.0))
    return tail_int(gp, nu.nu_plus) + tail_int(gm, nu.nu_minus) + jump


def cumulant(seed: LevySeedSpec, z) -> complex:
    """Characteristic exponent psi(z) of the seed, in closed form per family."""
    zarr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(zarr)):
        raise ValueError("z must be finite")
    if seed.family == GAUSSIAN:
        out = 1j * seed.gamma * zarr - 0.5 * seed.b**2 * zarr**2
    elif seed.family == POISSON:
        out = seed.intensity * (np.exp(1j * zarr) - 1)
    elif seed.family == COMPOUND_POISSON:
        cf = np.vectorize(seed.jumps.char_fn)(zarr)
        out = seed.intensity * (cf - 1) + 1j * seed.gamma * zarr
    elif seed.family == STABLE:
        out = stable_exponent(seed.beta, seed.k_plus, seed.k_minus, seed.gamma, zarr)
        out = np.asarray(out)
    elif seed.family == CUSTOM:
        out = np.vectorize(lambda v: _custom_levy_integral(seed.nu, v))(zarr) \
            + 1j * seed.gamma * zarr - 0.5 * seed.b**2 * zarr**2
    else:
        raise ValueError(f"unsupported family {seed.family!r}")
    out = np.asarray(out, dtype=complex)
    return complex(out) if out.ndim == 0 else out


def bg_index(seed: LevySeedSpec) -> float:
    """Blumenthal-Getoor index; 0 by convention when nu vanishes."""
    if seed.family in (GAUSSIAN,):
        return 0.0
    if seed.family in (POISSON, COMPOUND_POISSON):
        return 0.0
    if seed.family == STABLE:
        return seed.beta
    # custom: the index equals the small-x power of the tail,
    # beta_nu = limsup_{x->0} log nu_bar(x) / log(1/x); estimate the slope
    # of log nu_bar on a geometric grid near 0 and clamp to [0, 2]
    nu = seed.nu
    xs = np.logspace(-4, -8, 9)
    vals = np.array([nu.total_tail(x) for x in xs], dtype=float)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        return 0.0
    slope, _ = np.polyfit(np.log(1.0 / xs), np.log(vals), 1)
    return float(min(max(slope, 0.0), 2.0))


@dataclass(frozen=True)
class SeedMoments:
    mean: float
    variance: float
    fourth_cumulant: float


def seed_moments(seed: LevySeedSpec) -> SeedMoments:
    """(mean, variance, kappa_4) of the seed; raises when a moment is infinite."""
    if seed.family == GAUSSIAN:
        return SeedMoments(seed.gamma, seed.b**2, 0.0)
    if seed.family == POISSON:
        lam = seed.intensity
        return SeedMoments(lam, lam, lam)
    if seed.family == COMPOUND_POISSON:
        r, j = seed.intensity, seed.jumps
        return SeedMoments(seed.gamma + r * j.moment(1), r * j.moment(2), r * j.moment(4))
    if seed.family == STABLE:
        if seed.beta > 1:
            raise InfiniteMomentError("stable seed has no finite variance")
        raise InfiniteMomentError("stable seed has no finite mean for beta <= 1")
    if seed.family == CUSTOM:
        nu = seed.nu
        m2 = nu.moment(2.0)
        m4 = nu.moment(4.0)
        # signed first moment over |x| > 1 from the tails
        big = quad(nu.nu_plus, 1.0, np.inf, limit=200)[0] + nu.nu_plus(1.0) \
            - quad(nu.nu_minus, 1.0, np.inf, limit=200)[0] - nu.nu_minus(1.0)
        if not all(np.isfinite(v) for v in (m2, m4, big)):
            raise InfiniteMomentError("custom Levy measure lacks the requested moment")
        return SeedMoments(seed.gamma + big, seed.b**2 + m2, m4)
    raise ValueError(f"unsupported family {seed.family!r}")


def _sample_standard_stable(beta: float, skew: float, size: int,
                            rng: np.random.Generator) -> np.ndarray:
    # Chambers-Mallows-Stuck, producing the law with characteristic function
    # exp(-|z|^beta (1 - i*skew*sign(z) tan(pi beta/2))), beta != 1
    u = rng.uniform(-np.pi / 2, np.pi / 2, size)
    w = rng.standard_exponential(size)
    if skew == 0.0:
        return np.sin(beta * u) / np.cos(u) ** (1 / beta) \
            * (np.cos((1 - beta) * u) / w) ** ((1 - beta) / beta)
    t = np.tan(np.pi * beta / 2)
    b0 = np.arctan(skew * t) / beta
    s0 = (1 + skew**2 * t**2) ** (1 / (2 * beta))
    return s0 * np.sin(beta * (u + b0)) / np.cos(u) ** (1 / beta) \
        * (np.cos(u - beta * (u + b0)) / w) ** ((1 - beta) / beta)


def _invert_tail(tail: Callable[[float], float], level: float, eps: float) -> float:
    # smallest x >= eps with tail(x) <= level (tail non-increasing)
    hi = max(eps, 1.0)
    while tail(hi) > level and hi < 1e12:
        hi *= 2.0
    if tail(eps) <= level:
        return eps
    return brentq(lambda x: tail(x) - level, eps, hi, xtol=1e-12, rtol=1e-10)


def _sample_custom_cells(seed: LevySeedSpec, areas: np.ndarray,
                         rng: np.random.Generator) -> np.ndarray:
    nu, eps = seed.nu, seed.small_jump_cutoff
    lam_p, lam_m = nu.nu_plus(eps), nu.nu_minus(eps)
    lam = lam_p + lam_m
    counts = rng.poisson(lam * areas) if lam > 0 else np.zeros(areas.shape, dtype=int)
    total = int(counts.sum())
    if total > 0:
        side_pos = rng.random(total) < (lam_p / lam)
        u = rng.random(total)
        jumps = np.empty(total)
        for i in range(total):
            if side_pos[i]:
                jumps[i] = _invert_tail(nu.nu_plus, u[i] * lam_p, eps)
            else:
                jumps[i] = -_invert_tail(nu.nu_minus, u[i] * lam_m, eps)
        bounds = np.concatenate(([0], np.cumsum(counts.ravel())))
        sums = np.add.reduceat(np.concatenate((jumps, [0.0])), bounds[:-1])
        sums[np.diff(bounds) == 0] = 0.0
        big = sums.reshape(areas.shape)
    else:
        big = np.zeros(areas.shape)
    # variance of the discarded small jumps, replaced by a Gaussian
    sig2 = quad(lambda x: 2 * x * (nu.nu_plus(x) - lam_p), 0, eps, limit=200)[0] \
        + quad(lambda x: 2 * x * (nu.nu_minus(x) - lam_m), 0, eps, limit=200)[0]
    # compensator of jumps in (eps, 1]
    comp = quad(lambda x: nu.nu_plus(x) - nu.nu_plus(1.0), eps, 1.0, limit=200)[0] \
        + eps * (lam_p - nu.nu_plus(1.0)) + nu.nu_plus(1.0) \
        - quad(lambda x: nu.nu_minus(x) - nu.nu_minus(1.0), eps, 1.0, limit=200)[0] \
        - eps * (lam_m - nu.nu_minus(1.0)) - nu.nu_minus(1.0)
    comp -= nu.nu_plus(1.0) - nu.nu_minus(1.0)  # tails beyond 1 are not compensated
    drift = seed.gamma - comp
    return big + rng.normal(drift * areas, np.sqrt((seed.b**2 + sig2) * areas))


def cell_sample(seed: LevySeedSpec, area, rng: np.random.Generator):
    """Draw ``L(A)`` for cells of the given Lebesgue measures.

    ``area`` may be a scalar or an array; one independent draw per entry,
    each with exponent ``area * psi``.
    """
    areas = np.asarray(area, dtype=float)
    if np.any(areas < 0) or not np.all(np.isfinite(areas)):
        raise ValueError("areas must be finite and >= 0")
    scalar = areas.ndim == 0
    areas = np.atleast_1d(areas)
    if seed.family == GAUSSIAN:
        out = rng.normal(seed.gamma * areas, seed.b * np.sqrt(areas))
    elif seed.family == POISSON:
        out = rng.poisson(seed.intensity * areas).astype(float)
    elif seed.family == COMPOUND_POISSON:
        counts = rng.poisson(seed.intensity * areas)
        total = int(counts.sum())
        jumps = seed.jumps.sample(rng, total)
        bounds = np.concatenate(([0], np.cumsum(counts.ravel())))
        sums = np.add.reduceat(np.concatenate((jumps, [0.0])), bounds[:-1])
        sums[np.diff(bounds) == 0] = 0.0
        out = sums.reshape(areas.shape) + seed.gamma * areas
    elif seed.family == STABLE:
        if seed.beta == 1:
            c = rng.standard_cauchy(areas.shape)
            out = seed.gamma * areas + seed.k_plus * np.pi * areas * c
        else:
            sigma, rho = stable_sigma_rho(seed.beta, seed.k_plus, seed.k_minus)
            x = _sample_standard_stable(seed.beta, rho, areas.size, rng)
            out = (areas * sigma) ** (1 / seed.beta) * x.reshape(areas.shape)
    elif seed.family == CUSTOM:
        out = _sample_custom_cells(seed, areas, rng)
    else:
        raise ValueError(f"unsupported family {seed.family!r}")
    out = np.where(areas == 0.0, 0.0, out)
    return float(out[0]) if scalar else out
