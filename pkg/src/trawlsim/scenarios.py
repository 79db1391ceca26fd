"""Named limit-theorem experiments.

Each pipeline simulates the exact functional a theorem rescales, applies
the regime's factor and compares against the limit law, emitting tidy rows
(scenario, n, delta, metric, value, se, target, pass).  The CLI `verify`
subcommand and the acceptance suite both run through these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import norm

from . import levy, sim, stats, sums, trawl as trawl_mod
from .levy import LevySeedSpec, cumulant, seed_moments
from .sim import (gaussian_checkpoint_sums, path_rng, sample_final_sums,
                  sample_x0_and_final_sum, simulate_ensemble)
from .stats import ecf_distance, empirical_cov_matrix, hurst_from_increments, ks_distance
from .sums import (LONG_MEMORY_GAUSS, SHORT_MEMORY_CLT, STABLE_BASIS_I,
                   ZERO_MU_SECOND_GAUSS, RegimeSpec, limit_constants,
                   rescale_factor, theoretical_var_S, trawl_mean)
from .trawl import TrawlFunction, exponential_trawl, kernel_to_trawl, power_law_trawl


@dataclass
class ScenarioConfig:
    """One named experiment; built by hand or from a TOML document."""

    name: str
    kind: str
    seed_spec: Optional[LevySeedSpec] = None
    trawl: Optional[TrawlFunction] = None
    delta_c: float = 1.0
    delta_p: float = 0.5
    n_list: Sequence[int] = (256, 1024, 4096)
    num_paths: int = 1000
    master_seed: int = 20260823
    regime_params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def delta(self, n: int) -> float:
        return self.delta_c * n ** (-self.delta_p)


def _row(scenario, n, delta, metric, value, se, target, passed):
    return {"scenario": scenario, "n": n, "delta": delta, "metric": metric,
            "value": float(value), "se": float(se), "target": float(target),
            "pass": bool(passed)}


def run_exact_law(cfg: ScenarioConfig, threads: int = 1) -> list:
    """Joint ECF of (X_0, X_Delta) for n = 2 against the set-decomposition law."""
    n, delta = 2, cfg.delta(2)
    ens = simulate_ensemble(cfg.seed_spec, cfg.trawl, n, delta, cfg.num_paths,
                            cfg.master_seed, threads=threads, tag=1)
    x0, x1 = ens.paths[:, 0], ens.paths[:, 1]
    tail0 = cfg.trawl.lebesgue_A()
    tail_d = float(cfg.trawl.tail(delta))
    zs = np.linspace(-2.0, 2.0, 5)
    worst = 0.0
    for z1 in zs:
        for z2 in zs:
            ecf = np.exp(1j * (z1 * x0 + z2 * x1)).mean()
            target = np.exp(tail_d * cumulant(cfg.seed_spec, z1 + z2)
                            + (tail0 - tail_d) * (cumulant(cfg.seed_spec, z1)
                                                  + cumulant(cfg.seed_spec, z2)))
            worst = max(worst, abs(ecf - target))
    bound = cfg.tolerances.get("ecf", 4.0 / math.sqrt(cfg.num_paths))
    return [_row(cfg.name, n, delta, "joint_ecf_sup", worst, 0.0, bound,
                 worst <= bound)]


def run_acf(cfg: ScenarioConfig, threads: int = 1) -> list:
    """Empirical Cov(X_0, X_h) against Var(L') tail(h) on the first lags."""
    lags = cfg.regime_params.get("lags", 3)
    n, delta = lags, cfg.delta_c
    ens = simulate_ensemble(cfg.seed_spec, cfg.trawl, n, delta, cfg.num_paths,
                            cfg.master_seed, threads=threads, tag=2)
    var_seed = seed_moments(cfg.seed_spec).variance
    x0 = ens.paths[:, 0]
    out = []
    for k in range(lags):
        h = k * delta
        prod = (x0 - x0.mean()) * (ens.paths[:, k] - ens.paths[:, k].mean())
        est = float(prod.mean()) * cfg.num_paths / (cfg.num_paths - 1)
        se = float(prod.std(ddof=1)) / math.sqrt(cfg.num_paths)
        target = trawl_mod.acf(cfg.trawl, var_seed, h)
        out.append(_row(cfg.name, n, h, f"acf_lag_{k}", est, se, target,
                        abs(est - target) <= 3 * se))
    return out


def run_moment4(cfg: ScenarioConfig, threads: int = 1) -> list:
    """Central fourth moment of X_0: the kappa_4 + 3 kappa_2^2 form must pass
    at 10% and the display without the factor 3 must fail the same band."""
    rng = path_rng(cfg.master_seed, 0, tag=3)
    draws = levy.cell_sample(cfg.seed_spec,
                             np.full(cfg.num_paths, cfg.trawl.lebesgue_A()), rng)
    m = stats.empirical_moments(draws)
    targets = stats.trawl_fourth_central_moment(cfg.seed_spec, cfg.trawl)
    tol = cfg.tolerances.get("rel", 0.10)
    ok = abs(m.central4 - targets["value"]) <= tol * targets["value"]
    displayed_fails = abs(m.central4 - targets["paper_displayed"]) \
        > tol * targets["paper_displayed"]
    return [
        _row(cfg.name, cfg.num_paths, 0.0, "central4", m.central4,
             m.se_central4, targets["value"], ok),
        # pass here means the no-factor-3 display is rejected by the data
        _row(cfg.name, cfg.num_paths, 0.0, "central4_display_rejected",
             m.central4, m.se_central4, targets["paper_displayed"],
             displayed_fails),
    ]


def run_variance_regimes(cfg: ScenarioConfig, threads: int = 1) -> list:
    """Exact / asymptotic Var(S_n) ratios per variance-lemma case, no MC."""
    kappa = cfg.regime_params.get("kappa", 2.5)
    cases = [
        ("i", exponential_trawl(1.0), 1.0, 1.5, 0.05),
        ("ii", exponential_trawl(1.0), 1.0, 1.0, 0.05),
        ("iii_a", exponential_trawl(1.0), 1.0, 0.5, 0.05),
        # iii_b converges like (n Delta)^(2 - kappa); c = 4 keeps the
        # finite-n correction below the 10% band at the largest n
        ("iii_b", power_law_trawl(kappa), 4.0, 0.5, 0.10),
    ]
    out = []
    for case, tr, c, p, tol in cases:
        devs = []
        for n in cfg.n_list:
            delta = c * n ** (-p)
            exact = theoretical_var_S(tr, 1.0, n, delta)
            asym = sums.asymptotic_var_S(case, tr, 1.0, n, delta,
                                         mu=n * delta if case == "ii" else np.nan)
            ratio = exact / asym
            devs.append(abs(ratio - 1.0))
            out.append(_row(cfg.name, n, delta, f"var_ratio_case_{case}",
                            ratio, 0.0, 1.0, True))
        ok = devs[-1] <= tol and all(b <= a + 1e-12 for a, b in zip(devs, devs[1:]))
        out[-1]["pass"] = bool(ok)
    return out


def _normal_cdf(var: float):
    s = math.sqrt(var)
    return lambda x: norm.cdf(x, scale=s)


def run_short_memory(cfg: ScenarioConfig, threads: int = 1) -> list:
    """KS of sqrt(Delta/n) S_n against Normal(0, sigma_a^2)."""
    regime = RegimeSpec(SHORT_MEMORY_CLT)
    sigma_a2 = limit_constants(regime, cfg.trawl, cfg.seed_spec)["sigma_a2"]
    tol = cfg.tolerances.get("ks", 0.05)
    out = []
    ks_list = []
    for n in cfg.n_list:
        delta = cfg.delta(n)
        rng = path_rng(cfg.master_seed, n, tag=5)
        s = sample_final_sums(cfg.seed_spec, cfg.trawl, n, delta,
                              cfg.num_paths, rng)
        scaled = rescale_factor(regime, n, delta, cfg.trawl) * s
        ks = ks_distance(scaled, _normal_cdf(sigma_a2))
        ks_list.append(ks)
        out.append(_row(cfg.name, n, delta, "ks_normal", ks, 0.0, tol, True))
    ok = ks_list[-1] <= tol and ks_list[-1] < ks_list[0]
    out[-1]["pass"] = bool(ok)
    return out


def run_zero_mu_gauss(cfg: ScenarioConfig, threads: int = 1) -> list:
    """Var of (n Delta)^(-1/2) Z_1^n vs the exact Gaussian oracle, plus the
    fitted constant that settles whether sigma = b^2 a(0) enters as a
    variance (it does: Var(Z_1^n) / T_n -> (2/3) sigma)."""
    out = []
    for n in cfg.n_list:
        delta = cfg.delta(n)
        rng = path_rng(cfg.master_seed, n, tag=6)
        x0, s = sample_x0_and_final_sum(cfg.seed_spec, cfg.trawl, n, delta,
                                        cfg.num_paths, rng)
        T = n * delta
        z = (x0 - s / n) / math.sqrt(T)
        m = stats.empirical_moments(z)
        var_seed = seed_moments(cfg.seed_spec).variance
        gam = var_seed * np.asarray(cfg.trawl.tail(delta * np.arange(n)))
        var_s = theoretical_var_S(cfg.trawl, var_seed, n, delta)
        exact = (gam[0] - 2.0 * gam.sum() / n + var_s / n**2) / T
        out.append(_row(cfg.name, n, delta, "var_Z1_rescaled", m.var, m.se_var,
                        exact, abs(m.var - exact) <= 3 * m.se_var))
        sigma = seed_moments(cfg.seed_spec).variance * float(cfg.trawl.a(0.0))
        fitted = 1.5 * m.var
        out.append(_row(cfg.name, n, delta, "fitted_sigma", fitted,
                        1.5 * m.se_var, sigma,
                        abs(fitted - sigma) <= max(4.5 * m.se_var, 0.05 * sigma)))
    return out


def _fit_hurst_two_component(lags: np.ndarray, variances: np.ndarray) -> float:
    """H from Var(S_m) = A m^(2H) + B m on three dyadic lags.

    The diffusive B m term is the variance lemma's short-range contribution;
    at desk scale it still carries ~15% of Var(S_m), so the raw 2-vs-1-step
    variance ratio overshoots H.  Fitting both components removes the bias.
    """
    from scipy.optimize import brentq

    m1, m2, m3 = lags
    v1, v2, v3 = variances

    def resid(H):
        mat = np.array([[m1 ** (2 * H), m1], [m2 ** (2 * H), m2]])
        A, B = np.linalg.solve(mat, [v1, v2])
        return A * m3 ** (2 * H) + B * m3 - v3

    lo, hi = 0.55, 0.99
    if resid(lo) * resid(hi) > 0:
        # fall back to the plain dyadic ratio when the fit is degenerate
        return float(0.5 * np.log2(v3 / v2))
    return float(brentq(resid, lo, hi))


def run_long_memory_gauss(cfg: ScenarioConfig, threads: int = 1) -> list:
    """fBm limit: Var(r_n S^n_1) against the covariance limit the proof
    establishes, which at t = u = 1 equals 2 sigma_kappa^2 (the lemma's
    c_alpha), plus a Hurst estimate from increment variances."""
    kappa = cfg.trawl.kappa
    regime = RegimeSpec(LONG_MEMORY_GAUSS, kappa=kappa)
    consts = limit_constants(regime, cfg.trawl, cfg.seed_spec)
    var_limit = 2.0 * consts["sigma_kappa2"]
    num_checkpoints = cfg.regime_params.get("checkpoints", 16)
    out = []
    for n in cfg.n_list:
        delta = cfg.delta(n)
        cps = np.unique(np.round(np.linspace(0, n, num_checkpoints + 1))
                        .astype(int))[1:]
        rng = path_rng(cfg.master_seed, n, tag=7)
        draws = gaussian_checkpoint_sums(cfg.seed_spec, cfg.trawl, n, delta,
                                         cps, cfg.num_paths, rng)
        r_n = rescale_factor(regime, n, delta, cfg.trawl)
        scaled = r_n * draws
        m = stats.empirical_moments(scaled[:, -1])
        ratio = m.var / var_limit
        band = cfg.tolerances.get("var_band", 0.15)
        out.append(_row(cfg.name, n, delta, "var_ratio_fbm", ratio,
                        m.se_var / var_limit, 1.0, abs(ratio - 1.0) <= band))
        # pooled stationary-increment variances at three dyadic lags
        q = num_checkpoints // 4
        with_zero = np.concatenate(
            (np.zeros((scaled.shape[0], 1)), scaled), axis=1)
        vs = []
        for step in (q, 2 * q, 4 * q):
            inc = with_zero[:, step::step] - with_zero[:, :-step:step] \
                if step < num_checkpoints else with_zero[:, [num_checkpoints]]
            vs.append(float(inc.var(ddof=1)))
        h_hat = _fit_hurst_two_component(
            np.array([n // 4, n // 2, n]), np.array(vs))
        h_tol = cfg.tolerances.get("hurst", 0.05)
        out.append(_row(cfg.name, n, delta, "hurst", h_hat, 0.0, consts["H"],
                        abs(h_hat - consts["H"]) <= h_tol))
    return out


def run_stable_limit(cfg: ScenarioConfig, threads: int = 1) -> list:
    """ECF of the rescaled S_n against the stable limit of the stable-basis
    theorem, parameters (beta, rho_a K_+, rho_a K_-)."""
    seed = cfg.seed_spec
    beta = seed.beta
    regime = RegimeSpec(STABLE_BASIS_I, beta=beta)
    consts = limit_constants(regime, cfg.trawl, seed)
    kp, km = consts["k_plus_limit"], consts["k_minus_limit"]
    gamma_lim = 0.0 if beta == 1 else (kp - km) / abs(beta - 1)
    psi = lambda z: levy.stable_exponent(beta, kp, km, gamma_lim, z)
    z_grid = np.arange(-3.0, 3.01, 0.25)
    tol = cfg.tolerances.get("ecf", 0.05)
    out = []
    for n in cfg.n_list:
        delta = cfg.delta(n)
        rng = path_rng(cfg.master_seed, n, tag=8)
        s = sample_final_sums(seed, cfg.trawl, n, delta, cfg.num_paths, rng)
        scaled = rescale_factor(regime, n, delta, cfg.trawl) * s
        dist = ecf_distance(scaled, psi, 1.0, z_grid)
        out.append(_row(cfg.name, n, delta, "ecf_stable", dist, 0.0, tol,
                        dist <= tol))
    return out


def run_gaussian_ma(cfg: ScenarioConfig, threads: int = 1) -> list:
    """Poisson intensity lambda^(n) = n with a kernel trawl: covariance of
    the normalized process vs int g(t-r) g(s-r) dr, and vanishing skewness."""
    g = cfg.regime_params.get("g", lambda s: np.exp(-s))
    tr = cfg.trawl if cfg.trawl is not None else kernel_to_trawl(g)
    times = np.asarray(cfg.regime_params.get("times", (0.0, 0.25, 0.5)))
    delta = float(times[1] - times[0])
    out = []
    skews = []
    for n in cfg.n_list:
        seed = LevySeedSpec.poisson(float(n))
        ens = simulate_ensemble(seed, tr, times.size, delta, cfg.num_paths,
                                cfg.master_seed + n, threads=threads, tag=9)
        centered = (ens.paths - n * tr.lebesgue_A()) / math.sqrt(n)
        d = centered[:, 0]
        skews.append(float(np.mean(d**3)) / float(np.std(d, ddof=1)) ** 3)
        if n == max(cfg.n_list):
            cov, se = empirical_cov_matrix(centered)
            for a in range(times.size):
                for b in range(a, times.size):
                    target = float(tr.tail(abs(times[a] - times[b])))
                    ok = abs(cov[a, b] - target) <= 3 * se[a, b]
                    out.append(_row(cfg.name, n, float(times[b] - times[a]),
                                    f"ma_cov_{a}{b}", cov[a, b], se[a, b],
                                    target, ok))
    trend = all(abs(b) < abs(a) for a, b in zip(skews, skews[1:]))
    out.append(_row(cfg.name, max(cfg.n_list), delta, "skewness_final",
                    skews[-1], 0.0, 0.0, trend))
    return out


def run_finite_mu(cfg: ScenarioConfig, threads: int = 1) -> list:
    """Riemann sum vs trapezoid integral of the same fine path: the sup gap
    must shrink by >= 2x from the coarse stride to the fine one."""
    n_fine = cfg.regime_params.get("n_fine", 2**14)
    mu = cfg.regime_params.get("mu", 1.0)
    strides = cfg.regime_params.get("strides", (64, 4))
    fine_delta = mu / n_fine
    out = []
    for tag, seed in enumerate(cfg.regime_params.get(
            "seeds", (LevySeedSpec.poisson(1.0), LevySeedSpec.gaussian(0.0, 1.0)))):
        rng = path_rng(cfg.master_seed, tag, tag=10)
        path = sim.simulate_grid_path(seed, cfg.trawl, n_fine, fine_delta, rng)
        mean = trawl_mean(seed, cfg.trawl)
        gaps = []
        for stride in strides:
            riemann, integral = sums.coarse_sums_from_fine(path, fine_delta,
                                                           stride, mean)
            gaps.append(float(np.max(np.abs(riemann - integral))))
        ratio = gaps[0] / gaps[-1] if gaps[-1] > 0 else np.inf
        out.append(_row(cfg.name, n_fine, fine_delta,
                        f"riemann_gap_ratio_{seed.family}", ratio, 0.0, 2.0,
                        ratio >= 2.0))
    return out


_PIPELINES: dict[str, Callable] = {
    "exact_law": run_exact_law,
    "acf": run_acf,
    "moment4": run_moment4,
    "variance_regimes": run_variance_regimes,
    "short_memory": run_short_memory,
    "zero_mu_second_gauss": run_zero_mu_gauss,
    "long_memory_gauss": run_long_memory_gauss,
    "stable_basis_i": run_stable_limit,
    "gaussian_ma": run_gaussian_ma,
    "finite_mu": run_finite_mu,
}


def run_scenario(cfg: ScenarioConfig, threads: int = 1) -> dict:
    """Run one scenario; returns {"schema": 1, rows, pass}."""
    if cfg.kind not in _PIPELINES:
        raise ValueError(f"unknown scenario kind {cfg.kind!r}")
    if cfg.num_paths < 1:
        raise ValueError("num_paths must be >= 1")
    if list(cfg.n_list) != sorted(set(cfg.n_list)):
        raise ValueError("n_list must be strictly increasing")
    rows = _PIPELINES[cfg.kind](cfg, threads=threads)
    return {"schema": 1, "scenario": cfg.name,
            "rows": rows, "pass": all(r["pass"] for r in rows)}
