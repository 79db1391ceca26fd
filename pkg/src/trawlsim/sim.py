"""Exact simulation of trawl processes on a grid, plus reference limits.

The grid simulator realizes the slice-partition decomposition: the union of
the shifted trawl sets A_0, ..., A_{(n-1)Delta} splits into disjoint cells
chi_{i,j} and row tails zeta_{i,n}, each an independent ID draw whose
exponent is (cell area) * psi.  The path is reconstructed as
X_{k Delta} = sum_{i<=k} [ sum_{j>=k} chi_{i,j} + zeta_{i,n} ].

For functionals of a single path that only ever read weighted sums of the
cells (the final partial sum S_n, or the pair (X_0, S_n)), cells sharing a
weight are merged into one ID draw with the summed area; this keeps the law
exact while cutting the cost per replication from O(n^2) to O(n) draws.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .levy import InfiniteMomentError, LevySeedSpec, cell_sample, seed_moments
from .trawl import TrawlFunction

_MASK64 = (1 << 64) - 1

REGIME_ZERO = "zero"
REGIME_FINITE = "finite"
REGIME_INFINITE = "infinite"


@dataclass(frozen=True)
class GridScheme:
    """Observation scheme Delta_n = c * n^(-p); T_n = n * Delta_n.

    p > 1 gives n*Delta_n -> 0, p = 1 gives n*Delta_n = c (mu finite),
    0 < p < 1 gives n*Delta_n -> infinity.
    """

    n: int
    c: float = 1.0
    p: float = 0.5

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.c <= 0 or self.p <= 0:
            raise ValueError("need c > 0 and p > 0")

    @property
    def delta(self) -> float:
        return self.c * self.n ** (-self.p)

    @property
    def T(self) -> float:
        return self.n * self.delta

    @property
    def regime(self) -> str:
        if self.p > 1:
            return REGIME_ZERO
        if self.p == 1:
            return REGIME_FINITE
        return REGIME_INFINITE


@dataclass(frozen=True)
class PathEnsemble:
    """Simulated discrete paths with their provenance."""

    paths: np.ndarray          # (num_paths, n)
    n: int
    delta: float
    seed_spec: LevySeedSpec
    trawl: TrawlFunction
    master_seed: int
    centered: bool = False


def path_rng(master_seed: int, path_index: int, tag: int = 0) -> np.random.Generator:
    """Counter-based stream keyed by (master_seed, tag, path_index).

    Streams are independent of scheduling, so any thread layout reproduces
    the same ensemble bytes.
    """
    key = np.array([master_seed & _MASK64,
                    ((tag & 0xFFFF) << 48) | (path_index & 0xFFFFFFFFFFFF)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _tail_grid(trawl: TrawlFunction, delta: float, n: int) -> np.ndarray:
    """tail(k * delta) for k = 0..n+1."""
    return np.asarray(trawl.tail(delta * np.arange(n + 2)), dtype=float)


@lru_cache(maxsize=64)
def _cached_slice_areas(trawl: TrawlFunction, delta: float, n: int):
    tg = _tail_grid(trawl, delta, n)
    a0 = tg[:-1] - tg[1:]
    area1 = tg[:-2] - 2 * tg[1:-1] + tg[2:]
    a0.setflags(write=False)
    area1.setflags(write=False)
    return a0[:-1], area1, float(tg[n])


def slice_area_arrays(trawl: TrawlFunction, delta: float, n: int):
    """(a0, area1, zeta0) for an n-grid.

    a0[j] is the area of the row-0 slice chi_{0,j}; area1[d] the area of a
    row i >= 1 slice at offset d = j - i; zeta0 the area tail(n * delta) of
    the row-0 remainder.  Row-i >= 1 remainders have area a0[n - i].
    Results are cached per (trawl, delta, n); arrays are read-only.
    """
    return _cached_slice_areas(trawl, delta, n)


def simulate_grid_path(seed_spec: LevySeedSpec, trawl: TrawlFunction,
                       n: int, delta: float,
                       rng: np.random.Generator) -> np.ndarray:
    """One exact path (X_0, X_Delta, ..., X_{(n-1)Delta}).

    Cells are consumed row by row with per-row suffix sums; the full cell
    matrix is never materialized.
    """
    if n < 1 or delta <= 0:
        raise ValueError("need n >= 1 and delta > 0")
    a0, area1, zeta0 = slice_area_arrays(trawl, delta, n)
    x = np.zeros(n)
    for i in range(n):
        areas = a0[: n - i] if i == 0 else area1[: n - i]
        zeta_area = zeta0 if i == 0 else float(a0[n - i])
        cells = np.atleast_1d(cell_sample(seed_spec, areas, rng))
        zeta = cell_sample(seed_spec, zeta_area, rng)
        # suffix sums: row i contributes sum_{j >= k} chi_{i,j} + zeta to X_k
        x[i:] += np.cumsum(cells[::-1])[::-1] + zeta
    return x


def simulate_ensemble(seed_spec: LevySeedSpec, trawl: TrawlFunction,
                      n: int, delta: float, num_paths: int,
                      master_seed: int, threads: int = 1,
                      tag: int = 0) -> PathEnsemble:
    """Independent exact paths; output bytes depend only on master_seed."""
    if num_paths < 1:
        raise ValueError("num_paths must be >= 1")
    paths = np.empty((num_paths, n))

    def work(idx: int):
        paths[idx] = simulate_grid_path(seed_spec, trawl, n, delta,
                                        path_rng(master_seed, idx, tag))

    if threads <= 1:
        for idx in range(num_paths):
            work(idx)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(num_paths)))
    return PathEnsemble(paths=paths, n=n, delta=delta, seed_spec=seed_spec,
                        trawl=trawl, master_seed=master_seed)


def _seed_mean(seed_spec: LevySeedSpec) -> float:
    try:
        return seed_moments(seed_spec).mean
    except InfiniteMomentError:
        return 0.0


def final_sum_group_areas(trawl: TrawlFunction, delta: float, n: int) -> np.ndarray:
    """Total cell area carrying weight d in S_n, for d = 1..n.

    In S_n = sum_k (X_{k Delta} - mean) the cell chi_{i,j} appears with
    weight j - i + 1 and zeta_{i,n} with weight n - i; summing the areas of
    all cells sharing a weight gives one ID draw per weight.
    """
    a0, area1, zeta0 = slice_area_arrays(trawl, delta, n)
    d = np.arange(1, n + 1)
    total = a0[d - 1] + (n - d) * area1[d - 1]
    total[: n - 1] += a0[1:n]        # zeta_{i,n}, i >= 1, weight d = n - i
    total[n - 1] += zeta0            # zeta_{0,n}
    return total


def sample_final_sums(seed_spec: LevySeedSpec, trawl: TrawlFunction,
                      n: int, delta: float, num_reps: int,
                      rng: np.random.Generator,
                      batch: int = 256) -> np.ndarray:
    """Exact draws of the centered final partial sum S_n, one per rep.

    O(n) ID draws per replication via weight grouping.
    """
    areas = final_sum_group_areas(trawl, delta, n)
    weights = np.arange(1, n + 1, dtype=float)
    mean_shift = _seed_mean(seed_spec) * float(weights @ areas)
    out = np.empty(num_reps)
    for lo in range(0, num_reps, batch):
        hi = min(lo + batch, num_reps)
        draws = cell_sample(seed_spec, np.broadcast_to(areas, (hi - lo, n)), rng)
        out[lo:hi] = draws @ weights - mean_shift
    return out


def sample_x0_and_final_sum(seed_spec: LevySeedSpec, trawl: TrawlFunction,
                            n: int, delta: float, num_reps: int,
                            rng: np.random.Generator,
                            batch: int = 256):
    """Exact joint draws of (X_0, S_n), both centered.

    Cells group by the weight pair (weight in X_0, weight in S_n): row-0
    cells and zeta_{0,n} carry (1, d); rows i >= 1 carry (0, d).
    """
    a0, area1, zeta0 = slice_area_arrays(trawl, delta, n)
    d = np.arange(1, n + 1)
    areas_x0 = a0[:n].copy()                 # pair (1, d), d = j + 1
    areas_x0[n - 1] += zeta0
    areas_s = (n - d[: n - 1]) * area1[: n - 1] + a0[1:n]   # pair (0, d)
    w_s = d.astype(float)
    mean = _seed_mean(seed_spec)
    shift_x0 = mean * float(areas_x0.sum())
    shift_s = mean * float(w_s @ areas_x0 + w_s[: n - 1] @ areas_s)
    x0 = np.empty(num_reps)
    s = np.empty(num_reps)
    for lo in range(0, num_reps, batch):
        hi = min(lo + batch, num_reps)
        dx = cell_sample(seed_spec, np.broadcast_to(areas_x0, (hi - lo, n)), rng)
        ds = cell_sample(seed_spec, np.broadcast_to(areas_s, (hi - lo, n - 1)), rng)
        x0[lo:hi] = dx.sum(axis=1) - shift_x0
        s[lo:hi] = dx @ w_s + ds @ w_s[: n - 1] - shift_s
    return x0, s


def gaussian_checkpoint_sums(seed_spec: LevySeedSpec, trawl: TrawlFunction,
                             n: int, delta: float,
                             checkpoints: Sequence[int], num_reps: int,
                             rng: np.random.Generator) -> np.ndarray:
    """Exact joint draws of (S_m)_{m in checkpoints} for a Gaussian seed.

    The vector is exactly Gaussian with Cov(S_m, S_{m'}) =
    (C(m) + C(m') - C(|m' - m|)) / 2 where C(m) = Var(S_m) comes from the
    ACF; a Cholesky factor then yields exact draws.  Only valid when the
    seed is Gaussian (the functional is then Gaussian with this covariance).
    """
    if seed_spec.family != "gaussian":
        raise ValueError("exact checkpoint sampling requires a Gaussian seed")
    var_seed = seed_moments(seed_spec).variance
    cps = np.asarray(checkpoints, dtype=int)
    if np.any(cps < 0) or np.any(cps > n):
        raise ValueError("checkpoints must lie in [0, n]")
    gam = var_seed * np.asarray(trawl.tail(delta * np.arange(n + 1)), dtype=float)
    # C(m) = m Gamma(0) + 2 sum_{j<m} (m - j) Gamma(j Delta), via cumsums
    cs = np.concatenate(([0.0], np.cumsum(gam)))
    csj = np.concatenate(([0.0], np.cumsum(gam * np.arange(n + 1))))
    m_all = np.arange(n + 1)
    C = m_all * gam[0] + 2 * (m_all * (cs[m_all] - gam[0]) - (csj[m_all] - 0.0))
    k = len(cps)
    cov = np.empty((k, k))
    for a in range(k):
        for b in range(k):
            cov[a, b] = 0.5 * (C[cps[a]] + C[cps[b]] - C[abs(cps[a] - cps[b])])
    # small jitter guards rank deficiency when checkpoints repeat
    chol = np.linalg.cholesky(cov + 1e-12 * np.eye(k) * max(C[cps].max(), 1.0))
    return rng.standard_normal((num_reps, k)) @ chol.T


def simulate_gaussian_ma(g, times: Sequence[float], t_trunc: float,
                         mesh: float, rng: np.random.Generator) -> np.ndarray:
    """Discretized MA process Y_t = int_{-inf}^t g(t - s) dB_s at the times.

    White-noise increments live on a mesh covering [min(times) - t_trunc,
    max(times)]; covariance error is O(mesh) plus the truncation bias.
    """
    times = np.asarray(times, dtype=float)
    lo = times.min() - t_trunc
    grid = np.arange(lo, times.max(), mesh)
    noise = rng.standard_normal(grid.size) * np.sqrt(mesh)
    out = np.empty(times.size)
    for k, t in enumerate(times):
        lag = t - (grid + mesh / 2)
        w = np.where(lag > 0, g(np.maximum(lag, 0.0)), 0.0)
        out[k] = w @ noise
    return out


def fbm_covariance(H: float, times: Sequence[float]) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    tt, ss = np.meshgrid(t, t, indexing="ij")
    return 0.5 * (tt ** (2 * H) + ss ** (2 * H) - np.abs(tt - ss) ** (2 * H))


def simulate_fbm(H: float, times: Sequence[float],
                 rng: np.random.Generator,
                 num_paths: int = 1) -> np.ndarray:
    """Exact fBm draws at the given times via dense Cholesky factorization."""
    if not 0 < H < 1:
        raise ValueError("H must lie in (0, 1)")
    t = np.asarray(times, dtype=float)
    if t.size > 2048:
        raise ValueError("dense factorization limited to 2048 times")
    cov = fbm_covariance(H, t)
    try:
        chol = np.linalg.cholesky(cov + 1e-14 * np.eye(t.size))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"fBm covariance not positive definite (cond ~ {np.linalg.cond(cov):.2e})"
        ) from exc
    z = rng.standard_normal((num_paths, t.size))
    out = z @ chol.T
    return out[0] if num_paths == 1 else out


def simulate_stable_levy(beta: float, k_plus: float, k_minus: float,
                         times: Sequence[float],
                         rng: np.random.Generator) -> np.ndarray:
    """Strictly stable Levy motion at the given times (t = 0 maps to 0)."""
    t = np.asarray(times, dtype=float)
    if np.any(np.diff(t) < 0) or (t.size and t[0] < 0):
        raise ValueError("times must be non-decreasing and >= 0")
    seed = LevySeedSpec.stable(beta, k_plus, k_minus)
    dt = np.diff(np.concatenate(([0.0], t)))
    incs = np.where(dt > 0, np.atleast_1d(cell_sample(seed, dt, rng)), 0.0)
    return np.cumsum(incs)
