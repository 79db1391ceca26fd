"""Exact trawl-process simulation and limit-theorem verification."""

from .levy import (InfiniteMomentError, JumpDistribution, LevyMeasureSpec,
                   LevySeedSpec, bg_index, cell_sample, cumulant,
                   fixed_jumps, normal_jumps, seed_moments, stable_exponent)
from .sim import (GridScheme, PathEnsemble, gaussian_checkpoint_sums,
                  path_rng, sample_final_sums, sample_x0_and_final_sum,
                  simulate_ensemble, simulate_fbm, simulate_gaussian_ma,
                  simulate_grid_path, simulate_stable_levy)
from .stats import (LimitTarget, ecf_distance, empirical_cov_matrix,
                    empirical_moments, hurst_from_increments, ks_distance,
                    trawl_fourth_central_moment)
from .sums import (RegimeSpec, asymptotic_var_S, coarse_sums_from_fine,
                   limit_constants, partial_sums, rescale_factor,
                   theoretical_var_S, trawl_mean)
from .trawl import (TrawlFunction, acf, check_assumption_A1,
                    exponential_trawl, kernel_to_trawl, power_law_trawl,
                    row_tail_area, slice_area, spectral_density)

__version__ = "0.1.0"
