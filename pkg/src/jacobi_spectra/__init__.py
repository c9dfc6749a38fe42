"""Beta-Jacobi ensembles: tridiagonal sampling, spectral measures, limit laws
and rate functions.
"""
__version__ = "0.1.0"

from .ensemble import (EnsembleParams, LimitParams, ParameterDomainError, Regime,
                       SpectralMeasure, TridiagonalMatrix, classify_regime, ensemble_for,
                       joint_log_density, limit_params_of)
from .rng import DEFAULT_SEED, SeededStream, sample_beta, sample_gamma
from .sampler import draw_coefficients, build_tridiagonal, rescale, sample_rescaled
from .spectra import (ConvergenceError, eigen_decompose, kolmogorov_distance_spectral_vs_empirical,
                      moments_by_recurrence, moments_of_measure, polynomial_integral)
from .limits import (LimitCDF, LimitJacobiParams, SupportInterval, density_from_m, jacobi_density,
                     limit_cdf, limiting_jacobi, m_function, marchenko_pastur_density,
                     modified_wachter_density, semicircle_density, support_of_limit,
                     wachter_density, wachter_support)
from .coeffs import (ChainDecomposition, DecompositionError, decompose, jacobi_from_uv,
                     uv_from_jacobi)
from .ldp import RateValue, g, rate_IM, rate_IP, rate_measure, rate_of_spectral_measure
from .experiments import (ExperimentReport, clt_experiment, convergence_experiment,
                          extremal_eigenvalue_check, ks_distance, wasserstein2)
