"""Empirical concentration of measure with half spaces under lp perturbations."""

from .core import (ConcentrationEstimate, ConcentrationProblem, Dataset, DomainError, HalfSpace,
                   LpMetric, TrialReport, UnsupportedStructureError, conjugate, lp_norm)
from .analytic import (Diagonal, Full, GaussianSpec, Spherical, gii_lower_bound, optimal_halfspace,
                       sqrt_matrix_p_norm, std_normal_cdf, std_normal_quantile)
from .geometry import (brute_force_expansion_measure, distance_to_halfspace, empirical_measure, expand,
                       nearest_point)
from .spectral import PrincipalComponents, axis_limit, eigendecompose, pow_transform, sample_covariance
from .search import SearchConfig, SearchResult, adv_risk, quantile_bias, search_halfspace
from .evaluation import ConvergencePoint, convergence_sweep, required_sample_size, run_trials, split

__version__ = "0.1.0"
