"""U-empirical Kolmogorov-Smirnov tests.

Statistics built from U-empirical distribution functions, their
large-deviation rates, Monte Carlo calibration and local Bahadur efficiency.
"""

__version__ = "0.1.0"

from .distributions import (Exponential, MakehamAlt, Normal, NormalShift, Symmetrized,
                            Uniform, WeibullAlt, kl_divergence, min_kl_to_null,
                            parse_distribution, sample, standard_normal)
from .efficiency import ALTERNATIVES, local_efficiency, local_slope_coeff, population_limit
from .errors import UEKSError
from .kernels import REGISTRY, eval_kernel, get_family, projection, variance_at
from .large_deviation import (arcones_bound, binomial_tail_bound, kolmogorov_f,
                              kolmogorov_f0, ld_leading_coeff, maximize_variance)
from .montecarlo import critical_value, empirical_ld_rate, p_value, simulate_null
from .statistics import Sample, build_edf, build_udf, compute_statistic, sup_diff

__all__ = [
    "Exponential", "MakehamAlt", "Normal", "NormalShift", "Symmetrized", "Uniform",
    "WeibullAlt", "kl_divergence", "min_kl_to_null", "parse_distribution", "sample",
    "standard_normal", "ALTERNATIVES", "local_efficiency", "local_slope_coeff",
    "population_limit", "UEKSError", "REGISTRY", "eval_kernel", "get_family",
    "projection", "variance_at", "arcones_bound", "binomial_tail_bound", "kolmogorov_f",
    "kolmogorov_f0", "ld_leading_coeff", "maximize_variance", "critical_value",
    "empirical_ld_rate", "p_value", "simulate_null", "Sample", "build_edf", "build_udf",
    "compute_statistic", "sup_diff",
]
