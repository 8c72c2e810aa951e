"""Monte Carlo toolkit for conditional price profiles around local extrema."""

from __future__ import annotations

__version__ = "0.1.0"

from ._kernels import BACKEND
from .errors import (EmptyDistribution, InsufficientData, InvalidArgument, NumericsError,
                     OrderViolation, SwitchlabError, TickDataError, TickParseError,
                     TickValidationError, UndefinedCorrelation)
from .extrema import MAX, MIN, ExtremaSet, TrendSet, epsilon_window, find_extrema, segment_trends
from .fitting import fit_finite_singularity, fit_power_law, scan_fit_range
from .gp import QmfParams, build_cov_table, cov_eval, sample_stationary_gaussian
from .processes import (IncrementSpec, PricePath, attach_intertrade, attach_volume,
                        calibrate_sigma_mu, gen_gbm, gen_qmf, gen_random_walk)
from .profiles import (StackedProfile, conditional_increment_stats, local_volatility,
                       merge_profiles, stack_profile)
from .stats import CorrelationReport, correlation_report, fisher_ci, pearson_corr, skewness

__all__ = [
    "BACKEND", "MAX", "MIN", "CorrelationReport", "EmptyDistribution", "ExtremaSet",
    "IncrementSpec", "InsufficientData", "InvalidArgument", "NumericsError", "OrderViolation",
    "PricePath", "QmfParams", "StackedProfile", "SwitchlabError", "TickDataError",
    "TickParseError", "TickValidationError", "TrendSet", "UndefinedCorrelation",
    "attach_intertrade", "attach_volume", "build_cov_table", "calibrate_sigma_mu",
    "conditional_increment_stats", "correlation_report", "cov_eval", "epsilon_window",
    "find_extrema", "fisher_ci", "fit_finite_singularity", "fit_power_law", "gen_gbm",
    "gen_qmf", "gen_random_walk", "local_volatility", "merge_profiles", "pearson_corr",
    "sample_stationary_gaussian", "scan_fit_range", "segment_trends", "skewness",
    "stack_profile",
]
