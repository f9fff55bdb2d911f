"""Pooled source/target nonparametric regression under covariate shift.

Modules: densities (Beta and singular-point covariate laws), spread (pointwise
bandwidth), estimators (window-average and local polynomial fits), adapt
(Beta MLE, Lepski smoothness selection), rates (closed-form minimax rates),
simharness (Monte Carlo harness) and cli.
"""

__version__ = "0.1.0"

from .adapt import LepskiConfig, beta_mle, lepski_beta, lepski_tau_range, plugin_fit, split_halves
from .densities import BetaDensity, Piece, SingularityDensitySpec, validate_pair, validate_spec
from .errors import ConfigError, EmptyBinError, NumericalError, SLPError, SpreadError
from .estimators import EstimatorConfig, Sample, fit_curve, local_poly_estimate, nw_estimate
from .rates import RateResult, classify_region, general_tlr, sar, tlr, tsp_set
from .simharness import ExperimentConfig, fit_slope, grid_loss, log_sar_series, run_cell, target_function
from .bumps import worst_case_function
from .spread import SpreadContext, crossing_points, solve_spread, spread_derivative, spread_order

__all__ = [
    "BetaDensity",
    "Piece",
    "SingularityDensitySpec",
    "validate_spec",
    "validate_pair",
    "SpreadContext",
    "solve_spread",
    "crossing_points",
    "spread_derivative",
    "spread_order",
    "Sample",
    "EstimatorConfig",
    "nw_estimate",
    "local_poly_estimate",
    "fit_curve",
    "beta_mle",
    "split_halves",
    "LepskiConfig",
    "lepski_tau_range",
    "lepski_beta",
    "plugin_fit",
    "RateResult",
    "classify_region",
    "tlr",
    "sar",
    "tsp_set",
    "general_tlr",
    "ExperimentConfig",
    "target_function",
    "grid_loss",
    "run_cell",
    "log_sar_series",
    "fit_slope",
    "worst_case_function",
    "SLPError",
    "ConfigError",
    "NumericalError",
    "SpreadError",
    "EmptyBinError",
]
