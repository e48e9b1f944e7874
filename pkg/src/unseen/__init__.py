"""Unobserved-class estimation from count-frequency histograms via Gaussian quadrature."""

__version__ = "0.1.0"

from .histogram import CountHistogram, HistogramError, from_counts, parse_counts, parse_histogram
from .moments import MomentSequence, estimate_moments, hankel_determinants, select_order
from .quadrature import (
    QuadratureRule,
    ThreeTermRecurrence,
    chebyshev_recurrence,
    golub_welsch,
    validate_rule,
)
from .estimator import RichnessEstimate, chao_estimate, estimate
from .bootstrap import BootstrapSummary, bagged_estimate, resample

__all__ = [
    "CountHistogram",
    "HistogramError",
    "from_counts",
    "parse_counts",
    "parse_histogram",
    "MomentSequence",
    "estimate_moments",
    "hankel_determinants",
    "select_order",
    "QuadratureRule",
    "ThreeTermRecurrence",
    "chebyshev_recurrence",
    "golub_welsch",
    "validate_rule",
    "RichnessEstimate",
    "chao_estimate",
    "estimate",
    "BootstrapSummary",
    "bagged_estimate",
    "resample",
]
