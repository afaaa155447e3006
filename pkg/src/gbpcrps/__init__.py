"""Closed-form CRPS for the generalized Beta-prime distribution and its
Singh-Maddala, Dagum and log-logistic special cases."""

from .crps import (
    CrpsBreakdown,
    WorkPoint,
    crps_auto,
    crps_dagum,
    crps_gbp,
    crps_log_logistic,
    crps_singh_maddala,
)
from .distribution import GbpParams, cdf, mean, pdf, quantile, sample
from .errors import (
    DegenerateConnectionError,
    DomainError,
    InfiniteMeanError,
    NonConvergenceError,
    ToleranceNotMetError,
)
from .specfun import SeriesControl

__all__ = [
    "CrpsBreakdown",
    "WorkPoint",
    "crps_auto",
    "crps_dagum",
    "crps_gbp",
    "crps_log_logistic",
    "crps_singh_maddala",
    "GbpParams",
    "cdf",
    "mean",
    "pdf",
    "quantile",
    "sample",
    "SeriesControl",
    "DegenerateConnectionError",
    "DomainError",
    "InfiniteMeanError",
    "NonConvergenceError",
    "ToleranceNotMetError",
]

__version__ = "0.1.0"
