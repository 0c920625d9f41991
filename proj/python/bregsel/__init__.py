"""Bregman-divergence model selection between Gamma and log-normal fits."""

from ._core import (
    ConvergenceError,
    DegenerateEstimateError,
    DegenerateFitError,
    DegenerateVarianceError,
    DomainError,
    Error,
    SizeError,
    StepFailureError,
    bregman,
    cv_bandwidth,
    fit,
    gof,
    kde,
    select,
    simulate,
)

__all__ = [
    "ConvergenceError",
    "DegenerateEstimateError",
    "DegenerateFitError",
    "DegenerateVarianceError",
    "DomainError",
    "Error",
    "SizeError",
    "StepFailureError",
    "bregman",
    "cv_bandwidth",
    "fit",
    "gof",
    "kde",
    "select",
    "simulate",
]
