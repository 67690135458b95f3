"""Python bindings for the joint graphical lasso toolkit."""

from ._core import (
    cross_validate,
    duality_gap,
    empirical_covariance,
    fit,
    fit_gista,
    flsa_group,
    generate,
    group_shrink,
    mse,
    roc_counts,
    soft_threshold,
)

__all__ = [
    "cross_validate",
    "duality_gap",
    "empirical_covariance",
    "fit",
    "fit_gista",
    "flsa_group",
    "generate",
    "group_shrink",
    "mse",
    "roc_counts",
    "soft_threshold",
]
