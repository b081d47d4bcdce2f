"""Coresets and shifted-domain fitting for p-th-root-link Poisson regression."""

from ._poiscore import (
    Coreset,
    FitResult,
    HullResult,
    SimplexInstance,
    build_coreset,
    build_uniform,
    circle_sensitivity_demo,
    constraint_margin,
    generate_circle,
    generate_f2,
    hull,
    lambda_p1,
    lambda_star,
    lambert_w0,
    minimize,
    minimize_coreset,
    point_loss,
    point_loss_log,
    summarize_ratios,
    total_loss,
)

__all__ = [
    "Coreset",
    "FitResult",
    "HullResult",
    "SimplexInstance",
    "build_coreset",
    "build_uniform",
    "circle_sensitivity_demo",
    "constraint_margin",
    "generate_circle",
    "generate_f2",
    "hull",
    "lambda_p1",
    "lambda_star",
    "lambert_w0",
    "minimize",
    "minimize_coreset",
    "point_loss",
    "point_loss_log",
    "summarize_ratios",
    "total_loss",
]
