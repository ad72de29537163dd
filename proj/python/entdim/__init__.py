"""Entropy dimension of probability measures on the real line."""

from ._core import (
    Measure,
    SpecError,
    delta_c_entropy,
    delta_c_fisher,
    delta_c_fractal,
    delta_square,
    dudley_diagnostic,
    entropy,
    fisher,
    fisher_variational,
    free_dimension,
    optimal_K,
    run_cli,
    verify,
)

__all__ = [
    "Measure",
    "SpecError",
    "delta_c_entropy",
    "delta_c_fisher",
    "delta_c_fractal",
    "delta_square",
    "dudley_diagnostic",
    "entropy",
    "fisher",
    "fisher_variational",
    "free_dimension",
    "optimal_K",
    "run_cli",
    "verify",
]
