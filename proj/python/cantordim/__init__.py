"""Lyapunov exponents of random nonnegative 2x2 matrix products and the
Hausdorff dimension of intersections of translated digit-restricted Cantor
sets."""

from ._core import (
    __version__,
    build_matrices,
    check_nac,
    classify_missing_one,
    compute_dimension,
    dim_from_lambda,
    grid_stationary_integral,
    induced_map_coefficients,
    is_degenerate,
    mc_lyapunov,
    search_phi,
    toothless_matrices,
    truncation_plan,
)

__all__ = [
    "__version__",
    "build_matrices",
    "check_nac",
    "classify_missing_one",
    "compute_dimension",
    "dim_from_lambda",
    "grid_stationary_integral",
    "induced_map_coefficients",
    "is_degenerate",
    "mc_lyapunov",
    "search_phi",
    "toothless_matrices",
    "truncation_plan",
]
