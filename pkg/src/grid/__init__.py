"""Radial mesh and discrete operators."""

from .radial_grid import (
    AxisPolicy,
    RadialField,
    RadialGrid,
    additivity_defect,
    apply_bessel_laplacian,
    apply_vector_laplacian,
    build_grid,
    cumulative_radial_integral,
    gradient_energy,
    integrate_radial,
    laplacian_errors,
    operator_error_ratios,
    radial_divergence,
    radial_gradient,
)

__all__ = [
    "AxisPolicy",
    "RadialField",
    "RadialGrid",
    "additivity_defect",
    "apply_bessel_laplacian",
    "apply_vector_laplacian",
    "build_grid",
    "cumulative_radial_integral",
    "gradient_energy",
    "integrate_radial",
    "laplacian_errors",
    "operator_error_ratios",
    "radial_divergence",
    "radial_gradient",
]
