"""
Pointwise curvature calculus for graphs in hyperbolic space.

This package exposes the curvature quotient functions and the curvature
matrices of vertical and radial graphs in the half-space model.
"""
from geometry.schemas import CurvatureData, CurvatureFunctionSpec, PointJet
from geometry.symfunc import (
    asymptotic_excess,
    asymptotic_limit,
    cone_contains,
    elementary_symmetric_normalized,
    eval_f,
    excess_surrogate,
    f_and_grad,
    grad_f,
)
from geometry.hypgeom import (
    F_batch,
    F_value_and_derivative,
    curvature_matrices,
    gamma_matrix,
    radial_curvature_matrix,
    scale_jet,
    vertical_curvature_data,
)

__all__ = [
    "CurvatureData",
    "CurvatureFunctionSpec",
    "PointJet",
    "asymptotic_excess",
    "asymptotic_limit",
    "cone_contains",
    "elementary_symmetric_normalized",
    "eval_f",
    "excess_surrogate",
    "f_and_grad",
    "grad_f",
    "F_batch",
    "F_value_and_derivative",
    "curvature_matrices",
    "gamma_matrix",
    "radial_curvature_matrix",
    "scale_jet",
    "vertical_curvature_data",
]
