"""
Curvature quotient functions.

f = (sigma_k / sigma_l)^(1/(k-l)) on the positive cone, with sigma_j the
normalized elementary symmetric polynomials. All functions accept a single
vector of length n or a stack of vectors with the components on the last axis.
"""
import logging
import math
from typing import Tuple

import numpy as np

from geometry.schemas import CurvatureFunctionSpec
from utils.errors import ArgumentError, ConeDomainError

logger = logging.getLogger(__name__)


def _elementary_raw(lam: np.ndarray, k: int) -> np.ndarray:
    """Unnormalized e_k by incremental product expansion over the components."""
    n = lam.shape[-1]
    coeffs = [np.ones(lam.shape[:-1])] + [np.zeros(lam.shape[:-1]) for _ in range(k)]
    for i in range(n):
        li = lam[..., i]
        for j in range(min(i + 1, k), 0, -1):
            coeffs[j] = coeffs[j] + li * coeffs[j - 1]
    return coeffs[k]


def elementary_symmetric_normalized(lam, k: int):
    """
    Normalized k-th elementary symmetric polynomial e_k(lam) / binomial(n, k).

    Args:
        lam: Vector (or stack of vectors) of length n
        k: Order, 0 <= k <= n

    Returns:
        The normalized polynomial value (float for a single vector)

    Raises:
        ArgumentError: If k is out of range
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    if not 0 <= k <= n:
        raise ArgumentError(f"Order k={k} outside [0, {n}]")
    value = _elementary_raw(lam, k) / math.comb(n, k)
    return float(value) if lam.ndim == 1 else value


def cone_contains(lam):
    """
    Membership in the positive cone K_n^+ (strict positivity, no tolerance).

    Args:
        lam: Vector (or stack of vectors)

    Returns:
        bool for a single vector, boolean array for a stack
    """
    lam = np.asarray(lam, dtype=float)
    inside = np.all(lam > 0.0, axis=-1)
    return bool(inside) if lam.ndim == 1 else inside


def _require_cone(lam: np.ndarray) -> None:
    inside = np.all(lam > 0.0, axis=-1)
    if not np.all(inside):
        flat = lam.reshape(-1, lam.shape[-1])
        offending = flat[int(np.argmin(np.reshape(inside, -1)))]
        raise ConeDomainError(
            f"Curvature vector {np.array2string(np.asarray(offending), precision=6)} is outside the positive cone",
            eigenvalues=np.asarray(offending).tolist(),
        )


def _quotient(spec: CurvatureFunctionSpec, lam: np.ndarray) -> np.ndarray:
    sk = _elementary_raw(lam, spec.k) / math.comb(spec.n, spec.k)
    sl = _elementary_raw(lam, spec.l) / math.comb(spec.n, spec.l)
    return (sk / sl) ** (1.0 / (spec.k - spec.l))


def eval_f(spec: CurvatureFunctionSpec, lam):
    """
    Evaluates f = (sigma_k / sigma_l)^(1/(k-l)).

    Args:
        spec: Curvature function selection
        lam: Vector (or stack of vectors) in the positive cone

    Returns:
        f(lam) (float for a single vector)

    Raises:
        ConeDomainError: If lam is outside the positive cone
    """
    lam = np.asarray(lam, dtype=float)
    _check_length(spec, lam)
    _require_cone(lam)
    value = _quotient(spec, lam)
    return float(value) if lam.ndim == 1 else value


def _check_length(spec: CurvatureFunctionSpec, lam: np.ndarray) -> None:
    if lam.shape[-1] != spec.n:
        raise ArgumentError(f"Vector length {lam.shape[-1]} does not match n={spec.n}")


def _drop_component_elementary(lam: np.ndarray, i: int, order: int) -> np.ndarray:
    """e_order of lam with component i removed (order may be -1)."""
    if order < 0:
        return np.zeros(lam.shape[:-1])
    return _elementary_raw(np.delete(lam, i, axis=-1), order)


def f_and_grad(spec: CurvatureFunctionSpec, lam) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluates f together with its gradient.

    Uses d e_k / d lam_i = e_{k-1}(lam without component i).

    Args:
        spec: Curvature function selection
        lam: Vector (or stack of vectors) in the positive cone

    Returns:
        Tuple of f values and gradients (gradients on the last axis)

    Raises:
        ConeDomainError: If lam is outside the positive cone
    """
    lam = np.asarray(lam, dtype=float)
    _check_length(spec, lam)
    _require_cone(lam)

    n, k, l = spec.n, spec.k, spec.l
    ek = _elementary_raw(lam, k)
    el = _elementary_raw(lam, l)
    value = ((ek / math.comb(n, k)) / (el / math.comb(n, l))) ** (1.0 / (k - l))

    grad = np.empty_like(lam)
    for i in range(n):
        dk = _drop_component_elementary(lam, i, k - 1) / ek
        dl = _drop_component_elementary(lam, i, l - 1) / el
        grad[..., i] = value * (dk - dl) / (k - l)
    return value, grad


def grad_f(spec: CurvatureFunctionSpec, lam) -> np.ndarray:
    """
    Componentwise partial derivatives f_i of f.

    Args:
        spec: Curvature function selection
        lam: Vector (or stack of vectors) in the positive cone

    Returns:
        np.ndarray: Gradient with the same shape as lam

    Raises:
        ConeDomainError: If lam is outside the positive cone
    """
    return f_and_grad(spec, lam)[1]


def asymptotic_excess(spec: CurvatureFunctionSpec, R: float) -> float:
    """
    Evaluates f(1, ..., 1, 1 + R).

    Nondecreasing in R with limit (k/l)^(1/(k-l)) for l >= 1.

    Args:
        spec: Curvature function selection
        R: Nonnegative shift of the last component

    Returns:
        float: The function value

    Raises:
        ArgumentError: If R is negative
    """
    if R < 0:
        raise ArgumentError(f"Shift R={R} must be nonnegative")
    lam = np.ones(spec.n)
    lam[-1] += R
    return float(_quotient(spec, lam))


def cone_face_value(spec: CurvatureFunctionSpec) -> float:
    """
    f(0, 1, ..., 1), the continuous extension of f to a face of the cone.

    Zero for k = n; positive otherwise (1/2 for the mean curvature of a surface).
    """
    lam = np.ones(spec.n)
    lam[0] = 0.0
    return float(_quotient(spec, lam))


def asymptotic_limit(spec: CurvatureFunctionSpec) -> float:
    """Limit of asymptotic_excess as R tends to infinity (infinite for l = 0)."""
    if spec.l == 0:
        return math.inf
    return (spec.k / spec.l) ** (1.0 / (spec.k - spec.l))


def excess_surrogate(spec: CurvatureFunctionSpec) -> float:
    """Recorded stand-in for the structural constant epsilon_0: limit - 1."""
    return asymptotic_limit(spec) - 1.0
