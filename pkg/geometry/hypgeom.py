"""
Pointwise geometry of vertical and radial graphs in the half-space model.

Curvature matrices, principal curvatures, the vertical normal component and
the F-calculus F(A) = f(lambda(A)), F^{ij}(A). The batched functions take
stacks of points on the leading axes and are what the solver uses; the
single-point functions wrap them.
"""
import logging
from typing import Tuple

import numpy as np

from geometry.schemas import CurvatureData, CurvatureFunctionSpec, PointJet
from geometry.symfunc import f_and_grad
from utils.errors import ConeDomainError, GeometryError

logger = logging.getLogger(__name__)

# Eigenvalue gap below which gradient components are symmetrized
COALESCENCE_GAP = 1e-8


def gamma_matrix(Du) -> Tuple[np.ndarray, np.ndarray]:
    """
    The matrix gamma^{ij} = delta_ij - u_i u_j / (w (1 + w)) and its inverse.

    The inverse gamma_{ij} = delta_ij + u_i u_j / (1 + w) is the square root of
    the Euclidean metric delta_ij + u_i u_j.

    Args:
        Du: Gradient (or stack of gradients on the last axis)

    Returns:
        Tuple of (gamma^{ij}, gamma_{ij})
    """
    p = np.asarray(Du, dtype=float)
    n = p.shape[-1]
    w = np.sqrt(1.0 + np.sum(p * p, axis=-1))
    outer = p[..., :, None] * p[..., None, :]
    eye = np.eye(n)
    gamma_up = eye - outer / (w * (1.0 + w))[..., None, None]
    gamma_down = eye + outer / (1.0 + w)[..., None, None]
    return gamma_up, gamma_down


def curvature_matrices(u, Du, D2u) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Batched hyperbolic and Euclidean curvature matrices of vertical graphs.

    Av = (1/w)(I + u gamma D2u gamma), AE = (1/w) gamma D2u gamma.

    Args:
        u: Heights, shape (...)
        Du: Gradients, shape (..., n)
        D2u: Hessians, shape (..., n, n)

    Returns:
        Tuple of (Av, AE, gamma^{ij}, w)
    """
    u = np.asarray(u, dtype=float)
    Du = np.asarray(Du, dtype=float)
    D2u = np.asarray(D2u, dtype=float)
    gamma_up, _ = gamma_matrix(Du)
    w = np.sqrt(1.0 + np.sum(Du * Du, axis=-1))
    conj = gamma_up @ D2u @ gamma_up
    AE = conj / w[..., None, None]
    Av = (np.eye(Du.shape[-1]) + u[..., None, None] * conj) / w[..., None, None]
    # enforce exact symmetry lost in the triple product
    Av = 0.5 * (Av + np.swapaxes(Av, -1, -2))
    AE = 0.5 * (AE + np.swapaxes(AE, -1, -2))
    return Av, AE, gamma_up, w


def convexity_matrix(u, Du, D2u) -> np.ndarray:
    """The matrix {delta_ij + u_i u_j + u u_ij}, half the Hessian of |x|^2 + u^2."""
    u = np.asarray(u, dtype=float)
    Du = np.asarray(Du, dtype=float)
    D2u = np.asarray(D2u, dtype=float)
    return np.eye(Du.shape[-1]) + Du[..., :, None] * Du[..., None, :] + u[..., None, None] * D2u


def _cholesky_succeeds(matrix: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return False
    return True


def vertical_curvature_data(jet: PointJet) -> CurvatureData:
    """
    Curvature data of the vertical graph at one point.

    Args:
        jet: Height, gradient and Hessian at the point

    Returns:
        CurvatureData: Av, AE, sorted hyperbolic and Euclidean principal
        curvatures, the shared eigenvectors, nu^{n+1} = 1/w and admissibility
    """
    Av, AE, _, w = curvature_matrices(jet.u, jet.Du, jet.D2u)
    kappa, vectors = np.linalg.eigh(Av)
    kappa_euclidean = np.linalg.eigvalsh(AE)
    admissible = _cholesky_succeeds(convexity_matrix(jet.u, jet.Du, jet.D2u))
    return CurvatureData(
        Av=Av,
        AE=AE,
        kappa=kappa,
        kappa_euclidean=kappa_euclidean,
        eigenvectors=vectors,
        nu_vertical=float(1.0 / w),
        admissible=admissible,
    )


def radial_curvature_matrix(v_grad, v_hess, y: float, e_dot_grad: float) -> np.ndarray:
    """
    Hyperbolic curvature matrix of a radial graph X = e^v z over the upper hemisphere.

    A^s = (1/w)(y gamma v_hess gamma - (e . grad v) I), w = sqrt(1 + |grad v|^2),
    with derivatives taken in an orthonormal tangent frame.

    Args:
        v_grad: Covariant gradient of v in the frame
        v_hess: Covariant Hessian of v in the frame
        y: Height coordinate e . z of the base point, 0 < y <= 1
        e_dot_grad: The product e . grad v

    Returns:
        np.ndarray: The symmetric matrix A^s

    Raises:
        GeometryError: If y is outside (0, 1]
    """
    if not 0.0 < y <= 1.0:
        raise GeometryError(f"Hemisphere height y={y} outside (0, 1]")
    v_grad = np.asarray(v_grad, dtype=float)
    v_hess = np.asarray(v_hess, dtype=float)
    gamma_up, _ = gamma_matrix(v_grad)
    w = float(np.sqrt(1.0 + v_grad @ v_grad))
    A = (y * gamma_up @ v_hess @ gamma_up - e_dot_grad * np.eye(v_grad.size)) / w
    return 0.5 * (A + A.T)


def _symmetrize_coalescent(lam: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Averages gradient components over each maximal run of (nearly) equal eigenvalues."""
    n = lam.shape[-1]
    breaks = np.diff(lam, axis=-1) >= COALESCENCE_GAP
    first = np.ones(lam.shape[:-1] + (1,), dtype=bool)
    runs = np.cumsum(np.concatenate([first, breaks], axis=-1), axis=-1)
    result = grad.copy()
    for run in range(1, n + 1):
        member = runs == run
        size = np.sum(member, axis=-1, keepdims=True)
        mean = np.sum(np.where(member, grad, 0.0), axis=-1, keepdims=True) / np.maximum(size, 1)
        result = np.where(member & (size > 1), mean, result)
    return result


def F_batch(spec: CurvatureFunctionSpec, A) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Batched F(A) = f(lambda(A)) and F^{ij}(A) = V diag(f_i) V^T.

    Args:
        spec: Curvature function selection
        A: Symmetric matrices, shape (..., n, n)

    Returns:
        Tuple of (F values, F^{ij} matrices, sorted eigenvalues)

    Raises:
        ConeDomainError: If some spectrum leaves the positive cone
    """
    A = np.asarray(A, dtype=float)
    lam, vectors = np.linalg.eigh(A)
    value, grad = f_and_grad(spec, lam)
    grad = _symmetrize_coalescent(lam, grad)
    Fij = (vectors * grad[..., None, :]) @ np.swapaxes(vectors, -1, -2)
    Fij = 0.5 * (Fij + np.swapaxes(Fij, -1, -2))
    return value, Fij, lam


def F_value_and_derivative(spec: CurvatureFunctionSpec, A) -> Tuple[float, np.ndarray]:
    """
    F(A) and its derivative F^{ij} for one symmetric matrix.

    Args:
        spec: Curvature function selection
        A: Symmetric n x n matrix with spectrum in the positive cone

    Returns:
        Tuple of (F(A), F^{ij}(A))

    Raises:
        ConeDomainError: If the spectrum leaves the positive cone; the error
        carries the offending eigenvalues
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {A.shape}")
    lam = np.linalg.eigvalsh(A)
    if not np.all(lam > 0.0):
        raise ConeDomainError(
            f"Spectrum {np.array2string(lam, precision=6)} is outside the positive cone",
            eigenvalues=lam.tolist(),
        )
    value, Fij, _ = F_batch(spec, A)
    return float(value), Fij


def scale_jet(jet: PointJet, factor: float) -> PointJet:
    """
    Jet of the rescaled graph factor * u(x / factor) at the image point.

    Hyperbolic curvatures are invariant under this dilation.
    """
    return PointJet(u=factor * jet.u, Du=jet.Du.copy(), D2u=jet.D2u / factor)
