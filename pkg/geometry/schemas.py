"""
Geometry schemas.

Pydantic models for curvature function selection and plain containers for
pointwise jets and their curvature data.
"""
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from utils.errors import ConeDomainError


class CurvatureFunctionSpec(BaseModel):
    """Selects f = (sigma_k / sigma_l)^(1/(k-l)) in dimension n."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(2, ge=2, description="Dimension of the hypersurface")
    k: int = Field(1, ge=1, description="Numerator index")
    l: int = Field(0, ge=0, description="Denominator index")

    @model_validator(mode="after")
    def _check_indices(self) -> "CurvatureFunctionSpec":
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")
        if self.l >= self.k:
            raise ValueError(f"l={self.l} must be smaller than k={self.k}")
        return self

    @property
    def label(self) -> str:
        """Short human-readable name."""
        if self.l == 0 and self.k == 1:
            return "mean"
        if self.l == 0 and self.k == self.n:
            return "gauss"
        return f"sigma{self.k}/sigma{self.l}"


@dataclass(frozen=True)
class PointJet:
    """Height, gradient and Hessian of a vertical graph at one point."""
    u: float
    Du: np.ndarray
    D2u: np.ndarray

    def __post_init__(self) -> None:
        Du = np.asarray(self.Du, dtype=float).reshape(-1)
        D2u = np.asarray(self.D2u, dtype=float)
        object.__setattr__(self, "Du", Du)
        object.__setattr__(self, "D2u", D2u)
        if not self.u > 0:
            raise ConeDomainError(f"Height u={self.u} must be positive in the half-space model")
        if D2u.shape != (Du.size, Du.size):
            raise ValueError(f"Hessian shape {D2u.shape} does not match gradient length {Du.size}")
        if np.max(np.abs(D2u - D2u.T), initial=0.0) > 1e-14 * max(1.0, np.max(np.abs(D2u), initial=0.0)):
            raise ValueError("Hessian must be symmetric")

    @property
    def n(self) -> int:
        return self.Du.size

    @property
    def w(self) -> float:
        return float(np.sqrt(1.0 + self.Du @ self.Du))


@dataclass(frozen=True)
class CurvatureData:
    """Curvature matrices and principal curvatures of a vertical graph at one point."""
    Av: np.ndarray
    AE: np.ndarray
    kappa: np.ndarray
    kappa_euclidean: np.ndarray
    eigenvectors: np.ndarray
    nu_vertical: float
    admissible: bool
