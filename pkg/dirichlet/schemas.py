"""
Dirichlet problem schemas.

This module defines the domain shape model and the containers passed between
the grid, the solver, the barrier diagnostics and the radial oracle.
"""
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.interpolate import CubicSpline


class ShapeKind(str, Enum):
    """Domain shape enumeration."""
    DISK = "disk"
    ANNULUS = "annulus"
    ELLIPSE = "ellipse"
    BLOB = "blob"


class NodeClass(IntEnum):
    """Grid node classification."""
    EXTERIOR = 0
    BOUNDARY_GHOST = 1
    NEAR_BOUNDARY = 2
    INTERIOR = 3


def _split_floats(value: Any) -> Any:
    """Accepts comma separated text for list fields read from configuration files."""
    if isinstance(value, str):
        parts = [part.strip() for part in value.split(",")]
        return [float(part) for part in parts if part]
    return value


class DomainShape(BaseModel):
    """Level-set description of a bounded planar domain."""
    model_config = ConfigDict(frozen=True, use_enum_values=False)

    shape: ShapeKind
    radius: Optional[float] = Field(None, gt=0, description="Disk radius")
    r_in: Optional[float] = Field(None, gt=0, description="Annulus inner radius")
    r_out: Optional[float] = Field(None, gt=0, description="Annulus outer radius")
    a: Optional[float] = Field(None, gt=0, description="Ellipse semi-axis along x")
    b: Optional[float] = Field(None, gt=0, description="Ellipse semi-axis along y")
    blob_radius: Optional[float] = Field(None, gt=0, description="Mean radius of a smooth blob")
    blob_amplitudes: List[float] = Field(default_factory=list, description="Relative amplitudes of modes 2, 3, ...")
    blob_phases: List[float] = Field(default_factory=list, description="Phases of modes 2, 3, ...")

    @field_validator("blob_amplitudes", "blob_phases", mode="before")
    @classmethod
    def _parse_lists(cls, value: Any) -> Any:
        return _split_floats(value)

    @model_validator(mode="after")
    def _check_parameters(self) -> "DomainShape":
        if self.shape == ShapeKind.DISK and self.radius is None:
            raise ValueError("disk requires radius")
        if self.shape == ShapeKind.ANNULUS:
            if self.r_in is None or self.r_out is None:
                raise ValueError("annulus requires r_in and r_out")
            if not self.r_out > self.r_in:
                raise ValueError(f"annulus requires r_out > r_in, got r_in={self.r_in}, r_out={self.r_out}")
        if self.shape == ShapeKind.ELLIPSE and (self.a is None or self.b is None):
            raise ValueError("ellipse requires a and b")
        if self.shape == ShapeKind.BLOB:
            if self.blob_radius is None:
                raise ValueError("blob requires blob_radius")
            if self.blob_phases and len(self.blob_phases) != len(self.blob_amplitudes):
                raise ValueError("blob_phases must match blob_amplitudes in length")
            # keeps the polar curve star-shaped and far from self-contact
            if sum(abs(amp) * (m + 2) ** 2 for m, amp in enumerate(self.blob_amplitudes)) >= 1.0:
                raise ValueError("blob amplitudes too large: sum |a_m| m^2 must stay below 1")
        return self

    @property
    def rotationally_symmetric(self) -> bool:
        return self.shape in (ShapeKind.DISK, ShapeKind.ANNULUS)

    @property
    def phases(self) -> List[float]:
        return list(self.blob_phases) or [0.0] * len(self.blob_amplitudes)


@dataclass(frozen=True)
class ScalarField:
    """Values of a grid function at the unknown nodes plus its Dirichlet value on the boundary."""
    values: np.ndarray
    boundary_value: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError(f"ScalarField values must be one-dimensional, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("ScalarField values must be finite")
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(values=values, boundary_value=self.boundary_value)


@dataclass
class SurfaceState:
    """
    A height field on a grid domain together with its derived geometry.

    Arrays are indexed by unknown node; matrices carry the node on the first axis.
    """
    domain: Any
    field: ScalarField
    epsilon: float
    Du: np.ndarray
    D2u: np.ndarray
    w: np.ndarray
    nu_vertical: np.ndarray
    Av: np.ndarray
    kappa: np.ndarray
    admissible: np.ndarray
    residual: Optional[np.ndarray] = None
    history: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def u(self) -> np.ndarray:
        return self.field.values

    @property
    def all_admissible(self) -> bool:
        return bool(np.all(self.admissible))

    @property
    def kappa_max(self) -> np.ndarray:
        return self.kappa[:, -1]

    @property
    def kappa_min(self) -> np.ndarray:
        return self.kappa[:, 0]

    @property
    def residual_norm(self) -> Optional[float]:
        if self.residual is None:
            return None
        return float(np.max(np.abs(self.residual), initial=0.0))


@dataclass
class LinearizedSystem:
    """Linearization of r = G - psi about a state, ready for a sparse direct solve."""
    G_st: np.ndarray
    G_s: np.ndarray
    zero_order: np.ndarray
    residual: np.ndarray
    scaled_residual: np.ndarray
    matrix: Any
    sign_violations: np.ndarray
    min_ellipticity: float
    zero_order_constant: float

    @property
    def residual_norm(self) -> float:
        """Infinity norm of u (G - psi) = u G - Psi."""
        return float(np.max(np.abs(self.scaled_residual), initial=0.0))


@dataclass(frozen=True)
class RadialProfile:
    """A rotationally symmetric solution u(r) on an increasing radius grid."""
    r: np.ndarray
    u: np.ndarray
    up: np.ndarray
    upp: np.ndarray
    sigma: float
    epsilon: float
    shape: ShapeKind
    parameter: float

    def sample(self, radii) -> np.ndarray:
        """Cubic spline interpolation of u at the given radii."""
        spline = CubicSpline(self.r, self.u)
        return spline(np.clip(np.asarray(radii, dtype=float), self.r[0], self.r[-1]))

    @property
    def maximum(self) -> Tuple[float, float]:
        index = int(np.argmax(self.u))
        return float(self.r[index]), float(self.u[index])


@dataclass(frozen=True)
class EquidistanceSphere:
    """Euclidean sphere of radius R centered at (a', -sigma R); hyperbolic curvature sigma."""
    center_horizontal: np.ndarray
    R: float
    sigma: float

    def _offset(self, x) -> Tuple[np.ndarray, np.ndarray]:
        delta = np.asarray(x, dtype=float) - self.center_horizontal
        s = np.sqrt(self.R ** 2 - np.sum(delta * delta, axis=-1))
        return delta, s

    def height(self, x) -> np.ndarray:
        """u(x) = sqrt(R^2 - |x - a'|^2) - sigma R."""
        _, s = self._offset(x)
        return s - self.sigma * self.R

    def gradient(self, x) -> np.ndarray:
        delta, s = self._offset(x)
        return -delta / s[..., None]

    def hessian(self, x) -> np.ndarray:
        delta, s = self._offset(x)
        n = delta.shape[-1]
        outer = delta[..., :, None] * delta[..., None, :]
        return -np.eye(n) / s[..., None, None] - outer / (s ** 3)[..., None, None]
