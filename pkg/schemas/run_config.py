"""
Run configuration schemas.

This module defines the Pydantic models validating a sectioned run
configuration file before any solve starts.
"""
import hashlib
import json
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from dirichlet.schemas import DomainShape, _split_floats
from geometry.schemas import CurvatureFunctionSpec
from schemas.schedule import SolveSchedule

_DISABLED = ("", "none", "off", "null")


def _optional(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() in _DISABLED:
        return None
    return value


class DomainSection(DomainShape):
    """The [domain] section: shape parameters and grid spacing."""
    h: float = Field(..., gt=0.0, description="Grid spacing")

    def to_shape(self) -> DomainShape:
        return DomainShape.model_validate(self.model_dump(exclude={"h"}))


class CurvatureSection(BaseModel):
    """The [curvature] section selecting f = (sigma_k / sigma_l)^(1/(k-l))."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(2, description="Hypersurface dimension; the grid solver is planar")
    k: int = Field(1, ge=1)
    l: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_indices(self) -> "CurvatureSection":
        if self.n != 2:
            raise ValueError(f"n={self.n} is not supported by the grid solver, which requires n = 2")
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")
        if self.l >= self.k:
            raise ValueError(f"l={self.l} must be smaller than k={self.k}")
        return self

    @property
    def spec(self) -> CurvatureFunctionSpec:
        return CurvatureFunctionSpec(n=self.n, k=self.k, l=self.l)


class SolveSection(BaseModel):
    """The [solve] section: sigma, epsilon ladder and solver policy."""
    model_config = ConfigDict(frozen=True)

    sigma: float
    epsilon0: float = Field(0.04, gt=0.0)
    ladder_length: int = Field(6, ge=1)
    epsilons: Optional[List[float]] = None
    continuity_steps: int = Field(8, ge=4)
    newton_tol: float = Field(1e-9, gt=0.0)
    max_newton: int = Field(30, ge=1)
    damping: float = Field(0.5, gt=0.0, lt=1.0)
    monotone_tol: float = Field(1e-8, gt=0.0)
    max_outer: int = Field(200, ge=1)
    relaxation: Optional[float] = Field(None, ge=0.0)
    min_step: float = Field(2.0 ** -20, gt=0.0, lt=1.0)
    polish_after: Optional[int] = Field(4, ge=1)
    warm_start: bool = True

    @field_validator("sigma")
    @classmethod
    def _check_sigma(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError(
                f"sigma must lie in (0, 1), got {value}: no solution exists for sigma >= 1"
            )
        return value

    @field_validator("epsilons", mode="before")
    @classmethod
    def _parse_epsilons(cls, value: Any) -> Any:
        return _split_floats(_optional(value))

    @field_validator("relaxation", "polish_after", mode="before")
    @classmethod
    def _parse_optional(cls, value: Any) -> Any:
        return _optional(value)

    @field_validator("epsilons")
    @classmethod
    def _check_epsilons(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is None:
            return value
        if not value:
            raise ValueError("epsilons must list at least one value")
        if any(eps <= 0.0 for eps in value):
            raise ValueError("epsilons must be positive")
        if any(later >= earlier for earlier, later in zip(value, value[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        return value

    @property
    def ladder(self) -> List[float]:
        """Explicit epsilons, or epsilon0 * 2^-j for j = 0 .. ladder_length - 1."""
        if self.epsilons:
            return list(self.epsilons)
        return [self.epsilon0 * 2.0 ** (-j) for j in range(self.ladder_length)]


class OutputSection(BaseModel):
    """The [output] section."""
    model_config = ConfigDict(frozen=True)

    directory: Optional[str] = None
    export_csv: bool = True
    export_svg: bool = True
    report_json: bool = True


class RunConfig(BaseModel):
    """A complete validated run configuration."""
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "domain": {"shape": "disk", "radius": 0.78, "h": 0.015625},
                "curvature": {"n": 2, "k": 1, "l": 0},
                "solve": {"sigma": 0.6, "epsilon0": 0.04, "ladder_length": 6},
                "output": {"directory": "runs/disk-cap", "export_csv": True, "export_svg": True},
            }
        },
    )

    domain: DomainSection
    curvature: CurvatureSection = Field(default_factory=CurvatureSection)
    solve: SolveSection
    output: OutputSection = Field(default_factory=OutputSection)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form of the configuration."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def schedule(self) -> SolveSchedule:
        """The solver schedule described by the [solve] and [curvature] sections."""
        solve = self.solve
        return SolveSchedule(
            sigma=solve.sigma,
            spec=self.curvature.spec,
            epsilon_ladder=solve.ladder,
            continuity_steps=solve.continuity_steps,
            newton_tol=solve.newton_tol,
            max_newton=solve.max_newton,
            damping=solve.damping,
            monotone_tol=solve.monotone_tol,
            max_outer=solve.max_outer,
            relaxation=solve.relaxation,
            min_step=solve.min_step,
            polish_after=solve.polish_after,
            warm_start=solve.warm_start,
        )

    def tolerances(self) -> Dict[str, Any]:
        """Every tolerance the run uses, embedded in reports."""
        solve = self.solve
        return {
            "newton_tol": solve.newton_tol,
            "monotone_tol": solve.monotone_tol,
            "damping": solve.damping,
            "min_step": solve.min_step,
            "max_newton": solve.max_newton,
            "max_outer": solve.max_outer,
            "continuity_steps": solve.continuity_steps,
            "relaxation": solve.relaxation,
            "polish_after": solve.polish_after,
        }
