"""
Solve schedule schema.

This module defines the pydantic model holding the continuation and
tolerance policy of the fixed-epsilon solver and the epsilon ladder.
"""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from geometry.schemas import CurvatureFunctionSpec


class SolveSchedule(BaseModel):
    """Continuation ladder, Newton policy and tolerances for one run."""
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "sigma": 0.6,
                "spec": {"n": 2, "k": 1, "l": 0},
                "epsilon_ladder": [0.04, 0.02, 0.01],
                "continuity_steps": 8,
                "newton_tol": 1e-9,
                "monotone_tol": 1e-8,
            }
        },
    )

    sigma: float = Field(..., gt=0.0, lt=1.0, description="Prescribed curvature, sigma < 1 is necessary")
    spec: CurvatureFunctionSpec = Field(default_factory=CurvatureFunctionSpec)
    epsilon_ladder: List[float] = Field(..., min_length=1, description="Strictly decreasing boundary heights")
    continuity_steps: int = Field(8, ge=4)
    newton_tol: float = Field(1e-9, gt=0.0, description="Infinity norm of u*G - Psi")
    max_newton: int = Field(30, ge=1)
    damping: float = Field(0.5, gt=0.0, lt=1.0, description="Backtracking factor")
    monotone_tol: float = Field(1e-8, gt=0.0)
    max_outer: int = Field(200, ge=1)
    relaxation: Optional[float] = Field(None, ge=0.0, description="M in Psi = sigma + M(u - v); None means 1/epsilon")
    min_step: float = Field(2.0 ** -20, gt=0.0, lt=1.0)
    polish_after: Optional[int] = Field(4, ge=1, description="Monotone steps before the terminal polish")
    warm_start: bool = True

    @field_validator("epsilon_ladder")
    @classmethod
    def _check_ladder(cls, value: List[float]) -> List[float]:
        if any(eps <= 0.0 for eps in value):
            raise ValueError("epsilon ladder entries must be positive")
        if any(later >= earlier for earlier, later in zip(value, value[1:])):
            raise ValueError("epsilon ladder must be strictly decreasing")
        return value

    def relaxation_for(self, epsilon: float) -> float:
        """The relaxation M used at this epsilon, capped at 1/epsilon."""
        ceiling = 1.0 / epsilon
        if self.relaxation is None:
            return ceiling
        return min(self.relaxation, ceiling)

    def continuity_span(self) -> float:
        """Largest change of the source Psi allowed in a single t-step."""
        return (1.0 - self.sigma) / self.continuity_steps
