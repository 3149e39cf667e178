"""
Diagnostics report schemas.

This module defines the Pydantic models serialized into the JSON report of
a run: per-check results, per-epsilon records, the ladder trend and the
oracle comparison table.
"""
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class RunStatus(str, Enum):
    """Run status enumeration."""
    PASSED = "passed"
    FAILED = "failed"
    NUMERICAL_FAILURE = "numerical_failure"


class CheckResult(BaseModel):
    """Outcome of one a priori estimate evaluated on a state."""
    name: str
    passed: Optional[bool] = Field(None, description="None for report-only checks and checks not applicable")
    hard: bool = True
    value: Optional[float] = None
    margin: Optional[float] = None
    tolerance: float = 0.0
    location: Optional[Dict[str, Any]] = None
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.hard and self.passed is False


class EpsilonRecord(BaseModel):
    """Summary and checks of the converged state at one epsilon."""
    epsilon: float
    outer_iterations: int
    newton_iterations: int
    residual: float
    max_w: float
    max_kappa: float
    min_kappa: float
    nu_boundary_min: float
    nu_boundary_max: float
    w_boundary_max: float
    curvature_ratio_max: Optional[float] = None
    min_outer_increment: Optional[float] = None
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(check.failed for check in self.checks)


class LadderTrend(BaseModel):
    """Behavior of the converged states as epsilon decreases."""
    epsilons: List[float] = Field(default_factory=list)
    max_kappa: List[float] = Field(default_factory=list)
    boundary_w_excess: List[float] = Field(default_factory=list)
    kappa_bound: Optional[float] = None
    kappa_variation: Optional[float] = None
    kappa_bounded: Optional[bool] = None
    boundary_w_slope: Optional[float] = None
    boundary_w_monotone: Optional[bool] = None
    boundary_normal_constant: Optional[float] = None
    boundary_hessian: List[float] = Field(default_factory=list)


class DiagnosticsReport(BaseModel):
    """The JSON report of a solve run."""
    config_hash: str
    h: float
    curvature: str
    sigma: float
    excess_surrogate: Optional[float] = None
    tolerances: Dict[str, Any] = Field(default_factory=dict)
    geometry: Dict[str, Any] = Field(default_factory=dict)
    records: List[EpsilonRecord] = Field(default_factory=list)
    trend: LadderTrend = Field(default_factory=LadderTrend)
    status: RunStatus = RunStatus.PASSED
    failure: Optional[Dict[str, Any]] = None

    class Config:
        """Pydantic configuration."""
        json_schema_extra = {
            "example": {
                "config_hash": "5e3c2f7a9d0b",
                "h": 0.015625,
                "curvature": "mean",
                "sigma": 0.6,
                "records": [
                    {
                        "epsilon": 0.02,
                        "outer_iterations": 6,
                        "newton_iterations": 41,
                        "residual": 3.1e-10,
                        "max_w": 1.62,
                        "max_kappa": 0.61,
                        "min_kappa": 0.59,
                        "nu_boundary_min": 0.61,
                        "nu_boundary_max": 0.64,
                        "w_boundary_max": 1.63,
                    }
                ],
                "status": "passed",
            }
        }

    def evaluate_status(self) -> RunStatus:
        """Derives the run status from the failure marker and the hard checks."""
        if self.failure is not None:
            return RunStatus.NUMERICAL_FAILURE
        if any(not record.passed for record in self.records):
            return RunStatus.FAILED
        if self.trend.kappa_bounded is False:
            return RunStatus.FAILED
        return RunStatus.PASSED


class OracleRow(BaseModel):
    """Discrepancy between the grid solution and the radial oracle at one epsilon."""
    epsilon: float
    max_error: float
    mean_error: float
    tolerance: float
    passed: bool
    oracle_parameter: float


class OracleComparison(BaseModel):
    """The table emitted by the oracle-compare command."""
    config_hash: str
    shape: str
    h: float
    sigma: float
    curvature: str
    rows: List[OracleRow] = Field(default_factory=list)
    failure: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return self.failure is None and bool(self.rows) and all(row.passed for row in self.rows)


class PropertyCheck(BaseModel):
    """Outcome of one sampled property of the curvature calculus."""
    name: str
    samples: int
    failures: int
    max_error: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0


class ValidationReport(BaseModel):
    """The report emitted by the validate command."""
    seed: int
    samples: int
    checks: List[PropertyCheck] = Field(default_factory=list)
    counterexamples: List[Dict[str, Any]] = Field(default_factory=list)
    gradient_term_constant: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
