"""
Schema models for the hyperbolic Dirichlet solver.

This module exports the Pydantic models shared by the commands and services.
"""
from schemas.run_config import (
    CurvatureSection, DomainSection, OutputSection, RunConfig, SolveSection
)
from schemas.schedule import SolveSchedule
from schemas.report import (
    CheckResult, DiagnosticsReport, EpsilonRecord, LadderTrend,
    OracleComparison, OracleRow, PropertyCheck, RunStatus, ValidationReport
)
