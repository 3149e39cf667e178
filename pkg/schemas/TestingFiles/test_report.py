"""
Tests for the report and schedule schemas.
"""
import pytest
from pydantic import ValidationError

from schemas.report import (
    CheckResult,
    DiagnosticsReport,
    EpsilonRecord,
    LadderTrend,
    OracleComparison,
    OracleRow,
    RunStatus,
)
from schemas.schedule import SolveSchedule


def _record(epsilon, checks):
    return EpsilonRecord(
        epsilon=epsilon, outer_iterations=5, newton_iterations=30, residual=1e-10, max_w=1.6,
        max_kappa=0.61, min_kappa=0.59, nu_boundary_min=0.6, nu_boundary_max=0.64, w_boundary_max=1.6,
        checks=checks,
    )


def _report(records, **extra):
    return DiagnosticsReport(config_hash="abc", h=0.05, curvature="mean", sigma=0.6, records=records, **extra)


def test_check_result_failure_semantics():
    assert CheckResult(name="height_bounds", passed=False).failed
    assert not CheckResult(name="kappa_bound", passed=False, hard=False).failed
    assert not CheckResult(name="boundary_w", passed=None).failed


def test_status_passes_with_report_only_failures():
    record = _record(0.02, [CheckResult(name="admissibility", passed=True),
                            CheckResult(name="kappa_bound", passed=False, hard=False)])
    assert record.passed
    assert _report([record]).evaluate_status() == RunStatus.PASSED


def test_status_fails_on_a_hard_check():
    record = _record(0.02, [CheckResult(name="height_bounds", passed=False)])
    assert _report([record]).evaluate_status() == RunStatus.FAILED


def test_status_fails_on_unbounded_curvature_trend():
    report = _report([_record(0.02, [])], trend=LadderTrend(kappa_bounded=False))
    assert report.evaluate_status() == RunStatus.FAILED


def test_failure_marker_takes_precedence():
    report = _report([_record(0.02, [CheckResult(name="height_bounds", passed=False)])],
                     failure={"error_code": "convergence_failure"})
    assert report.evaluate_status() == RunStatus.NUMERICAL_FAILURE


def test_oracle_comparison_passes_only_with_rows():
    row = OracleRow(epsilon=0.02, max_error=1e-3, mean_error=5e-4, tolerance=2e-3, passed=True,
                    oracle_parameter=0.4)
    comparison = OracleComparison(config_hash="abc", shape="disk", h=0.02, sigma=0.6, curvature="mean")
    assert not comparison.passed
    comparison.rows.append(row)
    assert comparison.passed
    comparison.failure = {"error_code": "no_solution"}
    assert not comparison.passed


def test_schedule_validation():
    with pytest.raises(ValidationError):
        SolveSchedule(sigma=0.6, epsilon_ladder=[0.02, 0.04])
    with pytest.raises(ValidationError):
        SolveSchedule(sigma=1.0, epsilon_ladder=[0.02])
    with pytest.raises(ValidationError):
        SolveSchedule(sigma=0.6, epsilon_ladder=[])


def test_schedule_relaxation_and_span():
    schedule = SolveSchedule(sigma=0.6, epsilon_ladder=[0.04, 0.02])
    assert schedule.relaxation_for(0.04) == pytest.approx(25.0)
    capped = SolveSchedule(sigma=0.6, epsilon_ladder=[0.04], relaxation=10.0)
    assert capped.relaxation_for(0.04) == 10.0
    assert capped.relaxation_for(0.5) == 2.0
    assert schedule.continuity_span() == pytest.approx(0.05)
