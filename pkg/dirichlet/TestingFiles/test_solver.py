"""
Tests for the operator, the continuity method and the fixed-epsilon solver.
"""
import numpy as np
import pytest

from dirichlet.barriers import equidistance_cap
from dirichlet.grid import build_domain, constant_field, evaluate_state
from dirichlet.schemas import DomainShape, ShapeKind
from dirichlet.solver import (
    ContinuationSource,
    ContinuationStats,
    G_derivatives,
    G_eval,
    STAGE_MARGIN,
    assemble_linearized,
    continuity_solve,
    curvature_stages,
    epsilon_continuation,
    newton_solve,
    operator_coefficients,
    solve_fixed_epsilon,
)
from geometry.hypgeom import F_batch
from geometry.schemas import CurvatureFunctionSpec, PointJet
from schemas.schedule import SolveSchedule
from utils.errors import AdmissibilityError, ConfigurationError, ConvergenceError

SIGMA = 0.6
EPSILON = 0.04
RADIUS = 0.78

GENERIC_JET = PointJet(u=0.5, Du=np.array([0.3, -0.2]), D2u=np.array([[-0.4, 0.1], [0.1, -0.2]]))


def _shifted(jet, du=0.0, dp=None, dh=None):
    return PointJet(
        u=jet.u + du,
        Du=jet.Du if dp is None else jet.Du + dp,
        D2u=jet.D2u if dh is None else jet.D2u + dh,
    )


@pytest.mark.parametrize("k,l", [(1, 0), (2, 0), (2, 1)])
def test_derivatives_match_finite_differences(k, l):
    spec = CurvatureFunctionSpec(n=2, k=k, l=l)
    G_st, G_s, G_u = G_derivatives(GENERIC_JET, spec)
    step = 1e-6

    fd_u = (G_eval(_shifted(GENERIC_JET, du=step), spec) - G_eval(_shifted(GENERIC_JET, du=-step), spec)) / (2 * step)
    assert G_u == pytest.approx(fd_u, rel=1e-6, abs=1e-8)

    for s in range(2):
        bump = np.zeros(2)
        bump[s] = step
        fd = (G_eval(_shifted(GENERIC_JET, dp=bump), spec) - G_eval(_shifted(GENERIC_JET, dp=-bump), spec)) / (2 * step)
        assert G_s[s] == pytest.approx(fd, rel=1e-6, abs=1e-8)

    for s, t in ((0, 0), (1, 1), (0, 1)):
        bump = np.zeros((2, 2))
        bump[s, t] = bump[t, s] = step
        fd = (G_eval(_shifted(GENERIC_JET, dh=bump), spec) - G_eval(_shifted(GENERIC_JET, dh=-bump), spec)) / (2 * step)
        factor = 1.0 if s == t else 2.0
        assert G_st[s, t] == pytest.approx(fd / factor, rel=1e-6, abs=1e-8)


def test_G_st_is_symmetric_positive_definite(quotient_spec):
    G_st, _, G_u = G_derivatives(GENERIC_JET, quotient_spec)
    np.testing.assert_allclose(G_st, G_st.T)
    assert np.all(np.linalg.eigvalsh(G_st) > 0.0)
    assert G_u < 0.0


def test_G_on_horosphere_and_cap(mean_spec, gauss_spec):
    horosphere = PointJet(u=0.25, Du=np.zeros(2), D2u=np.zeros((2, 2)))
    assert G_eval(horosphere, mean_spec) == pytest.approx(4.0)

    cap = equidistance_cap(RADIUS, SIGMA, EPSILON)
    x = np.array([0.2, -0.35])
    jet = PointJet(u=float(cap.height(x)), Du=cap.gradient(x), D2u=cap.hessian(x))
    for spec in (mean_spec, gauss_spec):
        assert jet.u * G_eval(jet, spec) == pytest.approx(SIGMA, abs=1e-12)


def test_inadmissible_jets_are_rejected(mean_spec):
    with pytest.raises(AdmissibilityError) as excinfo:
        operator_coefficients(np.array([1.0]), np.zeros((1, 2)), np.array([-10.0 * np.eye(2)]), mean_spec)
    assert excinfo.value.nodes == [0]
    with pytest.raises(AdmissibilityError):
        operator_coefficients(np.array([-0.5]), np.zeros((1, 2)), np.zeros((1, 2, 2)), mean_spec)
    with pytest.raises(AdmissibilityError):
        G_eval(PointJet(u=1.0, Du=np.zeros(2), D2u=-10.0 * np.eye(2)), mean_spec)


def test_linearization_about_the_horosphere(coarse_disk, mean_spec):
    state = evaluate_state(coarse_disk, constant_field(coarse_disk, EPSILON), EPSILON)
    u = state.u
    system = assemble_linearized(state, SIGMA / u, -SIGMA / u ** 2, mean_spec)

    assert system.matrix.shape == (coarse_disk.n_unknowns, coarse_disk.n_unknowns)
    assert system.matrix.format == "csc"
    assert system.sign_violations.size == 0
    np.testing.assert_allclose(system.zero_order, (SIGMA - 1.0) / u ** 2, rtol=1e-6)
    np.testing.assert_allclose(system.residual, (1.0 - SIGMA) / u, rtol=1e-6)
    assert system.residual_norm == pytest.approx(1.0 - SIGMA, rel=1e-6)
    assert system.zero_order_constant == pytest.approx(1.0 - SIGMA, rel=1e-6)
    assert system.min_ellipticity == pytest.approx(0.5, rel=1e-6)


def test_positive_zero_order_coefficient_is_reported(coarse_disk, mean_spec, caplog):
    state = evaluate_state(coarse_disk, constant_field(coarse_disk, EPSILON), EPSILON)
    u = state.u
    with caplog.at_level("WARNING", logger="dirichlet.solver"):
        system = assemble_linearized(state, SIGMA / u, -10.0 / u ** 2, mean_spec)
    assert system.sign_violations.size == coarse_disk.n_unknowns
    assert "Zero-order coefficient" in caplog.text


def test_continuation_source_families():
    u0 = np.array([0.1, 0.2])
    F0 = np.array([1.0, 1.0])
    source = ContinuationSource.initial(SIGMA, 10.0, F0, u0)
    Psi, Psi_u = source.evaluate(u0, 0.0)
    np.testing.assert_allclose(Psi, F0)
    np.testing.assert_allclose(Psi_u, [10.0, 10.0])
    u = np.array([0.3, 0.25])
    Psi, _ = source.evaluate(u, 1.0)
    np.testing.assert_allclose(Psi, SIGMA + 10.0 * (u - u0))
    assert not source.is_constant

    assert ContinuationSource.monotone(SIGMA, 10.0, u0, u0).is_constant

    polish = ContinuationSource.polish(SIGMA, 10.0, u0)
    Psi, Psi_u = polish.evaluate(u, 1.0)
    np.testing.assert_allclose(Psi, SIGMA)
    np.testing.assert_allclose(Psi_u, 0.0)


def test_newton_accepts_a_start_that_already_solves(coarse_disk, cap_schedule):
    u0 = constant_field(coarse_disk, EPSILON)
    F0, _, _ = F_batch(cap_schedule.spec, evaluate_state(coarse_disk, u0, EPSILON).Av)
    source = ContinuationSource.initial(SIGMA, 1.0 / EPSILON, F0, u0.values)
    U, iterations, residual = newton_solve(coarse_disk, u0.values, EPSILON, source, 0.0, cap_schedule)
    assert iterations == 0
    np.testing.assert_array_equal(U, u0.values)
    assert residual <= cap_schedule.newton_tol


def test_continuity_solve_counts_steps(coarse_disk, cap_schedule):
    u0 = constant_field(coarse_disk, EPSILON)
    F0, _, _ = F_batch(cap_schedule.spec, evaluate_state(coarse_disk, u0, EPSILON).Av)
    source = ContinuationSource.initial(SIGMA, 1.0 / EPSILON, F0, u0.values)
    stats = ContinuationStats()
    u1 = continuity_solve(coarse_disk, u0, source, cap_schedule, stats=stats)
    assert stats.t_steps >= cap_schedule.continuity_steps
    assert stats.newton_iterations > 0
    assert u1.boundary_value == EPSILON
    assert np.min(u1.values - u0.values) > 0.0
    assert evaluate_state(coarse_disk, u1, EPSILON).all_admissible


def test_coarse_cap_solve_converges(coarse_cap_state, cap_schedule):
    state = coarse_cap_state
    assert state.all_admissible
    assert state.residual_norm <= 1e-6
    assert state.history[-1]["cauchy"] <= cap_schedule.monotone_tol
    assert state.history[0]["kind"] == "monotone"
    assert state.history[0]["min_increment"] > 0.0
    assert np.min(state.u) > EPSILON


def test_coarse_cap_matches_equidistance_sphere(coarse_cap_state, coarse_disk):
    cap = equidistance_cap(RADIUS, SIGMA, EPSILON)
    error = np.abs(coarse_cap_state.u - cap.height(coarse_disk.points))
    assert np.max(error) <= 2e-2
    np.testing.assert_allclose(coarse_cap_state.kappa[coarse_disk.interior_mask], SIGMA, atol=5e-2)


def test_epsilon_too_large_for_barriers(coarse_disk, cap_schedule):
    with pytest.raises(ConfigurationError) as excinfo:
        solve_fixed_epsilon(coarse_disk, cap_schedule, 1.0)
    assert excinfo.value.messages
    with pytest.raises(ConfigurationError):
        epsilon_continuation(coarse_disk, SolveSchedule(sigma=SIGMA, epsilon_ladder=[1.0]))


def test_ladder_keeps_prefix_on_failure(coarse_disk):
    schedule = SolveSchedule(sigma=SIGMA, epsilon_ladder=[EPSILON, EPSILON / 2], max_newton=1, min_step=0.5)
    result = epsilon_continuation(coarse_disk, schedule)
    assert not result.completed
    assert isinstance(result.failure, ConvergenceError)
    assert result.failed_epsilon == EPSILON
    assert result.states == []
    assert result.failure.last_t == 0.0


def test_epsilon_ladder_on_coarse_disk(coarse_disk):
    schedule = SolveSchedule(sigma=SIGMA, epsilon_ladder=[EPSILON, EPSILON / 2])
    result = epsilon_continuation(coarse_disk, schedule)
    assert result.completed
    assert [state.epsilon for state in result.states] == [EPSILON, EPSILON / 2]
    assert result.trend.epsilons == [EPSILON, EPSILON / 2]
    assert result.trend.kappa_variation is not None
    for record in result.records:
        assert record.residual <= 1e-6
        assert record.outer_iterations >= 1
        assert {check.name for check in record.checks} >= {"height_bounds", "boundary_nu", "kappa_bound"}


@pytest.mark.slow
@pytest.mark.parametrize("k,l", [(1, 0), (2, 0), (2, 1)])
def test_cap_recovery_at_full_resolution(k, l):
    """Every quotient recovers the equidistance cap to 5e-3 at h = 1/64."""
    shape = DomainShape(shape=ShapeKind.DISK, radius=RADIUS)
    domain = build_domain(shape, 1.0 / 64.0)
    epsilon = 0.02
    schedule = SolveSchedule(sigma=SIGMA, spec=CurvatureFunctionSpec(n=2, k=k, l=l), epsilon_ladder=[epsilon])
    state = solve_fixed_epsilon(domain, schedule, epsilon)
    cap = equidistance_cap(RADIUS, SIGMA, epsilon)
    assert np.max(np.abs(state.u - cap.height(domain.points))) <= 5e-3
    assert state.residual_norm <= 2.0 * schedule.newton_tol


def test_curvature_stages_only_where_the_boundary_needs_them(mean_spec, gauss_spec, quotient_spec):
    assert curvature_stages(mean_spec, SIGMA) == []
    assert curvature_stages(gauss_spec, 0.3) == []
    assert curvature_stages(quotient_spec, 0.3) == []

    stages = curvature_stages(mean_spec, 0.3)
    assert stages == pytest.approx([0.5 / 0.85, 0.25 / 0.85 ** 2])
    assert all(stage > 0.3 for stage in stages)
    assert 0.5 * stages[-1] <= STAGE_MARGIN * 0.3


def test_small_sigma_mean_curvature_starts_through_stages(coarse_disk, caplog):
    schedule = SolveSchedule(sigma=0.3, epsilon_ladder=[EPSILON])
    with caplog.at_level("INFO", logger="dirichlet.solver"):
        state = solve_fixed_epsilon(coarse_disk, schedule, EPSILON)
    assert "intermediate solve at sigma=0.5882" in caplog.text
    assert state.all_admissible
    assert state.residual_norm <= 2.0 * schedule.newton_tol
    cap = equidistance_cap(RADIUS, 0.3, EPSILON)
    assert np.max(np.abs(state.u - cap.height(coarse_disk.points))) <= 1e-2


@pytest.mark.slow
def test_small_sigma_converges_at_full_resolution():
    """sigma = 0.3 converges at h = 1/64, where the horosphere start leaves the cone near the boundary."""
    domain = build_domain(DomainShape(shape=ShapeKind.DISK, radius=RADIUS), 1.0 / 64.0)
    schedule = SolveSchedule(sigma=0.3, epsilon_ladder=[EPSILON])
    state = solve_fixed_epsilon(domain, schedule, EPSILON)
    assert state.all_admissible
    assert state.residual_norm <= 2.0 * schedule.newton_tol
    cap = equidistance_cap(RADIUS, 0.3, EPSILON)
    assert np.max(np.abs(state.u - cap.height(domain.points))) <= 2e-3
