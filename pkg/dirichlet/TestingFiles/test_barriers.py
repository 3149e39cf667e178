"""
Tests for barrier surfaces, a priori estimates and the threshold cubic.
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from dirichlet.barriers import (
    boundary_normal_bounds,
    boundary_nu,
    curvature_ratio_M,
    diagnose,
    epsilon_record,
    equidistance_cap,
    gamma_analysis,
    gamma_cubic,
    gradient_max_principle_check,
    height_bounds,
    kappa_bound_sigma,
    ladder_trend,
)
from dirichlet.grid import build_domain, constant_field, evaluate_state, sample_field
from dirichlet.schemas import DomainShape, ShapeKind
from schemas.report import EpsilonRecord
from schemas.schedule import SolveSchedule
from utils.errors import GeometryError


def test_cap_meets_height_epsilon_on_the_circle():
    for sigma in (0.2, 0.6, 0.95):
        for epsilon in (0.0, 0.01, 0.1):
            cap = equidistance_cap(0.78, sigma, epsilon)
            edge = np.array([[0.78, 0.0], [0.0, -0.78], [0.78 / math.sqrt(2.0), 0.78 / math.sqrt(2.0)]])
            np.testing.assert_allclose(cap.height(edge), epsilon, atol=1e-12)
            assert cap.height(np.zeros(2)) > epsilon


def test_cap_over_the_ideal_boundary():
    cap = equidistance_cap(0.5, 0.6, 0.0)
    np.testing.assert_allclose(cap.height(np.array([[0.5, 0.0], [0.0, 0.5]])), 0.0, atol=1e-12)
    assert cap.R == pytest.approx(0.5 / math.sqrt(1.0 - 0.36))


def test_cap_rejects_sigma_outside_unit_interval():
    with pytest.raises(GeometryError):
        equidistance_cap(0.5, 1.0)
    with pytest.raises(GeometryError):
        equidistance_cap(0.5, 1.2)
    with pytest.raises(GeometryError):
        equidistance_cap(-0.5, 0.6)


def test_height_bounds_formulas():
    lo, hi = height_bounds(0.3, 1.56, 0.6, 0.6, 0.02)
    assert lo == pytest.approx(0.02 * 0.6 / 1.6 + 0.3 * 0.5)
    assert hi == pytest.approx(0.78 * 0.5 + 0.02)
    lo_array, _ = height_bounds(np.array([0.0, 0.1]), 1.0, 0.6, 0.6, 0.02)
    assert lo_array.shape == (2,)


def test_cap_respects_height_bounds():
    sigma, epsilon, r = 0.6, 0.02, 0.78
    cap = equidistance_cap(r, sigma, epsilon)
    radii = np.linspace(0.0, r, 50)
    points = np.column_stack([radii, np.zeros_like(radii)])
    lo, hi = height_bounds(r - radii, 2.0 * r, sigma, sigma, epsilon)
    heights = cap.height(points)
    assert np.all(heights >= lo - 1e-12)
    assert np.all(heights <= hi + 1e-12)


def test_boundary_normal_bounds_for_convex_domains():
    lo, hi = boundary_normal_bounds(0.6, 0.6, 0.02, None, 0.78)
    assert lo == pytest.approx(0.6)
    assert hi == pytest.approx(0.6 + 0.02 * 0.8 / 0.78 + 0.02 ** 2 * 0.4 / 0.78 ** 2)
    lo, hi = boundary_normal_bounds(0.6, 0.6, 0.0, 0.5, 0.25)
    assert (lo, hi) == pytest.approx((0.6, 0.6))


def test_gamma_threshold_is_exact_at_one_eighth():
    analysis = gamma_analysis(math.sqrt(0.125))
    assert abs(analysis.gamma_at_y_star) <= 1e-12
    assert analysis.discrepancy <= 1e-12
    assert analysis.a < analysis.y_star < 1.0


@pytest.mark.parametrize("a", [0.30, 0.34, 0.36, 0.40])
def test_gamma_sign_follows_a_squared(a):
    analysis = gamma_analysis(a)
    assert analysis.positive == (a * a > 0.125)
    assert analysis.gamma_cubic == pytest.approx(analysis.gamma_closed, abs=1e-13)


def test_gamma_endpoints_in_exact_arithmetic():
    for a in (Fraction(3, 10), Fraction(17, 50), Fraction(9, 25), Fraction(2, 5)):
        assert gamma_cubic(a, a) == a
        assert gamma_cubic(Fraction(1), a) == a


def test_gamma_analysis_domain():
    with pytest.raises(GeometryError):
        gamma_analysis(0.0)
    with pytest.raises(GeometryError):
        gamma_analysis(1.0)


def test_kappa_bound_threshold():
    assert kappa_bound_sigma(0.3) is None
    assert kappa_bound_sigma(0.35) is None
    assert kappa_bound_sigma(0.6) == pytest.approx(32.0 * 0.6 / (0.36 - 0.125))
    assert kappa_bound_sigma(0.6) == pytest.approx(81.7, abs=0.05)


def test_diagnostics_on_converged_cap(coarse_cap_state, cap_schedule):
    checks = {check.name: check for check in diagnose(coarse_cap_state, cap_schedule)}
    assert {"height_bounds", "horosphere_floor", "gradient_max_principle", "boundary_w", "boundary_nu",
            "gradient_ceiling", "convexity_gradient", "curvature_ratio_M", "curvature_alternative",
            "kappa_bound", "boundary_hessian", "interior_hessian", "admissibility", "residual"} <= set(checks)
    assert checks["admissibility"].passed
    assert checks["horosphere_floor"].passed
    assert checks["height_bounds"].passed
    assert checks["kappa_bound"].passed
    assert checks["boundary_w"].passed is None
    assert checks["kappa_bound"].location["node"] >= 0


def test_diagnostics_leave_the_state_untouched(coarse_cap_state, cap_schedule):
    before = coarse_cap_state.u.copy()
    diagnose(coarse_cap_state, cap_schedule)
    np.testing.assert_array_equal(coarse_cap_state.u, before)


def test_curvature_ratio_on_cap(coarse_cap_state):
    a = 0.5 * float(np.min(coarse_cap_state.nu_vertical))
    ratio = curvature_ratio_M(coarse_cap_state, a)
    assert ratio.hypothesis_holds
    assert math.isfinite(ratio.value) and ratio.value > 0.0
    assert 0 <= ratio.node < coarse_cap_state.domain.n_unknowns


def test_gradient_max_principle_margin_is_finite(coarse_cap_state):
    assert math.isfinite(gradient_max_principle_check(coarse_cap_state))


def test_epsilon_record_summary(coarse_cap_state, cap_schedule):
    record = epsilon_record(coarse_cap_state, cap_schedule)
    assert record.epsilon == coarse_cap_state.epsilon
    assert record.max_w == pytest.approx(float(np.max(coarse_cap_state.w)))
    assert record.min_kappa > 0.0
    assert record.nu_boundary_min <= record.nu_boundary_max


def _record(epsilon, w_boundary, max_kappa):
    return EpsilonRecord(
        epsilon=epsilon, outer_iterations=5, newton_iterations=20, residual=1e-10, max_w=w_boundary,
        max_kappa=max_kappa, min_kappa=0.5, nu_boundary_min=0.6, nu_boundary_max=0.62,
        w_boundary_max=w_boundary,
    )


def test_ladder_trend_fits_linear_excess():
    sigma = 0.6
    epsilons = [0.04, 0.02, 0.01, 0.005]
    records = [_record(eps, 1.0 / sigma + 2.0 * eps, 0.61) for eps in epsilons]
    trend = ladder_trend(records, sigma)
    assert trend.boundary_w_slope == pytest.approx(1.0, abs=1e-9)
    assert trend.boundary_w_monotone is True
    assert trend.kappa_variation == pytest.approx(0.0)
    assert trend.kappa_bounded is True
    assert trend.boundary_normal_constant > 0.0


def test_ladder_trend_below_threshold_skips_boundedness():
    records = [_record(0.04, 3.4, 0.4), _record(0.02, 3.35, 0.41)]
    trend = ladder_trend(records, 0.3)
    assert trend.kappa_bound is None
    assert trend.kappa_bounded is None


def test_ladder_trend_of_single_record():
    trend = ladder_trend([_record(0.04, 1.7, 0.6)], 0.6)
    assert trend.kappa_variation is None
    assert trend.boundary_w_slope is None


def _sampled_cap_state(domain, sigma, epsilon):
    cap = equidistance_cap(0.78, sigma, epsilon)
    return cap, evaluate_state(domain, sample_field(domain, cap.height, epsilon), epsilon)


def test_boundary_nu_lands_on_the_cap_boundary_value(coarse_disk):
    epsilon = 0.04
    cap, state = _sampled_cap_state(coarse_disk, 0.6, epsilon)
    exact = 0.6 + epsilon / cap.R
    carried = boundary_nu(state)
    nodal = state.nu_vertical[coarse_disk.near_boundary_mask]
    assert carried.shape == nodal.shape
    assert np.max(np.abs(carried - exact)) <= 0.025
    assert np.max(np.abs(carried - exact)) < 0.5 * np.max(np.abs(nodal - exact))


def test_boundary_nu_keeps_flat_nodes(coarse_disk):
    state = evaluate_state(coarse_disk, constant_field(coarse_disk, 0.04), 0.04)
    np.testing.assert_allclose(boundary_nu(state), 1.0)


def test_epsilon_record_reports_carried_boundary_nu(coarse_cap_state, cap_schedule):
    record = epsilon_record(coarse_cap_state, cap_schedule)
    carried = boundary_nu(coarse_cap_state)
    assert record.nu_boundary_min == pytest.approx(float(np.min(carried)))
    assert record.nu_boundary_max == pytest.approx(float(np.max(carried)))


def test_curvature_ratio_offset_comes_from_the_boundary_bound(coarse_cap_state, cap_schedule):
    domain = coarse_cap_state.domain
    checks = {check.name: check for check in diagnose(coarse_cap_state, cap_schedule)}
    nu_lo, _ = boundary_normal_bounds(cap_schedule.sigma, cap_schedule.sigma, coarse_cap_state.epsilon,
                                      domain.exterior_radius, domain.interior_radius)
    assert checks["curvature_ratio_M"].location["a"] == pytest.approx(0.5 * nu_lo)
    assert checks["curvature_ratio_M"].passed


def test_curvature_ratio_fails_below_the_boundary_bound(coarse_disk, cap_schedule):
    # A flatter cap has nu below the bound for sigma = 0.6 near the boundary
    _, state = _sampled_cap_state(coarse_disk, 0.45, 0.04)
    checks = {check.name: check for check in diagnose(state, cap_schedule)}
    assert checks["curvature_ratio_M"].passed is False
    assert checks["curvature_ratio_M"].location["violations"] > 0
    assert not checks["curvature_ratio_M"].failed


def test_curvature_ratio_skipped_without_a_positive_boundary_bound():
    annulus = build_domain(DomainShape(shape=ShapeKind.ANNULUS, r_in=0.5, r_out=1.0), 1.0 / 16.0)
    epsilon = 0.25
    assert boundary_normal_bounds(0.6, 0.6, epsilon, annulus.exterior_radius, annulus.interior_radius)[0] <= 0.0
    state = evaluate_state(annulus, constant_field(annulus, epsilon), epsilon)
    schedule = SolveSchedule(sigma=0.6, epsilon_ladder=[epsilon])
    checks = {check.name: check for check in diagnose(state, schedule)}
    for name in ("curvature_ratio_M", "curvature_alternative"):
        assert checks[name].passed is None
        assert "no positive lower bound" in checks[name].detail
