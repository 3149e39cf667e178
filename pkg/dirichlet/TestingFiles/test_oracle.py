"""
Tests for the radial shooting oracle.
"""
import numpy as np
import pytest

from dirichlet.barriers import equidistance_cap
from dirichlet.oracle import (
    BRACKET_SAMPLES,
    _annulus_bracket,
    curvature_residual,
    radial_curvatures,
    shoot,
    solve_radial_curvature,
)
from dirichlet.schemas import DomainShape, ShapeKind
from geometry.hypgeom import F_batch, curvature_matrices
from geometry.schemas import CurvatureFunctionSpec
from geometry.symfunc import eval_f
from utils.errors import ConfigurationError, ShootingError

DISK = DomainShape(shape=ShapeKind.DISK, radius=0.78)


def test_radial_curvatures_on_the_axis_are_equal():
    kappa_rad, kappa_tan = radial_curvatures(0.4, 0.0, -1.5, 0.0)
    assert kappa_rad == pytest.approx(kappa_tan)
    assert kappa_rad == pytest.approx(0.4 * -1.5 + 1.0)


def test_radial_curvatures_of_the_cap():
    sigma, epsilon = 0.6, 0.02
    cap = equidistance_cap(0.78, sigma, epsilon)
    for r in (0.1, 0.4, 0.7):
        x = np.array([[r, 0.0]])
        u = float(cap.height(x)[0])
        up = float(cap.gradient(x)[0, 0])
        upp = float(cap.hessian(x)[0, 0, 0])
        assert radial_curvatures(u, up, upp, r) == pytest.approx((sigma, sigma), abs=1e-12)


@pytest.mark.parametrize("k,l", [(1, 0), (2, 0), (2, 1)])
def test_solve_radial_curvature_closed_forms(k, l):
    spec = CurvatureFunctionSpec(n=2, k=k, l=l)
    kappa_rad = solve_radial_curvature(spec, 0.5, 0.8)
    assert eval_f(spec, [kappa_rad, 0.8]) == pytest.approx(0.5, abs=1e-13)


def test_solve_radial_curvature_in_higher_dimension():
    spec = CurvatureFunctionSpec(n=3, k=2, l=0)
    kappa_rad = solve_radial_curvature(spec, 0.6, 0.9)
    assert eval_f(spec, [kappa_rad, 0.9, 0.9]) == pytest.approx(0.6, abs=1e-12)


def test_solve_radial_curvature_outside_cone():
    spec = CurvatureFunctionSpec(n=2, k=2, l=1)
    with pytest.raises(ValueError):
        solve_radial_curvature(spec, 0.5, -0.1)
    with pytest.raises(ValueError):
        solve_radial_curvature(spec, 0.5, 0.2)


@pytest.mark.parametrize("k,l", [(1, 0), (2, 0), (2, 1)])
def test_disk_oracle_recovers_the_cap(k, l):
    sigma, epsilon = 0.6, 0.02
    spec = CurvatureFunctionSpec(n=2, k=k, l=l)
    profile = shoot(DISK, spec, sigma, epsilon)
    cap = equidistance_cap(0.78, sigma, epsilon)
    assert profile.parameter == pytest.approx(float(cap.height(np.zeros((1, 2)))[0]), abs=1e-7)
    assert profile.r.size == 4097
    assert profile.u[-1] == pytest.approx(epsilon, abs=1e-8)
    points = np.column_stack([profile.r, np.zeros_like(profile.r)])
    np.testing.assert_allclose(profile.u, cap.height(points), atol=1e-7)
    assert np.max(np.abs(curvature_residual(profile, spec))) <= 1e-6
    r_max, u_max = profile.maximum
    assert r_max == pytest.approx(0.0)
    assert u_max == pytest.approx(profile.parameter)


def test_profile_sampling_interpolates(mean_spec):
    profile = shoot(DISK, mean_spec, 0.6, 0.04)
    cap = equidistance_cap(0.78, 0.6, 0.04)
    radii = np.array([0.0, 0.123, 0.5, 0.78, 0.9])
    expected = cap.height(np.column_stack([np.minimum(radii, 0.78), np.zeros(5)]))
    np.testing.assert_allclose(profile.sample(radii), expected, atol=1e-7)


def test_oracle_rejects_non_symmetric_domains(mean_spec):
    ellipse = DomainShape(shape=ShapeKind.ELLIPSE, a=1.0, b=0.5)
    with pytest.raises(ConfigurationError) as excinfo:
        shoot(ellipse, mean_spec, 0.6, 0.02)
    assert excinfo.value.exit_code == 2


@pytest.mark.slow
def test_annulus_oracle_profile():
    spec = CurvatureFunctionSpec(n=2, k=2, l=1)
    annulus = DomainShape(shape=ShapeKind.ANNULUS, r_in=0.5, r_out=1.0)
    profile = shoot(annulus, spec, 0.5, 0.04)
    assert profile.r[0] == pytest.approx(0.5)
    assert profile.r[-1] == pytest.approx(1.0)
    assert profile.u[0] == pytest.approx(0.04)
    assert profile.u[-1] == pytest.approx(0.04, abs=1e-7)
    assert profile.parameter > 0.0
    assert np.all(profile.u > 0.0)
    assert 0.5 < profile.maximum[0] < 1.0
    assert np.max(np.abs(curvature_residual(profile, spec))) <= 1e-6


def _narrow_window_residual(slope):
    """Late breakdown below 1.8, a reaching window up to 1.801, early breakdown beyond it."""
    if slope < 1.8:
        return -1.0 - (1.8 - slope) / 10.0
    if slope <= 1.801:
        return slope - 1.8002
    return -1.99


def test_annulus_bracket_finds_a_narrow_window():
    lower, upper = _annulus_bracket(_narrow_window_residual, 0.5)
    assert _narrow_window_residual(lower) <= 0.0 < _narrow_window_residual(upper)
    assert 1.8 - 0.01 < lower <= 1.8002 < upper <= 1.801


def test_annulus_bracket_reports_the_refined_curve():
    with pytest.raises(ShootingError) as excinfo:
        _annulus_bracket(lambda slope: -1.0 - 1.0 / (1.0 + slope), 0.5)
    curve = excinfo.value.residual_curve
    assert len(curve) > BRACKET_SAMPLES
    assert [slope for slope, _ in curve] == sorted(slope for slope, _ in curve)


@pytest.mark.parametrize("k,l", [(1, 0), (2, 0), (2, 1)])
def test_radial_curvatures_embed_into_the_graph_operator(k, l):
    """On the x-axis a radial profile is the graph with Du = (u', 0) and D2u = diag(u'', u'/r)."""
    spec = CurvatureFunctionSpec(n=2, k=k, l=l)
    profile = shoot(DISK, spec, 0.6, 0.02)
    index = np.arange(64, profile.r.size, 256)
    r, u, up, upp = profile.r[index], profile.u[index], profile.up[index], profile.upp[index]
    Du = np.column_stack([up, np.zeros_like(up)])
    D2u = np.zeros((index.size, 2, 2))
    D2u[:, 0, 0] = upp
    D2u[:, 1, 1] = up / r
    Av, _, _, _ = curvature_matrices(u, Du, D2u)
    F, _, lam = F_batch(spec, Av)
    expected = np.sort([radial_curvatures(*args) for args in zip(u, up, upp, r)], axis=1)
    np.testing.assert_allclose(lam, expected, atol=1e-9)
    np.testing.assert_allclose(F, 0.6, atol=1e-6)


@pytest.mark.parametrize("k,l", [(1, 0), (2, 1)])
def test_disk_oracle_decreases_with_epsilon(k, l):
    spec = CurvatureFunctionSpec(n=2, k=k, l=l)
    coarse, fine = shoot(DISK, spec, 0.6, 0.04), shoot(DISK, spec, 0.6, 0.02)
    np.testing.assert_allclose(coarse.r, fine.r)
    assert np.all(fine.u <= coarse.u + 1e-6)


@pytest.mark.slow
def test_annulus_oracle_along_the_ladder():
    """The shooting bracket is found at every epsilon and the profiles decrease with epsilon."""
    spec = CurvatureFunctionSpec(n=2, k=2, l=1)
    annulus = DomainShape(shape=ShapeKind.ANNULUS, r_in=0.5, r_out=1.0)
    profiles = [shoot(annulus, spec, 0.5, epsilon) for epsilon in (0.04, 0.02, 0.01)]
    for profile, epsilon in zip(profiles, (0.04, 0.02, 0.01)):
        assert profile.u[0] == pytest.approx(epsilon)
        assert profile.u[-1] == pytest.approx(epsilon, abs=1e-7)
        assert np.max(np.abs(curvature_residual(profile, spec))) <= 1e-6
    for larger, smaller in zip(profiles, profiles[1:]):
        np.testing.assert_allclose(larger.r, smaller.r)
        assert np.all(smaller.u <= larger.u + 1e-6)
