"""
Shared pytest fixtures.
"""
import numpy as np
import pytest

from dirichlet.grid import build_domain
from dirichlet.schemas import DomainShape, ShapeKind
from dirichlet.solver import solve_fixed_epsilon
from geometry.schemas import CurvatureFunctionSpec
from schemas.schedule import SolveSchedule

COARSE_H = 1.0 / 16.0
CAP_RADIUS = 0.78
CAP_SIGMA = 0.6
CAP_EPSILON = 0.04


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def mean_spec() -> CurvatureFunctionSpec:
    return CurvatureFunctionSpec(n=2, k=1, l=0)


@pytest.fixture
def gauss_spec() -> CurvatureFunctionSpec:
    return CurvatureFunctionSpec(n=2, k=2, l=0)


@pytest.fixture
def quotient_spec() -> CurvatureFunctionSpec:
    return CurvatureFunctionSpec(n=2, k=2, l=1)


@pytest.fixture(scope="session")
def disk_shape() -> DomainShape:
    return DomainShape(shape=ShapeKind.DISK, radius=CAP_RADIUS)


@pytest.fixture(scope="session")
def coarse_disk(disk_shape):
    return build_domain(disk_shape, COARSE_H)


@pytest.fixture(scope="session")
def cap_schedule() -> SolveSchedule:
    return SolveSchedule(sigma=CAP_SIGMA, epsilon_ladder=[CAP_EPSILON])


@pytest.fixture(scope="session")
def coarse_cap_state(coarse_disk, cap_schedule):
    """Converged mean-curvature solve on the coarse disk."""
    return solve_fixed_epsilon(coarse_disk, cap_schedule, CAP_EPSILON)
