"""
Radial shooting oracle.

For disks and annuli the problem reduces to an ODE in the radius:
f(kappa_rad, kappa_tan, ..., kappa_tan) = sigma with

    kappa_rad = u u'' / w^3 + 1/w,    kappa_tan = u u' / (r w) + 1/w.

The ODE is integrated with scipy and the free boundary parameter is found by
bisection. Nothing here is shared with the grid solver.
"""
import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import bisect, brentq

from dirichlet.barriers import height_bounds
from dirichlet.schemas import DomainShape, RadialProfile, ShapeKind
from geometry.schemas import CurvatureFunctionSpec
from geometry.symfunc import eval_f
from utils.errors import ConfigurationError, ShootingError

logger = logging.getLogger(__name__)

OUTPUT_POINTS = 4097
SHOOTING_ITERATIONS = 80
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
# Slope ceiling beyond which a profile is treated as vertical
SLOPE_CEILING = 1e8
# Slope scan for the annulus, then refinement around the largest residual
BRACKET_SAMPLES = 48
REFINE_SAMPLES = 17
REFINE_LEVELS = 12


class _ProfileBreakdown(Exception):
    """Raised inside the ODE right-hand side when the profile leaves the admissible set."""

    def __init__(self, r: float):
        super().__init__(f"profile breakdown at r={r}")
        self.r = r


def radial_curvatures(u: float, up: float, upp: float, r: float) -> Tuple[float, float]:
    """
    Hyperbolic principal curvatures of the rotation graph of u(r).

    Args:
        u: Height, positive
        up: First derivative u'
        upp: Second derivative u''
        r: Radius; at r = 0 both curvatures take the symmetric limit

    Returns:
        Tuple of (kappa_rad, kappa_tan)
    """
    w = math.sqrt(1.0 + up * up)
    kappa_rad = u * upp / w ** 3 + 1.0 / w
    if r == 0.0:
        return kappa_rad, u * upp + 1.0 / w
    return kappa_rad, u * up / (r * w) + 1.0 / w


def solve_radial_curvature(spec: CurvatureFunctionSpec, sigma: float, kappa_tan: float) -> float:
    """
    The radial curvature for which f(kappa_rad, kappa_tan, ..., kappa_tan) = sigma.

    Raises:
        ValueError: If no positive solution exists
    """
    if not kappa_tan > 0.0:
        raise ValueError(f"tangential curvature {kappa_tan} outside the positive cone")
    n, k, l = spec.n, spec.k, spec.l
    if n == 2 and (k, l) == (1, 0):
        value = 2.0 * sigma - kappa_tan
    elif n == 2 and (k, l) == (2, 0):
        value = sigma * sigma / kappa_tan
    elif n == 2 and (k, l) == (2, 1):
        if 2.0 * kappa_tan <= sigma:
            raise ValueError(f"no radial curvature solves the equation for kappa_tan={kappa_tan}")
        value = sigma * kappa_tan / (2.0 * kappa_tan - sigma)
    else:
        def mismatch(kappa_rad: float) -> float:
            return eval_f(spec, np.array([kappa_rad] + [kappa_tan] * (n - 1))) - sigma

        lower = 1e-300
        if mismatch(lower) >= 0.0:
            raise ValueError(f"no radial curvature solves the equation for kappa_tan={kappa_tan}")
        upper = max(sigma, kappa_tan)
        while mismatch(upper) < 0.0:
            upper *= 2.0
            if upper > 1e12:
                raise ValueError(f"no radial curvature solves the equation for kappa_tan={kappa_tan}")
        value = brentq(mismatch, lower, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    if not value > 0.0:
        raise ValueError(f"radial curvature {value} outside the positive cone")
    return value


def _second_derivative(spec: CurvatureFunctionSpec, sigma: float, r: float, u: float, up: float) -> float:
    if not u > 0.0 or abs(up) > SLOPE_CEILING:
        raise _ProfileBreakdown(r)
    w = math.sqrt(1.0 + up * up)
    if r == 0.0:
        # both curvatures equal u u'' + 1 on the axis, and f(k, ..., k) = k
        return (sigma - 1.0) / u
    kappa_tan = u * up / (r * w) + 1.0 / w
    try:
        kappa_rad = solve_radial_curvature(spec, sigma, kappa_tan)
    except ValueError:
        raise _ProfileBreakdown(r)
    return (kappa_rad - 1.0 / w) * w ** 3 / u


def _integrate(spec: CurvatureFunctionSpec, sigma: float, r_start: float, r_end: float,
               u0: float, up0: float, dense: bool = False):
    """Integrates the profile ODE; returns the solve_ivp result or the breakdown radius."""
    def rhs(r, y):
        return [y[1], _second_derivative(spec, sigma, r, y[0], y[1])]

    t_eval = np.linspace(r_start, r_end, OUTPUT_POINTS) if dense else None
    try:
        solution = solve_ivp(
            rhs, (r_start, r_end), [u0, up0], method="DOP853", rtol=ODE_RTOL, atol=ODE_ATOL, t_eval=t_eval
        )
    except _ProfileBreakdown as e:
        return None, e.r
    if not solution.success:
        return None, float(solution.t[-1])
    return solution, r_end


def _shoot(target: Callable[[float], float], bracket: Tuple[float, float], label: str) -> Tuple[float, List]:
    """Bisection on a shooting residual with a recorded residual curve."""
    lower, upper = bracket
    curve: List[Tuple[float, float]] = []
    f_lower, f_upper = target(lower), target(upper)
    curve.extend([(lower, f_lower), (upper, f_upper)])
    if f_lower * f_upper > 0.0:
        for value in np.linspace(lower, upper, 17)[1:-1]:
            curve.append((float(value), target(float(value))))
        curve.sort()
        raise ShootingError(
            f"Shooting bracket [{lower:.6g}, {upper:.6g}] for {label} has no sign change",
            residual_curve=curve,
        )
    root = bisect(target, lower, upper, xtol=1e-15, maxiter=SHOOTING_ITERATIONS, disp=False)
    return float(root), curve


def _first_sign_change(samples: List[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
    for (lower, f_lower), (upper, f_upper) in zip(samples, samples[1:]):
        if f_lower <= 0.0 < f_upper:
            return lower, upper
    return None


def _annulus_bracket(residual: Callable[[float], float], sigma: float) -> Tuple[float, float]:
    """
    Locates the first undershoot/overshoot pair of slopes.

    Shallow slopes break down late and steep slopes curl back into a non-graph
    and break down early, so the slopes that reach r_out can form a narrow
    window. A geometric scan is refined around its largest residual until a
    sample lands in that window.
    """
    steepest = 10.0 * math.sqrt(1.0 - sigma * sigma) / sigma
    samples = [(float(s), residual(float(s))) for s in np.geomspace(1e-3, steepest, BRACKET_SAMPLES)]
    curve = list(samples)
    for level in range(REFINE_LEVELS + 1):
        bracket = _first_sign_change(samples)
        if bracket is not None:
            return bracket
        best = int(np.argmax([value for _, value in samples]))
        left = samples[max(best - 1, 0)][0]
        right = samples[min(best + 1, len(samples) - 1)][0]
        if level == REFINE_LEVELS or right - left <= 1e-12 * max(1.0, right):
            break
        logger.debug(f"No sign change among {len(samples)} slopes; refining [{left:.9g}, {right:.9g}]")
        samples = [(float(s), residual(float(s))) for s in np.linspace(left, right, REFINE_SAMPLES)]
        curve.extend(samples)
    curve.sort()
    raise ShootingError(
        f"No shooting bracket for u'(r_in) in [1e-3, {steepest:.6g}]", residual_curve=curve
    )


def _profile(spec: CurvatureFunctionSpec, sigma: float, epsilon: float, shape: DomainShape,
             r_start: float, r_end: float, u0: float, up0: float, parameter: float) -> RadialProfile:
    solution, _ = _integrate(spec, sigma, r_start, r_end, u0, up0, dense=True)
    if solution is None:
        raise ShootingError(f"Converged shooting parameter {parameter:.12g} does not reach r={r_end}")
    r = solution.t
    u, up = solution.y
    upp = np.array([_second_derivative(spec, sigma, ri, ui, pi) for ri, ui, pi in zip(r, u, up)])
    return RadialProfile(r=r, u=u, up=up, upp=upp, sigma=sigma, epsilon=epsilon, shape=shape.shape,
                         parameter=parameter)


def shoot(shape: DomainShape, spec: CurvatureFunctionSpec, sigma: float, epsilon: float) -> RadialProfile:
    """
    Rotationally symmetric solution with boundary value epsilon.

    For a disk the free parameter is u(0); for an annulus it is the slope
    u'(r_in) with u(r_in) = epsilon. Early breakdown of a trial profile counts
    as undershooting.

    Args:
        shape: Disk or annulus
        spec: Curvature function
        sigma: Curvature in (0, 1)
        epsilon: Boundary height

    Returns:
        RadialProfile: Profile on 4097 equally spaced radii

    Raises:
        ConfigurationError: If the shape is not rotationally symmetric
        ShootingError: If the bracket has no sign change
    """
    if not shape.rotationally_symmetric:
        raise ConfigurationError(
            f"Radial oracle requires a disk or annulus, got {shape.shape.value}",
            messages=["domain.shape: oracle-compare requires disk or annulus"],
        )

    if shape.shape == ShapeKind.DISK:
        r_b = shape.radius

        def residual(u0: float) -> float:
            solution, r_stop = _integrate(spec, sigma, 0.0, r_b, u0, 0.0)
            if solution is None:
                return -1.0 - (r_b - r_stop) / r_b
            return float(solution.y[0, -1] - epsilon)

        lo, hi = height_bounds(r_b, 2.0 * r_b, sigma, sigma, epsilon)
        u0, _ = _shoot(residual, (0.9 * lo, 1.1 * hi), "u(0)")
        logger.info(f"Disk oracle: u(0)={u0:.12f} (sigma={sigma}, epsilon={epsilon})")
        return _profile(spec, sigma, epsilon, shape, 0.0, r_b, u0, 0.0, u0)

    r_in, r_out = shape.r_in, shape.r_out

    def residual(slope: float) -> float:
        solution, r_stop = _integrate(spec, sigma, r_in, r_out, epsilon, slope)
        if solution is None:
            return -1.0 - (r_out - r_stop) / (r_out - r_in)
        return float(solution.y[0, -1] - epsilon)

    slope, _ = _shoot(residual, _annulus_bracket(residual, sigma), "u'(r_in)")
    logger.info(f"Annulus oracle: u'(r_in)={slope:.12f} (sigma={sigma}, epsilon={epsilon})")
    return _profile(spec, sigma, epsilon, shape, r_in, r_out, epsilon, slope, slope)


def curvature_residual(profile: RadialProfile, spec: CurvatureFunctionSpec) -> np.ndarray:
    """f(kappa) - sigma along a profile."""
    residual = np.empty(profile.r.size)
    for index, (r, u, up, upp) in enumerate(zip(profile.r, profile.u, profile.up, profile.upp)):
        kappa_rad, kappa_tan = radial_curvatures(float(u), float(up), float(upp), float(r))
        lam = np.array([kappa_rad] + [kappa_tan] * (spec.n - 1))
        residual[index] = eval_f(spec, lam) - profile.sigma
    return residual
