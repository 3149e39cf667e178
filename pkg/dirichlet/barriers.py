"""
Barrier surfaces and a priori estimates.

Equidistance spheres, the height and boundary-normal bounds, the gradient
maximum principle, the curvature ratio M(x), the cubic threshold behind the
interior curvature bound, and the diagnostics report built from them. All
diagnostics read a SurfaceState and never modify it.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from dirichlet.schemas import EquidistanceSphere, SurfaceState
from geometry.hypgeom import convexity_matrix
from schemas.report import CheckResult, EpsilonRecord, LadderTrend
from schemas.schedule import SolveSchedule
from utils.errors import GeometryError

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]

# |Du|^2 below which a near-boundary node is not moved onto the boundary
BOUNDARY_SLOPE_FLOOR = 1e-8


def equidistance_cap(r_boundary: float, sigma: float, epsilon: float = 0.0,
                     center=(0.0, 0.0)) -> EquidistanceSphere:
    """
    The equidistance sphere of curvature sigma meeting height epsilon over a circle.

    R_s solves sqrt(R_s^2 - r^2) - sigma R_s = epsilon, i.e.
    (1 - sigma^2) R_s^2 - 2 epsilon sigma R_s - (r^2 + epsilon^2) = 0.

    Args:
        r_boundary: Radius of the circle where the cap has height epsilon
        sigma: Curvature in (0, 1)
        epsilon: Height over the circle
        center: Horizontal center a'

    Returns:
        EquidistanceSphere: Sphere with exact height, gradient and Hessian

    Raises:
        GeometryError: If no admissible radius exists
    """
    if not 0.0 < sigma < 1.0:
        raise GeometryError(f"No equidistance cap for sigma={sigma}: sigma must lie in (0, 1)")
    if not r_boundary > 0.0 or epsilon < 0.0:
        raise GeometryError(f"No equidistance cap through radius {r_boundary} at height {epsilon}")

    one_minus = 1.0 - sigma * sigma
    R = (epsilon * sigma + math.sqrt(epsilon ** 2 * sigma ** 2 + one_minus * (r_boundary ** 2 + epsilon ** 2))) / one_minus
    if not (R > r_boundary and epsilon + sigma * R > 0.0):
        raise GeometryError(f"Equidistance cap radius R={R} does not reach height {epsilon} over r={r_boundary}")
    return EquidistanceSphere(center_horizontal=np.asarray(center, dtype=float), R=float(R), sigma=float(sigma))


def height_bounds(d, L: float, sigma1: float, sigma2: float, epsilon: float):
    """
    Lower and upper height bounds of a solution.

    lo = epsilon sigma2 / (1 + sigma2) + d sqrt((1 - sigma2) / (1 + sigma2))
    hi = (L / 2) sqrt((1 - sigma1) / (1 + sigma1)) + epsilon

    Args:
        d: Distance to the boundary (scalar or array, nonnegative)
        L: Diameter of the domain
        sigma1: Lower curvature bound
        sigma2: Upper curvature bound
        epsilon: Boundary height

    Returns:
        Tuple of (lo, hi)
    """
    d = np.asarray(d, dtype=float)
    lo = epsilon * sigma2 / (1.0 + sigma2) + d * math.sqrt((1.0 - sigma2) / (1.0 + sigma2))
    hi = 0.5 * L * math.sqrt((1.0 - sigma1) / (1.0 + sigma1)) + epsilon
    if lo.ndim == 0:
        lo = float(lo)
    return lo, hi


def boundary_normal_bounds(sigma1: float, sigma2: float, epsilon: float,
                           r1: Optional[float], r2: Optional[float]) -> Tuple[float, float]:
    """
    Interval for the vertical normal component on the boundary.

    A radius of None stands for an unbounded sphere; its terms vanish.

    Returns:
        Tuple of (lo, hi)
    """
    lo = sigma1
    if r1 is not None and math.isfinite(r1):
        lo -= epsilon * math.sqrt(1.0 - sigma1 ** 2) / r1 + epsilon ** 2 * (1.0 + sigma1) / r1 ** 2
    hi = sigma2
    if r2 is not None and math.isfinite(r2):
        hi += epsilon * math.sqrt(1.0 - sigma2 ** 2) / r2 + epsilon ** 2 * (1.0 - sigma2) / r2 ** 2
    return lo, hi


def gradient_max_principle_check(state: SurfaceState) -> float:
    """
    Margin of the maximum principle for e^u w.

    The near-boundary nodes stand in for the boundary side; the margin is
    their maximum of e^u w minus the maximum over interior nodes.
    """
    quantity = np.exp(state.u) * state.w
    domain = state.domain
    boundary_side = float(np.max(quantity[domain.near_boundary_mask]))
    interior = quantity[domain.interior_mask]
    return boundary_side - float(np.max(interior))


def boundary_nu(state: SurfaceState) -> np.ndarray:
    """
    nu at the near-boundary nodes, carried to the level set u = epsilon.

    One Newton step along Du moves a node by delta = -(u - eps) Du / |Du|^2,
    and grad nu = -D2u Du / w^3, so nu changes by
    (u - eps) Du.D2u.Du / (w^3 |Du|^2). The step is exact where nu is affine
    in u, as on an equidistance sphere. Nodes with a vanishing gradient keep
    their nodal value.

    Returns:
        np.ndarray: One value per near-boundary node, in node order
    """
    near = state.domain.near_boundary_mask
    Du = state.Du[near]
    slope2 = np.sum(Du * Du, axis=1)
    bending = np.einsum("ni,nij,nj->n", Du, state.D2u[near], Du)
    nu = state.nu_vertical[near]
    steep = slope2 > BOUNDARY_SLOPE_FLOOR
    shift = np.zeros_like(nu)
    shift[steep] = ((state.u[near][steep] - state.epsilon) * bending[steep]
                    / (state.w[near][steep] ** 3 * slope2[steep]))
    return np.clip(nu + shift, 0.0, 1.0)


@dataclass(frozen=True)
class CurvatureRatio:
    """Maximum of M(x) = kappa_max / (u^2 (nu - a)) and where it occurs."""
    value: float
    node: int
    point: Tuple[float, float]
    on_boundary: bool
    kappa_max: float
    violations: np.ndarray

    @property
    def hypothesis_holds(self) -> bool:
        return self.violations.size == 0


def curvature_ratio_M(state: SurfaceState, a: float) -> CurvatureRatio:
    """
    The curvature ratio M(x) over all nodes with nu > a.

    Args:
        state: Surface state
        a: Offset in (0, 1/2]; the estimate assumes nu >= 2a everywhere

    Returns:
        CurvatureRatio: The maximum, its location and the nodes where nu < 2a
    """
    nu = state.nu_vertical
    violations = np.flatnonzero(nu < 2.0 * a)
    if violations.size:
        logger.warning(f"Curvature ratio hypothesis nu >= 2a fails at {violations.size} nodes (a={a:.4g})")
    valid = nu > a
    ratio = np.full(nu.shape, -np.inf)
    ratio[valid] = state.kappa_max[valid] / (state.u[valid] ** 2 * (nu[valid] - a))
    node = int(np.argmax(ratio))
    point = state.domain.points[node]
    return CurvatureRatio(
        value=float(ratio[node]),
        node=node,
        point=(float(point[0]), float(point[1])),
        on_boundary=bool(state.domain.near_boundary_mask[node]),
        kappa_max=float(state.kappa_max[node]),
        violations=violations,
    )


def gamma_cubic(y: Number, a: Number) -> Number:
    """gamma(y) = 2y^3 - 2ay^2 - 2y + 3a; exact for Fraction arguments."""
    return 2 * y ** 3 - 2 * a * y ** 2 - 2 * y + 3 * a


@dataclass(frozen=True)
class GammaAnalysis:
    """Interior critical point of gamma and its value computed two ways."""
    a: float
    y_star: float
    gamma_cubic: float
    gamma_closed: float

    @property
    def gamma_at_y_star(self) -> float:
        return self.gamma_closed

    @property
    def positive(self) -> bool:
        return self.gamma_closed > 0.0

    @property
    def discrepancy(self) -> float:
        return abs(self.gamma_cubic - self.gamma_closed)


def gamma_analysis(a: float) -> GammaAnalysis:
    """
    Critical point y* = (a + sqrt(a^2 + 3)) / 3 of gamma on (a, 1) and gamma(y*).

    The closed form is (7/3)a - (4/27)a^3 - (4/27)(a^2 + 3)^(3/2), which is
    positive exactly when a^2 > 1/8.
    """
    if not 0.0 < a < 1.0:
        raise GeometryError(f"gamma analysis requires 0 < a < 1, got {a}")
    root = math.sqrt(a * a + 3.0)
    y_star = (a + root) / 3.0
    closed = (7.0 / 3.0) * a - (4.0 / 27.0) * a ** 3 - (4.0 / 27.0) * root ** 3
    return GammaAnalysis(a=a, y_star=y_star, gamma_cubic=float(gamma_cubic(y_star, a)), gamma_closed=closed)


def kappa_bound_sigma(sigma: float) -> Optional[float]:
    """
    Interior curvature ceiling 16 sigma / eps0 with 2 eps0 = sigma^2 - 1/8.

    Returns:
        The bound, or None when sigma^2 <= 1/8 and the estimate does not apply
    """
    excess = sigma * sigma - 0.125
    if excess <= 0.0:
        return None
    return 32.0 * sigma / excess


def discretization_slack(h: float) -> float:
    """Slack applied to continuum estimates checked on a grid."""
    return max(2.0 * h, 1e-6)


def _location(state: SurfaceState, node: int) -> Dict[str, object]:
    point = state.domain.points[node]
    return {
        "node": int(node),
        "x": float(point[0]),
        "y": float(point[1]),
        "near_boundary": bool(state.domain.near_boundary_mask[node]),
    }


def _hessian_norm(state: SurfaceState) -> np.ndarray:
    return np.linalg.norm(state.D2u, ord=2, axis=(1, 2))


def diagnose(state: SurfaceState, schedule: SolveSchedule) -> List[CheckResult]:
    """
    Evaluates every a priori estimate on a converged state.

    Args:
        state: Converged surface state
        schedule: Schedule the state was solved with

    Returns:
        List[CheckResult]: One result per check, each with its tolerance
    """
    domain = state.domain
    sigma = schedule.sigma
    eps = state.epsilon
    h = domain.h
    slack = discretization_slack(h)
    u = state.u
    near = domain.near_boundary_mask
    checks: List[CheckResult] = []

    # Height bounds
    lo, hi = height_bounds(np.abs(domain.distance), domain.diameter, sigma, sigma, eps)
    gap = np.minimum(u - lo, hi - u)
    worst = int(np.argmin(gap))
    checks.append(CheckResult(
        name="height_bounds", passed=bool(gap[worst] >= -slack), margin=float(gap[worst]),
        tolerance=slack, location=_location(state, worst),
        detail=f"lo <= u <= hi with hi={hi:.6g}",
    ))

    checks.append(CheckResult(
        name="horosphere_floor", passed=bool(np.min(u - eps) >= -slack), margin=float(np.min(u - eps)),
        tolerance=slack, location=_location(state, int(np.argmin(u))), detail="u >= epsilon",
    ))

    # Gradient maximum principle
    margin = gradient_max_principle_check(state)
    worst = int(np.argmax(np.where(domain.interior_mask, np.exp(u) * state.w, -np.inf)))
    checks.append(CheckResult(
        name="gradient_max_principle", passed=bool(margin >= -5.0 * h), margin=margin,
        tolerance=5.0 * h, location=_location(state, worst),
        detail="max over interior of e^u w against its near-boundary maximum",
    ))

    # Boundary gradient and normal
    w_near = state.w[near]
    excess = float(np.max(w_near) - 1.0 / sigma)
    checks.append(CheckResult(
        name="boundary_w", hard=False, value=float(np.max(w_near)), margin=-excess, tolerance=0.0,
        location=_location(state, int(np.flatnonzero(near)[np.argmax(w_near)])),
        detail="near-boundary w against 1/sigma; trend reported across the ladder",
    ))

    nu_lo, nu_hi = boundary_normal_bounds(sigma, sigma, eps, domain.exterior_radius, domain.interior_radius)
    nu_near = boundary_nu(state)
    widen = 3.0 * h
    nu_gap = np.minimum(nu_near - nu_lo, nu_hi - nu_near)
    worst_local = int(np.argmin(nu_gap))
    checks.append(CheckResult(
        name="boundary_nu", passed=bool(nu_gap[worst_local] >= -widen), margin=float(nu_gap[worst_local]),
        tolerance=widen, location=_location(state, int(np.flatnonzero(near)[worst_local])),
        detail=f"nu carried to u = epsilon within [{nu_lo:.6g}, {nu_hi:.6g}]",
    ))

    checks.append(CheckResult(
        name="gradient_ceiling", hard=False, value=float(np.max(state.w)),
        margin=float(1.0 / sigma - np.max(state.w)), tolerance=slack, detail="w <= 1/sigma in the limit",
    ))

    boundary_term = float(np.max(u[near] * np.linalg.norm(state.Du[near], axis=1)))
    gradient_cap = (domain.diameter + boundary_term) / u
    grad_norm = np.linalg.norm(state.Du, axis=1)
    cap_gap = gradient_cap - grad_norm
    worst = int(np.argmin(cap_gap))
    checks.append(CheckResult(
        name="convexity_gradient", hard=False, margin=float(cap_gap[worst]), tolerance=slack,
        location=_location(state, worst), detail="|Du| <= (L + max u|Du| near the boundary) / u",
    ))

    # Curvature ratio and its alternative branch
    # Offset a from the boundary bound on nu
    a = 0.5 * nu_lo
    if a > 0.0:
        ratio = curvature_ratio_M(state, a)
        checks.append(CheckResult(
            name="curvature_ratio_M", hard=False, value=ratio.value, tolerance=0.0,
            location={**_location(state, ratio.node), "a": a,
                      "violations": int(ratio.violations.size)},
            passed=ratio.hypothesis_holds,
            detail="boundary maximum" if ratio.on_boundary else "interior maximum",
        ))
        alternative = 16.0 * (a + 1.0 / a)
        checks.append(CheckResult(
            name="curvature_alternative", hard=False, value=ratio.kappa_max,
            margin=alternative - ratio.kappa_max, tolerance=0.0,
            passed=None if ratio.on_boundary else bool(ratio.kappa_max <= alternative),
            detail=f"kappa_max <= 16(a + 1/a) = {alternative:.6g} at an interior maximum of M",
        ))
    else:
        for name in ("curvature_ratio_M", "curvature_alternative"):
            checks.append(CheckResult(
                name=name, hard=False, passed=None, tolerance=0.0,
                detail=f"no positive lower bound for nu on the boundary (bound {nu_lo:.6g})",
            ))

    bound = kappa_bound_sigma(sigma)
    kappa_top = float(np.max(state.kappa_max))
    checks.append(CheckResult(
        name="kappa_bound", passed=None if bound is None else bool(kappa_top <= bound), value=kappa_top,
        margin=None if bound is None else bound - kappa_top, tolerance=0.0,
        location=_location(state, int(np.argmax(state.kappa_max))),
        detail="not applicable for sigma^2 <= 1/8" if bound is None else f"bound {bound:.6g}",
    ))

    hessian = u * _hessian_norm(state)
    checks.append(CheckResult(
        name="boundary_hessian", hard=False, value=float(np.max(hessian[near])), tolerance=0.0,
        detail="max u |D2u| over near-boundary nodes",
    ))
    checks.append(CheckResult(
        name="interior_hessian", hard=False, value=float(np.max(hessian) * eps * eps), tolerance=0.0,
        detail="max u |D2u| eps^2",
    ))

    convexity = np.linalg.eigvalsh(convexity_matrix(u, state.Du, state.D2u))[:, 0]
    checks.append(CheckResult(
        name="admissibility", passed=bool(np.min(convexity) > 0.0 and state.all_admissible),
        value=float(np.min(convexity)), margin=float(np.min(convexity)), tolerance=0.0,
        location=_location(state, int(np.argmin(convexity))),
        detail="min eigenvalue of delta_ij + u_i u_j + u u_ij",
    ))

    residual_tol = 2.0 * schedule.newton_tol
    residual = state.residual_norm
    checks.append(CheckResult(
        name="residual", passed=None if residual is None else bool(residual <= residual_tol),
        value=residual, margin=None if residual is None else residual_tol - residual,
        tolerance=residual_tol, detail="max |u G - sigma|",
    ))

    increments = [step["min_increment"] for step in state.history if step.get("min_increment") is not None]
    if increments:
        lowest = float(min(increments))
        checks.append(CheckResult(
            name="monotone_iteration", passed=bool(lowest >= -1e-9), value=lowest, margin=lowest + 1e-9,
            tolerance=1e-9, detail="min over outer steps of min(u_{k+1} - u_k)",
        ))

    for check in checks:
        if check.failed:
            logger.warning(f"Check {check.name} failed at epsilon={eps:.5g}: margin {check.margin}")
    return checks


def epsilon_record(state: SurfaceState, schedule: SolveSchedule) -> EpsilonRecord:
    """Summary numbers and checks of one converged state."""
    near = state.domain.near_boundary_mask
    nu_boundary = boundary_nu(state)
    checks = diagnose(state, schedule)
    ratio = next((c for c in checks if c.name == "curvature_ratio_M"), None)
    increments = [step["min_increment"] for step in state.history if step.get("min_increment") is not None]
    return EpsilonRecord(
        epsilon=state.epsilon,
        outer_iterations=sum(1 for step in state.history if step.get("kind") != "polish"),
        newton_iterations=int(sum(step.get("newton_iterations", 0) for step in state.history)),
        residual=float(state.residual_norm if state.residual is not None else float("nan")),
        max_w=float(np.max(state.w)),
        max_kappa=float(np.max(state.kappa_max)),
        min_kappa=float(np.min(state.kappa_min)),
        nu_boundary_min=float(np.min(nu_boundary)),
        nu_boundary_max=float(np.max(nu_boundary)),
        w_boundary_max=float(np.max(state.w[near])),
        curvature_ratio_max=None if ratio is None else ratio.value,
        min_outer_increment=float(min(increments)) if increments else None,
        checks=checks,
    )


def _loglog_slope(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    usable = (x > 0.0) & (y > 0.0)
    if np.count_nonzero(usable) < 2:
        return None
    slope, _ = np.polyfit(np.log(x[usable]), np.log(y[usable]), 1)
    return float(slope)


def ladder_trend(records: Sequence[EpsilonRecord], sigma: float) -> LadderTrend:
    """
    Trends across the epsilon ladder.

    Reports the variation of max kappa between the two smallest epsilons, the
    log-log slope of the near-boundary excess |w - 1/sigma| against epsilon,
    and a least-squares constant C in 1/sigma - 1/w <= C eps (eps + sqrt(1 - sigma^2)).
    """
    epsilons = [record.epsilon for record in records]
    max_kappa = [record.max_kappa for record in records]
    w_excess = [abs(record.w_boundary_max - 1.0 / sigma) for record in records]
    bound = kappa_bound_sigma(sigma)
    trend = LadderTrend(epsilons=epsilons, max_kappa=max_kappa, boundary_w_excess=w_excess, kappa_bound=bound)

    trend.boundary_hessian = [
        next((c.value for c in record.checks if c.name == "boundary_hessian"), float("nan")) for record in records
    ]
    if len(records) >= 2:
        last, previous = max_kappa[-1], max_kappa[-2]
        trend.kappa_variation = abs(last - previous) / max(abs(previous), 1e-300)
        if bound is not None:
            trend.kappa_bounded = bool(trend.kappa_variation < 0.2 and max(max_kappa) <= bound)
        trend.boundary_w_slope = _loglog_slope(epsilons, w_excess)
        trend.boundary_w_monotone = bool(all(b <= a for a, b in zip(w_excess, w_excess[1:])))

        fit_x = np.array([eps * (eps + math.sqrt(1.0 - sigma * sigma)) for eps in epsilons])
        fit_y = np.array([1.0 / sigma - 1.0 / record.w_boundary_max for record in records])
        trend.boundary_normal_constant = float(np.dot(fit_x, fit_y) / np.dot(fit_x, fit_x))

    return trend
