"""
Fixed-epsilon solver and epsilon continuation.

For a fixed boundary height epsilon the equation u G(D2u, Du, u) = sigma is
solved by a monotone outer iteration u_{k+1} = T(u_k), where u_{k+1} solves

    u G[u] = sigma + M (u - u_k),

and every outer step is a continuity solve in t in [0, 1] whose t-steps are
damped Newton solves on the sparse linearized operator

    L v = G^{st} v_st + G^s v_s + (G_u - psi_u) v.

After a few monotone steps a terminal polish carries the iterate to the fixed
point of T, and the ladder of decreasing epsilons is traversed with warm starts.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from dirichlet.barriers import epsilon_record, height_bounds, ladder_trend
from dirichlet.grid import GridDomain, constant_field, evaluate_state, field_jets
from dirichlet.schemas import LinearizedSystem, ScalarField, SurfaceState
from geometry.hypgeom import F_batch, curvature_matrices
from geometry.schemas import CurvatureFunctionSpec, PointJet
from geometry.symfunc import cone_face_value
from schemas.report import EpsilonRecord, LadderTrend
from schemas.schedule import SolveSchedule
from utils.errors import AdmissibilityError, BaseSolverError, ConfigurationError, ConvergenceError

logger = logging.getLogger(__name__)

# Armijo constant of the backtracking line search
SUFFICIENT_DECREASE = 1e-4
# Newton stagnates when five iterations reduce the residual by less than 1%
STAGNATION_WINDOW = 5
STAGNATION_RATIO = 0.99
# Slack for the polished field against the last monotone iterate
MONOTONE_SLACK = 1e-9
# A start with tangential boundary curvature c is used for sigma when f(0, c, ..., c) <= STAGE_MARGIN * sigma
STAGE_MARGIN = 0.85


# ---------------------------------------------------------------------------
# Pointwise operator
# ---------------------------------------------------------------------------

def operator_coefficients(u, Du, D2u, spec: CurvatureFunctionSpec):
    """
    Batched G = F(Av)/u and its partial derivatives.

    Returns:
        Tuple of (G, G_st, G_s, G_u) with shapes (N,), (N, n, n), (N, n), (N,)

    Raises:
        AdmissibilityError: If some node has u <= 0 or Av outside the positive cone
    """
    u = np.asarray(u, dtype=float)
    Du = np.asarray(Du, dtype=float)
    D2u = np.asarray(D2u, dtype=float)
    Av, _, gamma, w = curvature_matrices(u, Du, D2u)
    kappa_min = np.linalg.eigvalsh(Av)[:, 0]
    bad = np.flatnonzero((kappa_min <= 0.0) | (u <= 0.0))
    if bad.size:
        raise AdmissibilityError(f"Inadmissible at {bad.size} nodes", nodes=bad[:20].tolist())

    F, Fij, _ = F_batch(spec, Av)
    G = F / u
    G_st = gamma @ Fij @ gamma / w[:, None, None]
    trace_F = np.trace(Fij, axis1=1, axis2=2)
    G_u = -trace_F / (u * u * w)

    FA = Fij @ Av
    trace_FA = np.trace(FA, axis1=1, axis2=2)
    gamma_FAp = np.einsum("nij,njk,nk->ni", gamma, FA, Du)
    gamma_Fp = np.einsum("nij,njk,nk->ni", gamma, Fij, Du)
    G_s = (
        -Du * (trace_FA / (w * w * u))[:, None]
        - (2.0 / (w * u))[:, None] * gamma_FAp
        + (2.0 / (w * w * u))[:, None] * gamma_Fp
    )
    return G, G_st, G_s, G_u


def _single(jet: PointJet):
    return np.array([jet.u]), jet.Du[None, :], jet.D2u[None, :, :]


def G_eval(jet: PointJet, spec: CurvatureFunctionSpec) -> float:
    """
    The operator G(D2u, Du, u) = F(Av[u]) / u at one jet.

    Raises:
        AdmissibilityError: If the jet is not admissible
    """
    G, _, _, _ = operator_coefficients(*_single(jet), spec)
    return float(G[0])


def G_derivatives(jet: PointJet, spec: CurvatureFunctionSpec) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Partial derivatives of G with respect to u_st, u_s and u.

    G^{st} = (1/w) gamma^{is} F^{ij} gamma^{tj} and G_u = -(sum F^{ii}) / (u^2 w);
    G^s collects the dependence of w, gamma and Av on the gradient.

    Args:
        jet: Admissible jet
        spec: Curvature function selection

    Returns:
        Tuple of (G_st, G_s, G_u)

    Raises:
        AdmissibilityError: If the jet is not admissible
    """
    _, G_st, G_s, G_u = operator_coefficients(*_single(jet), spec)
    return G_st[0], G_s[0], float(G_u[0])


def assemble_linearized(state: SurfaceState, psi: np.ndarray, psi_u: np.ndarray,
                        spec: CurvatureFunctionSpec) -> LinearizedSystem:
    """
    Sparse linearization of r = G[u] - psi(x, u) about a state.

    The correction solves matrix @ delta = -residual with zero Dirichlet data.
    Nodes where the zero-order coefficient G_u - psi_u is not negative are
    reported as a warning; the system is assembled regardless.

    Args:
        state: Admissible surface state
        psi: Right-hand side psi = Psi / u at the nodes
        psi_u: Its derivative in u
        spec: Curvature function selection

    Returns:
        LinearizedSystem: Coefficients, residual and CSC matrix
    """
    u = state.u
    G, G_st, G_s, G_u = operator_coefficients(u, state.Du, state.D2u, spec)
    residual = G - psi
    zero_order = G_u - psi_u
    ops = state.domain.operators

    matrix = (
        sparse.diags(G_st[:, 0, 0]) @ ops["xx"]
        + sparse.diags(2.0 * G_st[:, 0, 1]) @ ops["xy"]
        + sparse.diags(G_st[:, 1, 1]) @ ops["yy"]
        + sparse.diags(G_s[:, 0]) @ ops["x"]
        + sparse.diags(G_s[:, 1]) @ ops["y"]
        + sparse.diags(zero_order)
    ).tocsc()

    violations = np.flatnonzero(zero_order >= 0.0)
    if violations.size:
        logger.warning(
            f"Zero-order coefficient G_u - psi_u >= 0 at {violations.size} nodes "
            f"(first: {violations[:10].tolist()})"
        )
    return LinearizedSystem(
        G_st=G_st,
        G_s=G_s,
        zero_order=zero_order,
        residual=residual,
        scaled_residual=u * residual,
        matrix=matrix,
        sign_violations=violations,
        min_ellipticity=float(np.min(np.linalg.eigvalsh(G_st)[:, 0])),
        zero_order_constant=float(np.min(-zero_order * u * u)),
    )


# ---------------------------------------------------------------------------
# Continuity method
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuationSource:
    """
    A family of right-hand sides Psi_t(x, u) = (1 - t)(a0 + m0 u) + t (a1 + m1 u).

    The equation at parameter t is u G[u] = Psi_t(x, u).
    """
    a0: Any
    m0: float
    a1: Any
    m1: float

    @classmethod
    def initial(cls, sigma: float, M: float, F0: np.ndarray, u0: np.ndarray) -> "ContinuationSource":
        """From F(A[u0]) (1 - t) + t sigma + M (u - u0), solved by u0 at t = 0."""
        base = -M * np.asarray(u0, dtype=float)
        return cls(a0=np.asarray(F0, dtype=float) + base, m0=M, a1=sigma + base, m1=M)

    @classmethod
    def monotone(cls, sigma: float, M: float, u_k: np.ndarray, u_prev: np.ndarray) -> "ContinuationSource":
        """sigma + M (u - (t u_k + (1 - t) u_prev))."""
        return cls(
            a0=sigma - M * np.asarray(u_prev, dtype=float), m0=M,
            a1=sigma - M * np.asarray(u_k, dtype=float), m1=M,
        )

    @classmethod
    def polish(cls, sigma: float, M: float, u_prev: np.ndarray) -> "ContinuationSource":
        """sigma + (1 - t) M (u - u_prev); the t = 1 problem is u G = sigma."""
        return cls(a0=sigma - M * np.asarray(u_prev, dtype=float), m0=M, a1=sigma, m1=0.0)

    @property
    def is_constant(self) -> bool:
        return self.m0 == self.m1 and bool(np.array_equal(np.asarray(self.a0), np.asarray(self.a1)))

    def evaluate(self, u: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """Psi_t(u) and its derivative in u."""
        slope = (1.0 - t) * self.m0 + t * self.m1
        offset = (1.0 - t) * np.asarray(self.a0) + t * np.asarray(self.a1)
        return offset + slope * u, np.full(np.shape(u), slope)


@dataclass
class ContinuationStats:
    """Counters accumulated across continuity solves."""
    newton_iterations: int = 0
    t_steps: int = 0
    bisections: int = 0


class _NewtonFailure(Exception):
    """A Newton solve at fixed t that did not reach the tolerance."""

    def __init__(self, reason: str, residual: float, history: Optional[List[float]] = None):
        super().__init__(reason)
        self.reason = reason
        self.residual = residual
        self.history = list(history or [])


def _linearize(domain: GridDomain, U: np.ndarray, epsilon: float, source: ContinuationSource, t: float,
               spec: CurvatureFunctionSpec) -> LinearizedSystem:
    state = evaluate_state(domain, ScalarField(U, epsilon), epsilon)
    Psi, Psi_u = source.evaluate(U, t)
    psi = Psi / U
    psi_u = Psi_u / U - Psi / (U * U)
    return assemble_linearized(state, psi, psi_u, spec)


def _trial_residual(domain: GridDomain, U: np.ndarray, epsilon: float, source: ContinuationSource, t: float,
                    spec: CurvatureFunctionSpec) -> Optional[np.ndarray]:
    """r = G - psi at a trial field, or None if the trial is not admissible."""
    if not np.all(U > 0.0):
        return None
    Du, D2u = field_jets(ScalarField(U, epsilon), domain)
    Av, _, _, _ = curvature_matrices(U, Du, D2u)
    if np.min(np.linalg.eigvalsh(Av)[:, 0]) <= 0.0:
        return None
    F, _, _ = F_batch(spec, Av)
    Psi, _ = source.evaluate(U, t)
    return (F - Psi) / U


def newton_solve(domain: GridDomain, U0: np.ndarray, epsilon: float, source: ContinuationSource, t: float,
                 schedule: SolveSchedule) -> Tuple[np.ndarray, int, float]:
    """
    Damped Newton solve of u G[u] = Psi_t(x, u) at a fixed t.

    Every accepted iterate is admissible at every node. The step is halved by
    the schedule's damping factor until the trial is admissible and the
    residual decreases sufficiently.

    Returns:
        Tuple of (solution values, iterations, final residual ||u G - Psi||_inf)

    Raises:
        _NewtonFailure: On the iteration cap, stagnation, a singular system or
        an exhausted line search
    """
    spec = schedule.spec
    U = U0
    history: List[float] = []
    for iteration in range(schedule.max_newton + 1):
        system = _linearize(domain, U, epsilon, source, t, spec)
        norm = system.residual_norm
        history.append(norm)
        logger.debug(f"Newton t={t:.6f} it={iteration} residual={norm:.3e}")
        if norm <= schedule.newton_tol:
            return U, iteration, norm
        if iteration == schedule.max_newton:
            raise _NewtonFailure("iteration cap", norm, history)
        if len(history) > STAGNATION_WINDOW and history[-1] > STAGNATION_RATIO * history[-1 - STAGNATION_WINDOW]:
            raise _NewtonFailure("stagnation", norm, history)

        try:
            delta = splu(system.matrix, permc_spec="COLAMD").solve(-system.residual)
        except RuntimeError as e:
            raise _NewtonFailure(f"singular linearization ({e})", norm, history)

        merit = float(np.linalg.norm(system.residual))
        step = 1.0
        while True:
            trial = U + step * delta
            r_trial = _trial_residual(domain, trial, epsilon, source, t, spec)
            if r_trial is not None:
                decreased = np.linalg.norm(r_trial) <= (1.0 - SUFFICIENT_DECREASE * step) * merit
                if decreased or np.max(np.abs(trial * r_trial)) <= schedule.newton_tol:
                    break
            step *= schedule.damping
            if step < schedule.min_step:
                logger.warning(f"Line search exhausted at t={t:.6f}: no admissible trial decreases the residual")
                raise _NewtonFailure("line search exhausted", norm, history)
        logger.debug(f"Newton t={t:.6f} it={iteration} accepted step {step:.3g}")
        U = trial
    raise _NewtonFailure("iteration cap", history[-1], history)


def continuity_solve(domain: GridDomain, u_start: ScalarField, source: ContinuationSource,
                     schedule: SolveSchedule, steps: Optional[int] = None,
                     stats: Optional[ContinuationStats] = None) -> ScalarField:
    """
    Carries the solution of the t = 0 problem to the t = 1 problem.

    Failed t-steps are bisected; after a successful step the increment grows
    back toward its nominal size.

    Args:
        domain: Discretized domain
        u_start: Admissible field solving the t = 0 problem
        source: Right-hand side family
        schedule: Newton tolerances and step policy
        steps: Number of nominal t-steps, defaults to schedule.continuity_steps
        stats: Optional counters updated in place

    Returns:
        ScalarField: Solution at t = 1

    Raises:
        ConvergenceError: When the t-increment falls below schedule.min_step
    """
    stats = stats if stats is not None else ContinuationStats()
    epsilon = u_start.boundary_value
    U = u_start.values

    if source.is_constant:
        try:
            U, iterations, _ = newton_solve(domain, U, epsilon, source, 1.0, schedule)
        except _NewtonFailure as failure:
            raise ConvergenceError(
                f"Newton failed on a fixed source: {failure.reason}",
                history=failure.history, last_t=1.0, last_residual=failure.residual,
            )
        stats.newton_iterations += iterations
        return u_start.with_values(U)

    nominal = 1.0 / (steps or schedule.continuity_steps)
    dt = nominal
    t = 0.0
    last_residual = float("nan")
    try:
        U, iterations, last_residual = newton_solve(domain, U, epsilon, source, 0.0, schedule)
        stats.newton_iterations += iterations
    except _NewtonFailure as failure:
        raise ConvergenceError(
            f"Start field does not solve the t=0 problem: {failure.reason}",
            history=failure.history, last_t=0.0, last_residual=failure.residual,
        )

    while t < 1.0:
        target = min(1.0, t + dt)
        if 1.0 - target < 1e-12:
            target = 1.0
        try:
            U_next, iterations, residual = newton_solve(domain, U, epsilon, source, target, schedule)
        except _NewtonFailure as failure:
            stats.bisections += 1
            dt *= 0.5
            logger.info(f"Continuity step to t={target:.6f} failed ({failure.reason}); bisecting to dt={dt:.3e}")
            if dt < schedule.min_step:
                raise ConvergenceError(
                    f"Continuity step below {schedule.min_step:.3e} at t={t:.6f}: {failure.reason}",
                    history=failure.history, last_t=t, last_residual=last_residual,
                )
            continue
        stats.newton_iterations += iterations
        stats.t_steps += 1
        U, t, last_residual = U_next, target, residual
        dt = min(2.0 * dt, nominal)
    return u_start.with_values(U)


# ---------------------------------------------------------------------------
# Outer iteration and epsilon ladder
# ---------------------------------------------------------------------------

def _adaptive_steps(schedule: SolveSchedule, M: float, u_k: np.ndarray, anchor: np.ndarray) -> int:
    span = M * float(np.max(np.abs(u_k - anchor), initial=0.0))
    steps = math.ceil(span / schedule.continuity_span())
    return int(min(max(steps, 1), schedule.continuity_steps))


def _require_barriers(domain: GridDomain, sigma: float, epsilon: float) -> None:
    """The lower height barrier must rise above the horosphere inside the domain."""
    depth = float(np.max(np.abs(domain.distance)))
    lo, hi = height_bounds(depth, domain.diameter, sigma, sigma, epsilon)
    if not (epsilon < lo <= hi):
        raise ConfigurationError(
            f"epsilon={epsilon} is too large for this domain: lower barrier {lo:.4g} at depth {depth:.4g}",
            messages=[f"solve.epsilon0: must be below {lo:.4g} for this domain and sigma"],
        )


def curvature_stages(spec: CurvatureFunctionSpec, sigma: float) -> List[float]:
    """
    Intermediate curvatures between the horosphere and sigma for a cold start.

    Every monotone iterate keeps the boundary height of its start and lies
    above it, so its tangential boundary curvature cannot exceed the start's
    curvature c. The boundary equation f(kappa) = sigma then leaves a positive
    radial curvature only while f(0, c, ..., c) = c f(0, 1, ..., 1) < sigma.
    The horosphere has c = 1 and a solution at curvature s has c close to s,
    so each stage lowers c by the factor f(0, 1, ..., 1) / STAGE_MARGIN.

    Returns:
        Decreasing curvatures above sigma, empty when the horosphere suffices
    """
    face = cone_face_value(spec)
    if face >= STAGE_MARGIN:
        return []
    stages: List[float] = []
    current = 1.0
    while face * current > STAGE_MARGIN * sigma:
        current = face * current / STAGE_MARGIN
        stages.append(current)
    return stages


def _usable_start(domain: GridDomain, spec: CurvatureFunctionSpec, sigma: float, candidate: ScalarField,
                  label: str) -> bool:
    """An admissible subsolution, F(A[u0]) >= sigma."""
    epsilon = candidate.boundary_value
    state = evaluate_state(domain, candidate, epsilon)
    if not state.all_admissible:
        logger.warning(f"{label} at epsilon={epsilon:.5g} is not admissible; starting cold")
        return False
    F, _, _ = F_batch(spec, state.Av)
    if np.min(F) < sigma:
        logger.warning(f"{label} at epsilon={epsilon:.5g} is not a subsolution; starting cold")
        return False
    return True


def _start_field(domain: GridDomain, schedule: SolveSchedule, epsilon: float,
                 previous: Optional[SurfaceState]) -> Optional[ScalarField]:
    """u0 = max(u_prev - (eps_prev - eps), eps) when it is an admissible subsolution, else None."""
    if previous is None or not schedule.warm_start:
        return None
    shifted = np.maximum(previous.u - (previous.epsilon - epsilon), epsilon)
    candidate = ScalarField(shifted, epsilon)
    if not _usable_start(domain, schedule.spec, schedule.sigma, candidate, "Warm start"):
        return None
    return candidate


def _cold_start(domain: GridDomain, schedule: SolveSchedule, epsilon: float) -> ScalarField:
    """The horosphere u0 = eps, carried through the curvature stages the target needs."""
    start = constant_field(domain, epsilon)
    for stage in curvature_stages(schedule.spec, schedule.sigma):
        logger.info(f"Cold start at epsilon={epsilon:.5g}: intermediate solve at sigma={stage:.4g}")
        state = _monotone_solve(domain, schedule.model_copy(update={"sigma": stage}), epsilon, start)
        if not _usable_start(domain, schedule.spec, schedule.sigma, state.field, f"Stage sigma={stage:.4g}"):
            break
        start = state.field
    return start


def _outer_record(kind: str, k: int, before: np.ndarray, after: np.ndarray, stats: ContinuationStats,
                  newton_before: int, steps: int) -> Dict[str, Any]:
    increment = after - before
    return {
        "kind": kind,
        "k": k,
        "cauchy": float(np.max(np.abs(increment), initial=0.0)),
        "min_increment": float(np.min(increment)),
        "t_steps": steps,
        "newton_iterations": stats.newton_iterations - newton_before,
    }


def solve_fixed_epsilon(domain: GridDomain, schedule: SolveSchedule, epsilon: float,
                        warm_start: Optional[SurfaceState] = None) -> SurfaceState:
    """
    Solves u G[u] = sigma in the domain with u = epsilon on the boundary.

    Args:
        domain: Discretized domain
        schedule: Solve schedule
        epsilon: Boundary height
        warm_start: Converged state at a larger epsilon, used when it yields a subsolution.
            Otherwise the horosphere starts the iteration, after the intermediate
            solves that curvature_stages asks for.

    Returns:
        SurfaceState: Converged state with residual u G - sigma and the outer history

    Raises:
        ConfigurationError: If epsilon is too large for barriers to exist
        ConvergenceError: If a continuity solve fails or the outer loop hits max_outer
    """
    _require_barriers(domain, schedule.sigma, epsilon)
    u0 = _start_field(domain, schedule, epsilon, warm_start)
    if u0 is None:
        u0 = _cold_start(domain, schedule, epsilon)
    return _monotone_solve(domain, schedule, epsilon, u0)


def _monotone_solve(domain: GridDomain, schedule: SolveSchedule, epsilon: float, u0: ScalarField) -> SurfaceState:
    """Monotone outer iteration from an admissible subsolution u0, then the polish."""
    sigma = schedule.sigma
    spec = schedule.spec
    M = schedule.relaxation_for(epsilon)
    logger.info(f"Solving epsilon={epsilon:.5g} (sigma={sigma:.4g}, M={M:.4g}, {domain.n_unknowns} unknowns)")

    F0, _, _ = F_batch(spec, evaluate_state(domain, u0, epsilon).Av)
    stats = ContinuationStats()
    history: List[Dict[str, Any]] = []

    u_k = continuity_solve(
        domain, u0, ContinuationSource.initial(sigma, M, F0, u0.values), schedule,
        steps=schedule.continuity_steps, stats=stats,
    )
    history.append(_outer_record("monotone", 0, u0.values, u_k.values, stats, 0, schedule.continuity_steps))
    anchor = u0.values
    polished = False
    k = 1

    while history[-1]["cauchy"] > schedule.monotone_tol:
        last = history[-1]
        logger.info(
            f"epsilon={epsilon:.5g} outer k={last['k']} ({last['kind']}): cauchy={last['cauchy']:.3e} "
            f"min increment={last['min_increment']:.3e}"
        )
        if k > schedule.max_outer:
            raise ConvergenceError(
                f"Outer iteration did not converge in {schedule.max_outer} steps at epsilon={epsilon}",
                history=[step["cauchy"] for step in history],
                last_residual=last["cauchy"],
            )
        newton_before = stats.newton_iterations
        steps = _adaptive_steps(schedule, M, u_k.values, anchor)

        if schedule.polish_after is not None and k >= schedule.polish_after and not polished:
            polish_steps = schedule.continuity_steps
            u_star = continuity_solve(
                domain, u_k, ContinuationSource.polish(sigma, M, anchor), schedule, steps=polish_steps, stats=stats
            )
            record = _outer_record("polish", k, u_k.values, u_star.values, stats, newton_before, polish_steps)
            if record["min_increment"] < -MONOTONE_SLACK:
                logger.warning(
                    f"Polished field falls below the monotone iterate by {-record['min_increment']:.3e}"
                )
            history.append(record)
            anchor = u_star.values
            u_k = u_star
            polished = True
            continue

        u_next = continuity_solve(
            domain, u_k, ContinuationSource.monotone(sigma, M, u_k.values, anchor), schedule,
            steps=steps, stats=stats,
        )
        history.append(_outer_record("monotone", k, u_k.values, u_next.values, stats, newton_before, steps))
        anchor = u_k.values
        u_k = u_next
        k += 1

    state = evaluate_state(domain, u_k, epsilon)
    G, _, _, _ = operator_coefficients(state.u, state.Du, state.D2u, spec)
    state.residual = state.u * G - sigma
    state.history = history
    logger.info(
        f"Converged epsilon={epsilon:.5g}: {k} outer steps, {stats.newton_iterations} Newton iterations, "
        f"{stats.bisections} bisections, residual {state.residual_norm:.3e}"
    )
    if state.residual_norm > 2.0 * schedule.newton_tol:
        logger.warning(
            f"Residual {state.residual_norm:.3e} exceeds 2*newton_tol at epsilon={epsilon:.5g}; "
            "the polish is disabled or monotone_tol is loose"
        )
    return state


@dataclass
class LadderResult:
    """Converged states of an epsilon ladder with their records and trend."""
    states: List[SurfaceState]
    records: List[EpsilonRecord]
    trend: LadderTrend
    failure: Optional[BaseSolverError] = None
    failed_epsilon: Optional[float] = None

    @property
    def completed(self) -> bool:
        return self.failure is None


def epsilon_continuation(domain: GridDomain, schedule: SolveSchedule) -> LadderResult:
    """
    Solves every epsilon of the ladder, warm-starting from the previous state.

    A failure at some epsilon ends the ladder; the completed prefix is kept.

    Args:
        domain: Discretized domain
        schedule: Solve schedule with its epsilon ladder

    Returns:
        LadderResult: States, per-epsilon records, trend and the failure if any
    """
    states: List[SurfaceState] = []
    records: List[EpsilonRecord] = []
    failure: Optional[BaseSolverError] = None
    failed_epsilon: Optional[float] = None
    previous: Optional[SurfaceState] = None

    for epsilon in schedule.epsilon_ladder:
        try:
            state = solve_fixed_epsilon(domain, schedule, epsilon, warm_start=previous)
        except ConfigurationError:
            raise
        except BaseSolverError as e:
            logger.error(f"Solve failed at epsilon={epsilon:.5g}: {e.detail}")
            failure, failed_epsilon = e, epsilon
            break
        records.append(epsilon_record(state, schedule))
        states.append(state)
        previous = state

    trend = ladder_trend(records, schedule.sigma)
    return LadderResult(states=states, records=records, trend=trend, failure=failure, failed_epsilon=failed_epsilon)
