"""
Property suite service.

Randomized checks of the curvature calculus that need no PDE solve: the
structure conditions of the quotient functions, the eigen-relations of the
curvature matrices, the F-calculus identities, the consistency of the
operator derivatives with finite differences, and the cubic threshold.
Sampling is seeded, so the report is a deterministic function of
(samples, seed).
"""
import logging
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh

from dirichlet.barriers import gamma_analysis, gamma_cubic
from dirichlet.solver import operator_coefficients
from geometry.hypgeom import F_batch, convexity_matrix, gamma_matrix, scale_jet
from geometry.schemas import CurvatureFunctionSpec, PointJet
from geometry.symfunc import eval_f, f_and_grad
from schemas.report import PropertyCheck, ValidationReport

logger = logging.getLogger(__name__)

MAX_COUNTEREXAMPLES = 20
MAX_DIMENSION = 5
DERIVATIVE_JETS = 1000
FD_STEP = 1e-5
THRESHOLD_SAMPLES = (0.30, 0.34, 0.36, 0.40)

GammaFunction = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


def all_specs(max_n: int = MAX_DIMENSION) -> List[CurvatureFunctionSpec]:
    """Every quotient (n, k, l) with 2 <= n <= max_n."""
    return [
        CurvatureFunctionSpec(n=n, k=k, l=l)
        for n in range(2, max_n + 1) for k in range(1, n + 1) for l in range(0, k)
    ]


class PropertySuite:
    """
    Runs the property checks and collects the first counterexamples.

    Args:
        samples: Random samples per sampled check
        seed: Seed of the numpy generator
        gamma: Implementation of gamma_matrix under test
    """

    def __init__(self, samples: int, seed: int, gamma: GammaFunction = gamma_matrix):
        self.samples = int(samples)
        self.seed = int(seed)
        self.gamma = gamma
        self.rng = np.random.default_rng(self.seed)
        self.checks: List[PropertyCheck] = []
        self.counterexamples: List[Dict[str, object]] = []
        self.gradient_term_constant: Optional[float] = None

    # -- bookkeeping -------------------------------------------------------

    def _record(self, name: str, errors: np.ndarray, tolerance: float, payload: Callable[[int], Dict[str, object]],
                detail: str = "") -> None:
        errors = np.asarray(errors, dtype=float).reshape(-1)
        bad = np.flatnonzero(~(errors <= tolerance))
        for index in bad[: max(0, MAX_COUNTEREXAMPLES - len(self.counterexamples))]:
            self.counterexamples.append({"check": name, "error": float(errors[index]), **payload(int(index))})
        finite = errors[np.isfinite(errors)]
        check = PropertyCheck(
            name=name,
            samples=int(errors.size),
            failures=int(bad.size),
            max_error=float(np.max(finite)) if finite.size else float("inf"),
            tolerance=tolerance,
            detail=detail,
        )
        if bad.size:
            logger.warning(f"Property {name}: {bad.size} of {errors.size} samples fail (max error {check.max_error:.3e})")
        else:
            logger.info(f"Property {name}: {errors.size} samples pass (max error {check.max_error:.3e})")
        self.checks.append(check)

    def _cone_samples(self, n: int, count: int) -> np.ndarray:
        return np.exp(self.rng.uniform(math.log(0.05), math.log(20.0), size=(count, n)))

    # -- structure conditions of f -----------------------------------------

    def check_normalization(self) -> None:
        specs = all_specs()
        errors = np.array([abs(eval_f(spec, np.ones(spec.n)) - 1.0) for spec in specs])
        self._record("normalization", errors, 1e-12, lambda i: {"spec": specs[i].model_dump()})

    def check_structure(self, spec: CurvatureFunctionSpec) -> None:
        """Homogeneity, mean bound, gradient sum, Euler identity and concavity for one spec."""
        label = f"[{spec.n},{spec.k},{spec.l}]"
        lam = self._cone_samples(spec.n, self.samples)
        mu = self._cone_samples(spec.n, self.samples)
        t = self.rng.uniform(0.1, 10.0, size=self.samples)
        f, grad = f_and_grad(spec, lam)

        def payload(i: int) -> Dict[str, object]:
            return {"spec": spec.model_dump(), "lambda": lam[i].tolist()}

        homogeneous = np.abs(f_and_grad(spec, t[:, None] * lam)[0] - t * f) / (t * f)
        self._record(f"homogeneity{label}", homogeneous, 1e-10, payload)

        self._record(f"mean_bound{label}", f - np.mean(lam, axis=1), 1e-12, payload)
        self._record(f"gradient_sum{label}", 1.0 - np.sum(grad, axis=1), 1e-10, payload)
        euler = np.abs(np.sum(grad * lam, axis=1) - f) / f
        self._record(f"euler{label}", euler, 1e-10, payload)

        midpoint = f_and_grad(spec, 0.5 * (lam + mu))[0]
        concave = 0.5 * (f + f_and_grad(spec, mu)[0]) - midpoint
        self._record(f"concavity{label}", concave, 1e-10, payload)

    def check_gradient_fd(self, spec: CurvatureFunctionSpec) -> None:
        count = max(1, self.samples // 10)
        lam = self._cone_samples(spec.n, count)
        _, grad = f_and_grad(spec, lam)
        fd = np.empty_like(lam)
        for i in range(spec.n):
            step = np.zeros(spec.n)
            step[i] = FD_STEP
            fd[:, i] = (f_and_grad(spec, lam + step)[0] - f_and_grad(spec, lam - step)[0]) / (2.0 * FD_STEP)
        errors = np.max(np.abs(fd - grad), axis=1) / np.max(np.abs(grad), axis=1)
        self._record(f"gradient_fd[{spec.n},{spec.k},{spec.l}]", errors, 1e-6,
                     lambda i: {"spec": spec.model_dump(), "lambda": lam[i].tolist()})

    # -- curvature matrices ------------------------------------------------

    def _random_jets(self, count: int, kappa_floor: float = 0.05):
        """Admissible 2-dimensional jets with principal curvatures above kappa_floor."""
        u_all, p_all, hess_all = [], [], []
        while len(u_all) < count:
            batch = 2 * (count - len(u_all)) + 8
            u = self.rng.uniform(0.2, 2.0, size=batch)
            p = self.rng.normal(0.0, 0.7, size=(batch, 2))
            m = self.rng.normal(0.0, 1.0, size=(batch, 2, 2))
            hess = 0.5 * (m + np.swapaxes(m, 1, 2)) / u[:, None, None]
            kappa = np.linalg.eigvalsh(_vertical_matrix(u, p, hess, gamma_matrix))
            keep = np.flatnonzero(kappa[:, 0] > kappa_floor)
            u_all.extend(u[keep])
            p_all.extend(p[keep])
            hess_all.extend(hess[keep])
        return np.array(u_all[:count]), np.array(p_all[:count]), np.array(hess_all[:count])

    def check_gamma(self) -> None:
        p = self.rng.normal(0.0, 1.5, size=(self.samples, 2))
        up, down = self.gamma(p)
        metric = np.eye(2) + p[:, :, None] * p[:, None, :]
        scale = 1.0 + np.sum(p * p, axis=1)
        square = np.max(np.abs(down @ down - metric), axis=(1, 2)) / scale
        inverse = np.max(np.abs(up @ down - np.eye(2)), axis=(1, 2))
        payload = lambda i: {"Du": p[i].tolist()}  # noqa: E731
        self._record("gamma_square_root", square, 1e-12, payload)
        self._record("gamma_inverse", inverse, 1e-12, payload)

    def check_eigen_relation(self) -> None:
        """kappa_i = u kappa_i^E + 1/w with kappa^E from the generalized problem D2u x = k w g x."""
        u, p, hess = self._random_jets(self.samples, kappa_floor=1e-3)
        w = np.sqrt(1.0 + np.sum(p * p, axis=1))
        kappa = np.linalg.eigvalsh(_vertical_matrix(u, p, hess, self.gamma))
        errors = np.empty(u.size)
        for i in range(u.size):
            metric = np.eye(2) + np.outer(p[i], p[i])
            kappa_e = eigh(hess[i], metric, eigvals_only=True) / w[i]
            expected = np.sort(u[i] * kappa_e + 1.0 / w[i])
            errors[i] = np.max(np.abs(kappa[i] - expected)) / max(1.0, np.max(np.abs(expected)))
        self._record("eigen_relation", errors, 1e-10,
                     lambda i: {"u": float(u[i]), "Du": p[i].tolist(), "D2u": hess[i].tolist()})

    def check_admissibility(self) -> None:
        count = self.samples
        u = self.rng.uniform(0.2, 2.0, size=count)
        p = self.rng.normal(0.0, 0.7, size=(count, 2))
        m = self.rng.normal(0.0, 1.0, size=(count, 2, 2))
        hess = 0.5 * (m + np.swapaxes(m, 1, 2)) / u[:, None, None]
        kappa_min = np.linalg.eigvalsh(_vertical_matrix(u, p, hess, gamma_matrix))[:, 0]
        convex_min = np.linalg.eigvalsh(convexity_matrix(u, p, hess))[:, 0]
        clear = np.abs(kappa_min) > 1e-8
        mismatch = ((kappa_min > 0.0) != (convex_min > 0.0)) & clear
        self._record("admissibility_equivalence", mismatch.astype(float), 0.0,
                     lambda i: {"u": float(u[i]), "Du": p[i].tolist(), "D2u": hess[i].tolist()})

    def check_F_identities(self, spec: CurvatureFunctionSpec) -> None:
        count = max(1, self.samples // 10)
        lam = self._cone_samples(spec.n, count)
        q, _ = np.linalg.qr(self.rng.normal(size=(count, spec.n, spec.n)))
        A = (q * lam[:, None, :]) @ np.swapaxes(q, 1, 2)
        A = 0.5 * (A + np.swapaxes(A, 1, 2))
        value, Fij, eig = F_batch(spec, A)
        grad = f_and_grad(spec, eig)[1]
        first = np.abs(np.einsum("nij,nij->n", Fij, A) - np.sum(grad * eig, axis=1)) / value
        second = np.abs(np.einsum("nij,nij->n", Fij, A @ A) - np.sum(grad * eig ** 2, axis=1))
        second /= np.sum(grad * eig ** 2, axis=1)
        label = f"[{spec.n},{spec.k},{spec.l}]"
        payload = lambda i: {"spec": spec.model_dump(), "A": A[i].tolist()}  # noqa: E731
        self._record(f"F_trace_identity{label}", first, 1e-10, payload)
        self._record(f"F_square_identity{label}", second, 1e-10, payload)

        B = (q * self._cone_samples(spec.n, count)[:, None, :]) @ np.swapaxes(q, 1, 2)
        B = 0.5 * (B + np.swapaxes(B, 1, 2))
        B = B[:, ::-1, ::-1]
        concave = 0.5 * (value + F_batch(spec, B)[0]) - F_batch(spec, 0.5 * (A + B))[0]
        self._record(f"F_concavity{label}", concave, 1e-10, payload)

    # -- operator derivatives ----------------------------------------------

    def check_operator_derivatives(self, spec: CurvatureFunctionSpec) -> None:
        """G_st, G_s and G_u against central differences of G, plus the gradient-term constant."""
        count = min(self.samples, DERIVATIVE_JETS)
        u, p, hess = self._random_jets(count)
        G, G_st, G_s, G_u = operator_coefficients(u, p, hess, spec)

        def G_at(du=0.0, dp=None, dh=None):
            return operator_coefficients(
                u + du,
                p if dp is None else p + dp,
                hess if dh is None else hess + dh,
                spec,
            )[0]

        fd_u = (G_at(du=FD_STEP * u) - G_at(du=-FD_STEP * u)) / (2.0 * FD_STEP * u)
        fd_s = np.empty_like(G_s)
        for s in range(2):
            step = np.zeros(2)
            step[s] = FD_STEP
            fd_s[:, s] = (G_at(dp=step) - G_at(dp=-step)) / (2.0 * FD_STEP)
        fd_st = np.empty_like(G_st)
        for s, t in ((0, 0), (1, 1), (0, 1)):
            step = np.zeros((2, 2))
            step[s, t] = step[t, s] = FD_STEP
            factor = 1.0 if s == t else 2.0
            fd_st[:, s, t] = fd_st[:, t, s] = (G_at(dh=step) - G_at(dh=-step)) / (2.0 * FD_STEP * factor)

        def relative(fd: np.ndarray, exact: np.ndarray) -> np.ndarray:
            axes = tuple(range(1, exact.ndim))
            if not axes:
                return np.abs(fd - exact) / np.maximum(np.abs(exact), G / u)
            scale = np.maximum(np.max(np.abs(exact), axis=axes), G * np.sqrt(1.0 + np.sum(p * p, axis=1)))
            return np.max(np.abs(fd - exact), axis=axes) / scale

        label = f"[{spec.n},{spec.k},{spec.l}]"
        payload = lambda i: {"spec": spec.model_dump(), "u": float(u[i]), "Du": p[i].tolist(),  # noqa: E731
                             "D2u": hess[i].tolist()}
        self._record(f"G_st_fd{label}", relative(fd_st, G_st), 1e-6, payload)
        self._record(f"G_s_fd{label}", relative(fd_s, G_s), 1e-6, payload)
        self._record(f"G_u_fd{label}", relative(fd_u, G_u), 1e-6, payload)

        trace_F = -G_u * u * u * np.sqrt(1.0 + np.sum(p * p, axis=1))
        constant = float(np.max(u * np.sum(np.abs(G_s), axis=1) / (1.0 + trace_F)))
        self.gradient_term_constant = max(self.gradient_term_constant or 0.0, constant)

    def check_scaling(self, spec: CurvatureFunctionSpec) -> None:
        count = max(1, min(self.samples, DERIVATIVE_JETS) // 10)
        u, p, hess = self._random_jets(count)
        factors = self.rng.uniform(0.25, 4.0, size=count)
        G = operator_coefficients(u, p, hess, spec)[0]
        scaled = [scale_jet(PointJet(u=float(u[i]), Du=p[i], D2u=hess[i]), float(factors[i])) for i in range(count)]
        G_scaled = operator_coefficients(
            np.array([jet.u for jet in scaled]), np.array([jet.Du for jet in scaled]),
            np.array([jet.D2u for jet in scaled]), spec,
        )[0]
        errors = np.abs(G_scaled * factors - G) / G
        self._record(f"scaling[{spec.n},{spec.k},{spec.l}]", errors, 1e-10,
                     lambda i: {"u": float(u[i]), "factor": float(factors[i])})

    # -- threshold ---------------------------------------------------------

    def check_threshold(self) -> None:
        critical = gamma_analysis(math.sqrt(0.125))
        self._record("gamma_threshold_zero", np.array([abs(critical.gamma_closed)]), 1e-12,
                     lambda i: {"a": critical.a, "gamma": critical.gamma_closed})
        signs = []
        for a in THRESHOLD_SAMPLES:
            analysis = gamma_analysis(a)
            expected = math.copysign(1.0, a * a - 0.125)
            signs.append(0.0 if math.copysign(1.0, analysis.gamma_closed) == expected else 1.0)
        self._record("gamma_threshold_sign", np.array(signs), 0.0, lambda i: {"a": THRESHOLD_SAMPLES[i]})

        fractions = [Fraction(a).limit_denominator(100) for a in THRESHOLD_SAMPLES]
        endpoint = [
            0.0 if gamma_cubic(a, a) == a and gamma_cubic(Fraction(1), a) == a else 1.0 for a in fractions
        ]
        self._record("gamma_endpoints", np.array(endpoint), 0.0, lambda i: {"a": str(fractions[i])})

    # -- driver ------------------------------------------------------------

    def run(self) -> ValidationReport:
        """
        Runs every check.

        Returns:
            ValidationReport: Per-check results and the first counterexamples
        """
        logger.info(f"Property suite: {self.samples} samples, seed {self.seed}")
        self.check_normalization()
        for spec in all_specs():
            self.check_structure(spec)
            self.check_gradient_fd(spec)
            self.check_F_identities(spec)
        self.check_gamma()
        self.check_eigen_relation()
        self.check_admissibility()
        for spec in all_specs(2):
            self.check_operator_derivatives(spec)
            self.check_scaling(spec)
        self.check_threshold()
        return ValidationReport(
            seed=self.seed,
            samples=self.samples,
            checks=self.checks,
            counterexamples=self.counterexamples,
            gradient_term_constant=self.gradient_term_constant,
        )


def _vertical_matrix(u: np.ndarray, p: np.ndarray, hess: np.ndarray, gamma: GammaFunction) -> np.ndarray:
    """Av = (1/w)(I + u gamma D2u gamma) built from a given gamma implementation."""
    up, _ = gamma(p)
    w = np.sqrt(1.0 + np.sum(p * p, axis=1))
    Av = (np.eye(p.shape[1]) + u[:, None, None] * (up @ hess @ up)) / w[:, None, None]
    return 0.5 * (Av + np.swapaxes(Av, 1, 2))
