"""
Uniform Cartesian discretization of level-set domains.

A domain is sampled on a square grid containing the origin. Nodes with a
negative level set are the unknowns; every derivative at an unknown node is a
one-dimensional finite-difference formula along one of the four grid lines
through it (x, y and the two diagonals). Where a grid line leaves the domain
the Dirichlet value is imposed at the exact intercept with the level set.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.optimize import brentq, newton
from scipy.spatial.distance import pdist

from dirichlet.schemas import DomainShape, NodeClass, ScalarField, ShapeKind, SurfaceState
from geometry.hypgeom import curvature_matrices
from geometry.schemas import PointJet
from utils.errors import ConfigurationError, DiscretizationError

logger = logging.getLogger(__name__)

# Smallest intercept fraction along a grid line
THETA_FLOOR = 1e-3
# Grid line directions (step in index space)
DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1))
OPERATOR_NAMES = ("x", "y", "xx", "yy", "xy")
BOUNDARY_SAMPLES = 2048
PROJECTION_CHUNK = 2048

LevelSet = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _blob_radius(shape: DomainShape, theta: np.ndarray, order: int = 0) -> np.ndarray:
    """Polar radius of a blob and its theta derivatives."""
    theta = np.asarray(theta, dtype=float)
    value = np.ones_like(theta) if order == 0 else np.zeros_like(theta)
    for index, (amp, phase) in enumerate(zip(shape.blob_amplitudes, shape.phases)):
        m = index + 2
        arg = m * theta + phase
        if order == 0:
            value = value + amp * np.cos(arg)
        elif order == 1:
            value = value - amp * m * np.sin(arg)
        else:
            value = value - amp * m * m * np.cos(arg)
    return shape.blob_radius * value


def level_set(shape: DomainShape) -> LevelSet:
    """
    Level-set function of a shape, negative inside the domain.

    Args:
        shape: Domain shape

    Returns:
        LevelSet: Vectorized function phi(x, y)
    """
    if shape.shape == ShapeKind.DISK:
        return lambda x, y: np.hypot(x, y) - shape.radius
    if shape.shape == ShapeKind.ANNULUS:
        return lambda x, y: np.maximum(shape.r_in - np.hypot(x, y), np.hypot(x, y) - shape.r_out)
    if shape.shape == ShapeKind.ELLIPSE:
        scale = 0.5 * min(shape.a, shape.b)
        return lambda x, y: scale * ((x / shape.a) ** 2 + (y / shape.b) ** 2 - 1.0)
    return lambda x, y: np.hypot(x, y) - _blob_radius(shape, np.arctan2(y, x))


def boundary_curve(shape: DomainShape, theta) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Parametrization of a simply connected boundary and its first two derivatives.

    Args:
        shape: Disk, ellipse or blob
        theta: Parameter values

    Returns:
        Tuple of points, first and second derivatives (components on the last axis)
    """
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    radial = np.stack([c, s], axis=-1)
    tangent = np.stack([-s, c], axis=-1)
    if shape.shape == ShapeKind.DISK:
        r = shape.radius
        return r * radial, r * tangent, -r * radial
    if shape.shape == ShapeKind.ELLIPSE:
        axes = np.array([shape.a, shape.b])
        return axes * radial, axes * tangent, -axes * radial
    if shape.shape == ShapeKind.BLOB:
        r = _blob_radius(shape, theta)[..., None]
        r1 = _blob_radius(shape, theta, 1)[..., None]
        r2 = _blob_radius(shape, theta, 2)[..., None]
        return r * radial, r1 * radial + r * tangent, r2 * radial + 2.0 * r1 * tangent - r * radial
    raise ConfigurationError(f"Shape {shape.shape.value} has no single boundary parametrization")


def _projected_distance(shape: DomainShape, points: np.ndarray) -> np.ndarray:
    """Unsigned distance to the boundary curve by closest-point projection."""
    theta_grid = np.linspace(0.0, 2.0 * np.pi, BOUNDARY_SAMPLES, endpoint=False)
    samples, _, _ = boundary_curve(shape, theta_grid)
    distances = np.empty(points.shape[0])

    for start in range(0, points.shape[0], PROJECTION_CHUNK):
        chunk = points[start:start + PROJECTION_CHUNK]
        coarse = np.sum((chunk[:, None, :] - samples[None, :, :]) ** 2, axis=-1)
        theta0 = theta_grid[np.argmin(coarse, axis=1)]

        def stationarity(theta):
            gamma, d_gamma, _ = boundary_curve(shape, theta)
            return np.sum((gamma - chunk) * d_gamma, axis=-1)

        def stationarity_prime(theta):
            gamma, d_gamma, dd_gamma = boundary_curve(shape, theta)
            return np.sum(d_gamma * d_gamma, axis=-1) + np.sum((gamma - chunk) * dd_gamma, axis=-1)

        if chunk.shape[0] == 1:
            theta = np.atleast_1d(newton(stationarity, theta0[0], fprime=stationarity_prime, tol=1e-13, maxiter=50))
        else:
            theta = np.atleast_1d(
                newton(stationarity, theta0, fprime=stationarity_prime, tol=1e-13, maxiter=50, disp=False)
            )
        closest, _, _ = boundary_curve(shape, theta)
        projected = np.linalg.norm(chunk - closest, axis=-1)
        # a failed projection never beats the coarse sample
        distances[start:start + chunk.shape[0]] = np.minimum(projected, np.sqrt(np.min(coarse, axis=1)))

    return distances


def signed_distance(shape: DomainShape, points) -> np.ndarray:
    """
    Signed distance to the boundary, negative inside the domain.

    Args:
        shape: Domain shape
        points: Array of points, shape (N, 2)

    Returns:
        np.ndarray: Signed distances, shape (N,)
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    rho = np.hypot(points[:, 0], points[:, 1])
    if shape.shape == ShapeKind.DISK:
        return rho - shape.radius
    if shape.shape == ShapeKind.ANNULUS:
        return np.maximum(shape.r_in - rho, rho - shape.r_out)

    sign = np.where(level_set(shape)(points[:, 0], points[:, 1]) < 0.0, -1.0, 1.0)
    return sign * _projected_distance(shape, points)


def _blob_curvature(shape: DomainShape) -> np.ndarray:
    theta = np.linspace(0.0, 2.0 * np.pi, BOUNDARY_SAMPLES, endpoint=False)
    r = _blob_radius(shape, theta)
    r1 = _blob_radius(shape, theta, 1)
    r2 = _blob_radius(shape, theta, 2)
    return (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5


def domain_geometry(shape: DomainShape) -> Dict[str, Optional[float]]:
    """
    Diameter, boundary component count and extremal sphere radii of a shape.

    Returns:
        Dict with keys diameter, components, exterior_radius (None when
        unbounded) and interior_radius
    """
    if shape.shape == ShapeKind.DISK:
        return {"diameter": 2.0 * shape.radius, "components": 1,
                "exterior_radius": None, "interior_radius": shape.radius}
    if shape.shape == ShapeKind.ANNULUS:
        return {"diameter": 2.0 * shape.r_out, "components": 2,
                "exterior_radius": shape.r_in, "interior_radius": 0.5 * (shape.r_out - shape.r_in)}
    if shape.shape == ShapeKind.ELLIPSE:
        major, minor = max(shape.a, shape.b), min(shape.a, shape.b)
        return {"diameter": 2.0 * major, "components": 1,
                "exterior_radius": None, "interior_radius": minor * minor / major}

    theta = np.linspace(0.0, 2.0 * np.pi, BOUNDARY_SAMPLES, endpoint=False)
    points, _, _ = boundary_curve(shape, theta)
    curvature = _blob_curvature(shape)
    concave = curvature.min()
    return {
        "diameter": float(pdist(points).max()),
        "components": 1,
        "exterior_radius": None if concave >= 0.0 else float(1.0 / -concave),
        "interior_radius": float(1.0 / curvature.max()),
    }


def _bounding_extent(shape: DomainShape) -> Tuple[float, float]:
    if shape.shape == ShapeKind.DISK:
        return shape.radius, shape.radius
    if shape.shape == ShapeKind.ANNULUS:
        return shape.r_out, shape.r_out
    if shape.shape == ShapeKind.ELLIPSE:
        return shape.a, shape.b
    reach = shape.blob_radius * (1.0 + sum(abs(amp) for amp in shape.blob_amplitudes))
    return reach, reach


def _taylor_weights(offsets: List[float], order: int, h: float) -> np.ndarray:
    """Finite-difference weights for the given derivative order from the local Taylor system."""
    scaled = np.asarray(offsets, dtype=float) / h
    count = scaled.size
    vander = np.array([[x ** k / math.factorial(k) for x in scaled] for k in range(count)])
    rhs = np.zeros(count)
    rhs[order] = 1.0
    return np.linalg.solve(vander, rhs) / h ** order


@dataclass(frozen=True)
class GridDomain:
    """
    A level-set domain sampled on a uniform grid.

    Node arrays (classification, phi, index) use "ij" indexing: the first
    axis runs along x. Per-unknown arrays are ordered by the index array.
    """
    shape: DomainShape
    h: float
    xs: np.ndarray
    ys: np.ndarray
    phi: np.ndarray
    classification: np.ndarray
    index: np.ndarray
    node_ij: np.ndarray
    points: np.ndarray
    distance: np.ndarray
    diameter: float
    components: int
    exterior_radius: Optional[float]
    interior_radius: float
    operators: Dict[str, sparse.csr_matrix]
    boundary_weights: Dict[str, np.ndarray]
    intercepts: np.ndarray

    @property
    def n_unknowns(self) -> int:
        return int(self.points.shape[0])

    @property
    def node_class(self) -> np.ndarray:
        return self.classification[self.node_ij[:, 0], self.node_ij[:, 1]]

    @property
    def interior_mask(self) -> np.ndarray:
        return self.node_class == NodeClass.INTERIOR

    @property
    def near_boundary_mask(self) -> np.ndarray:
        return self.node_class == NodeClass.NEAR_BOUNDARY

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])

    def locate(self, node: Union[int, Tuple[int, int]]) -> int:
        """
        Unknown index of a node given either as unknown index or grid indices.

        Raises:
            DiscretizationError: If the node is not an unknown node
        """
        if isinstance(node, (int, np.integer)):
            if not 0 <= int(node) < self.n_unknowns:
                raise DiscretizationError(f"Unknown index {node} out of range", node=None)
            return int(node)
        i, j = int(node[0]), int(node[1])
        if not (0 <= i < self.index.shape[0] and 0 <= j < self.index.shape[1]) or self.index[i, j] < 0:
            raise DiscretizationError(f"Node {(i, j)} has no stencil support: it is not inside the domain", node=(i, j))
        return int(self.index[i, j])

    def describe(self) -> Dict[str, Optional[float]]:
        """Geometry summary recorded in reports."""
        return {
            "shape": self.shape.shape.value,
            "h": self.h,
            "nodes": self.n_unknowns,
            "interior_nodes": int(np.count_nonzero(self.interior_mask)),
            "diameter": self.diameter,
            "components": self.components,
            "exterior_radius": self.exterior_radius,
            "interior_radius": self.interior_radius,
        }


class _StencilBuilder:
    """Accumulates sparse operator entries and boundary weights row by row."""

    def __init__(self, n_unknowns: int):
        self.rows: Dict[str, List[int]] = {name: [] for name in OPERATOR_NAMES}
        self.cols: Dict[str, List[int]] = {name: [] for name in OPERATOR_NAMES}
        self.vals: Dict[str, List[float]] = {name: [] for name in OPERATOR_NAMES}
        self.boundary = {name: np.zeros(n_unknowns) for name in OPERATOR_NAMES}

    def add(self, name: str, row: int, samples: List[Tuple[Optional[int], float]], weights: np.ndarray,
            scale: float = 1.0) -> None:
        for (col, _), weight in zip(samples, weights):
            if col is None:
                self.boundary[name][row] += scale * weight
            else:
                self.rows[name].append(row)
                self.cols[name].append(col)
                self.vals[name].append(scale * weight)

    def operators(self, n_unknowns: int) -> Dict[str, sparse.csr_matrix]:
        return {
            name: sparse.csr_matrix(
                (self.vals[name], (self.rows[name], self.cols[name])), shape=(n_unknowns, n_unknowns)
            )
            for name in OPERATOR_NAMES
        }


def build_domain(shape: DomainShape, h: float) -> GridDomain:
    """
    Samples a domain on a uniform grid and assembles its difference operators.

    Args:
        shape: Level-set shape description
        h: Grid spacing

    Returns:
        GridDomain: Immutable discretized domain

    Raises:
        ConfigurationError: If h is not positive or the domain has no interior node
        DiscretizationError: If a boundary intercept cannot be located
    """
    if not h > 0:
        raise ConfigurationError(f"Grid spacing h={h} must be positive", messages=["domain.h: must be positive"])

    phi_fn = level_set(shape)
    extent_x, extent_y = _bounding_extent(shape)
    half_x = int(math.ceil(extent_x / h)) + 3
    half_y = int(math.ceil(extent_y / h)) + 3
    xs = h * np.arange(-half_x, half_x + 1)
    ys = h * np.arange(-half_y, half_y + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    phi = phi_fn(X, Y)
    inside = phi < 0.0

    classification = np.full(phi.shape, NodeClass.EXTERIOR, dtype=int)
    neighbors_inside = np.ones_like(inside)
    touches_inside = np.zeros_like(inside)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            shifted = np.roll(np.roll(inside, -di, axis=0), -dj, axis=1)
            neighbors_inside &= shifted
            touches_inside |= shifted
    classification[inside & neighbors_inside] = NodeClass.INTERIOR
    classification[inside & ~neighbors_inside] = NodeClass.NEAR_BOUNDARY
    classification[~inside & touches_inside] = NodeClass.BOUNDARY_GHOST

    if not np.any(classification == NodeClass.INTERIOR):
        raise ConfigurationError(
            f"Domain {shape.shape.value} is too thin for h={h}: no interior nodes",
            messages=[f"domain.h: no interior nodes at h={h}"],
        )

    node_ij = np.argwhere(inside)
    index = np.full(phi.shape, -1, dtype=int)
    index[node_ij[:, 0], node_ij[:, 1]] = np.arange(node_ij.shape[0])
    points = np.column_stack([xs[node_ij[:, 0]], ys[node_ij[:, 1]]])
    n_unknowns = points.shape[0]

    builder = _StencilBuilder(n_unknowns)
    intercepts: List[Tuple[float, float]] = []
    uniform_first = _taylor_weights([-1.0, 0.0, 1.0], 1, 1.0)
    uniform_second = _taylor_weights([-1.0, 0.0, 1.0], 2, 1.0)

    def side(i: int, j: int, di: int, dj: int, sign: int, step: float):
        """Nearest sample on one side of a node and, if present, the next node behind it."""
        ni, nj = i + sign * di, j + sign * dj
        if inside[ni, nj]:
            far = None
            fi, fj = ni + sign * di, nj + sign * dj
            if inside[fi, fj]:
                far = (int(index[fi, fj]), 2.0 * sign * step)
            return (int(index[ni, nj]), sign * step), far, False
        x0, y0 = xs[i], ys[j]
        dx, dy = sign * di * h, sign * dj * h
        try:
            t = brentq(lambda s: float(phi_fn(np.array(x0 + s * dx), np.array(y0 + s * dy))), 0.0, 1.0, xtol=1e-14)
        except ValueError as e:
            raise DiscretizationError(
                f"No boundary intercept between node {(i, j)} and {(ni, nj)}: {e}", node=(i, j)
            )
        intercepts.append((x0 + t * dx, y0 + t * dy))
        return (None, sign * max(t, THETA_FLOOR) * step), None, True

    for row, (i, j) in enumerate(node_ij):
        for di, dj in DIRECTIONS:
            step = h * math.hypot(di, dj)
            back, back_far, back_cut = side(i, j, di, dj, -1, step)
            ahead, ahead_far, ahead_cut = side(i, j, di, dj, +1, step)
            samples = [back, (row, 0.0), ahead]

            if not back_cut and not ahead_cut:
                first = uniform_first / step
                second = uniform_second / step ** 2
                second_samples = samples
            else:
                offsets = [offset for _, offset in samples]
                first = _taylor_weights(offsets, 1, h)
                second_samples = samples
                if back_cut != ahead_cut:
                    extra = back_far if ahead_cut else ahead_far
                    if extra is not None:
                        second_samples = ([extra] + samples) if ahead_cut else (samples + [extra])
                second = _taylor_weights([offset for _, offset in second_samples], 2, h)

            if (di, dj) == (1, 0):
                builder.add("x", row, samples, first)
                builder.add("xx", row, second_samples, second)
            elif (di, dj) == (0, 1):
                builder.add("y", row, samples, first)
                builder.add("yy", row, second_samples, second)
            elif (di, dj) == (1, 1):
                builder.add("xy", row, second_samples, second, scale=0.5)
            else:
                builder.add("xy", row, second_samples, second, scale=-0.5)

    geometry = domain_geometry(shape)
    distance = signed_distance(shape, points)

    domain = GridDomain(
        shape=shape,
        h=float(h),
        xs=xs,
        ys=ys,
        phi=phi,
        classification=classification,
        index=index,
        node_ij=node_ij,
        points=points,
        distance=distance,
        diameter=float(geometry["diameter"]),
        components=int(geometry["components"]),
        exterior_radius=geometry["exterior_radius"],
        interior_radius=float(geometry["interior_radius"]),
        operators=builder.operators(n_unknowns),
        boundary_weights=builder.boundary,
        intercepts=np.asarray(intercepts, dtype=float).reshape(-1, 2),
    )
    logger.info(
        f"Built {shape.shape.value} grid: h={h:.5g}, {n_unknowns} unknowns, "
        f"{int(np.count_nonzero(domain.interior_mask))} interior, L={domain.diameter:.4f}, m={domain.components}"
    )
    return domain


def field_jets(field: ScalarField, domain: GridDomain) -> Tuple[np.ndarray, np.ndarray]:
    """
    Finite-difference gradients and Hessians at every unknown node.

    Args:
        field: Grid function with its boundary value
        domain: Discretized domain

    Returns:
        Tuple of gradients (N, 2) and symmetric Hessians (N, 2, 2)
    """
    U = field.values
    g = field.boundary_value
    derivative = {
        name: domain.operators[name] @ U + g * domain.boundary_weights[name] for name in OPERATOR_NAMES
    }
    Du = np.column_stack([derivative["x"], derivative["y"]])
    D2u = np.empty((U.size, 2, 2))
    D2u[:, 0, 0] = derivative["xx"]
    D2u[:, 1, 1] = derivative["yy"]
    D2u[:, 0, 1] = derivative["xy"]
    D2u[:, 1, 0] = derivative["xy"]
    return Du, D2u


def fd_jet(field: ScalarField, domain: GridDomain, node: Union[int, Tuple[int, int]]) -> PointJet:
    """
    Finite-difference jet of a grid function at one node.

    Args:
        field: Grid function with its boundary value
        domain: Discretized domain
        node: Unknown index or grid indices (i, j)

    Returns:
        PointJet: Value, gradient and Hessian at the node

    Raises:
        DiscretizationError: If the node is not an unknown node
    """
    row = domain.locate(node)
    U = field.values
    g = field.boundary_value

    def apply(name: str) -> float:
        return float((domain.operators[name][row] @ U)[0]) + g * float(domain.boundary_weights[name][row])

    uxy = apply("xy")
    return PointJet(
        u=float(U[row]),
        Du=np.array([apply("x"), apply("y")]),
        D2u=np.array([[apply("xx"), uxy], [uxy, apply("yy")]]),
    )


def sample_field(domain: GridDomain, function: Callable[[np.ndarray], np.ndarray], boundary_value: float) -> ScalarField:
    """Evaluates a function of the node coordinates (N, 2) at the unknown nodes."""
    return ScalarField(values=np.asarray(function(domain.points), dtype=float), boundary_value=boundary_value)


def constant_field(domain: GridDomain, value: float) -> ScalarField:
    """The horosphere field u = value with matching boundary value."""
    return ScalarField(values=np.full(domain.n_unknowns, float(value)), boundary_value=float(value))


def grid_array(domain: GridDomain, values: np.ndarray) -> np.ndarray:
    """Scatters per-unknown values onto the full grid, NaN outside the domain."""
    array = np.full(domain.index.shape, np.nan)
    array[domain.node_ij[:, 0], domain.node_ij[:, 1]] = values
    return array


def evaluate_state(domain: GridDomain, field: ScalarField, epsilon: float) -> SurfaceState:
    """
    Derived geometry of a height field: jets, w, vertical normal, Av, curvatures.

    Args:
        domain: Discretized domain
        field: Height field (positive values)
        epsilon: Dirichlet value the field was solved for

    Returns:
        SurfaceState: The state snapshot
    """
    Du, D2u = field_jets(field, domain)
    Av, _, _, w = curvature_matrices(field.values, Du, D2u)
    kappa = np.linalg.eigvalsh(Av)
    admissible = (kappa[:, 0] > 0.0) & (field.values > 0.0)
    return SurfaceState(
        domain=domain,
        field=field,
        epsilon=float(epsilon),
        Du=Du,
        D2u=D2u,
        w=w,
        nu_vertical=1.0 / w,
        Av=Av,
        kappa=kappa,
        admissible=admissible,
    )
