"""
Plot service.

SVG contour plots of converged fields and of the epsilon-ladder trend. The
plots are decorative; nothing downstream reads them.
"""
import logging
from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from dirichlet.grid import GridDomain, boundary_curve, grid_array  # noqa: E402
from dirichlet.schemas import ShapeKind  # noqa: E402
from schemas.report import LadderTrend  # noqa: E402

logger = logging.getLogger(__name__)

FIGURE_SIZE = (4.8, 4.2)
CONTOUR_LEVELS = 24

# fixed ids and no timestamps so that identical runs give identical files
plt.rcParams.update({
    "svg.hashsalt": "dirichlet-hyperbolic",
    "svg.fonttype": "none",
    "font.size": 9,
    "font.family": "serif",
    "mathtext.fontset": "stix",
    "axes.labelsize": 9,
    "lines.linewidth": 1,
})


class PlotService:
    """
    Service for rendering run figures.
    """

    @staticmethod
    def _save(fig, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        logger.info(f"Wrote {path}")
        return path

    @staticmethod
    def field_contour(domain: GridDomain, values: np.ndarray, title: str, path: Union[str, Path]) -> Path:
        """
        Filled contour plot of a per-node field with the domain boundary.

        Args:
            domain: Discretized domain the values live on
            values: One value per unknown node
            title: Axes title
            path: Destination SVG file

        Returns:
            Path: The written file
        """
        array = np.ma.masked_invalid(grid_array(domain, values))
        fig, ax = plt.subplots(figsize=FIGURE_SIZE)
        filled = ax.contourf(domain.xs, domain.ys, array.T, levels=CONTOUR_LEVELS, cmap="viridis")
        fig.colorbar(filled, ax=ax, shrink=0.85)
        theta = np.linspace(0.0, 2.0 * np.pi, 721)
        for x, y in _boundary_components(domain, theta):
            ax.plot(x, y, color="black")
        ax.set_aspect("equal")
        ax.set_xlabel("$x_1$")
        ax.set_ylabel("$x_2$")
        ax.set_title(title)
        return PlotService._save(fig, path)

    @staticmethod
    def ladder_trend(trend: LadderTrend, sigma: float, path: Union[str, Path]) -> Path:
        """Log-log plot of the near-boundary excess |w - 1/sigma| and max kappa against epsilon."""
        fig, (left, right) = plt.subplots(1, 2, figsize=(2 * FIGURE_SIZE[0], FIGURE_SIZE[1]))
        eps = np.asarray(trend.epsilons, dtype=float)
        excess = np.asarray(trend.boundary_w_excess, dtype=float)
        if eps.size:
            left.loglog(eps, np.maximum(excess, 1e-300), marker="o")
            right.semilogx(eps, trend.max_kappa, marker="o")
        if trend.kappa_bound is not None:
            right.axhline(trend.kappa_bound, color="gray", linestyle="--")
        left.set_xlabel(r"$\varepsilon$")
        left.set_ylabel(rf"max $|w - 1/\sigma|$ near boundary ($\sigma$={sigma:g})")
        right.set_xlabel(r"$\varepsilon$")
        right.set_ylabel(r"max $\kappa$")
        fig.tight_layout()
        return PlotService._save(fig, path)


def _boundary_components(domain: GridDomain, theta: np.ndarray) -> Sequence:
    """Boundary polylines; an annulus contributes both circles."""
    shape = domain.shape
    if shape.shape == ShapeKind.ANNULUS:
        c, s = np.cos(theta), np.sin(theta)
        return [(r * c, r * s) for r in (shape.r_in, shape.r_out)]
    points, _, _ = boundary_curve(shape, theta)
    return [(points[:, 0], points[:, 1])]
