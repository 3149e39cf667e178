"""
Run service for the hyperbolic Dirichlet solver.

This module orchestrates a configured run: it builds the grid domain, runs
the epsilon ladder, writes solution tables, the diagnostics report and the
plots, compares against the radial oracle, and re-renders stored runs.
"""
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from dirichlet.grid import GridDomain, build_domain
from dirichlet.oracle import shoot
from dirichlet.solver import LadderResult, epsilon_continuation
from geometry.symfunc import excess_surrogate
from schemas.report import DiagnosticsReport, OracleComparison, OracleRow, RunStatus
from schemas.run_config import RunConfig
from services.plotting import PlotService
from utils.config import Config
from utils.errors import BaseSolverError, ConfigurationError, ConvergenceError, ExitStatus
from utils.export import read_json, read_solution_csv, write_json, write_solution_csv, write_solution_table

logger = logging.getLogger(__name__)

CONVERGENCE_LOG = "convergence.log"
REPORT_FILE = "report.json"
CONFIG_FILE = "config.json"
ORACLE_FILE = "oracle_comparison.json"
LOGGED_PACKAGES = ("dirichlet", "services")


def solution_stem(index: int) -> str:
    return f"eps_{index:02d}"


def oracle_tolerance(config: RunConfig) -> float:
    """5 h^2 for a disk, max(2e-3, 5 h^2) for an annulus."""
    h = config.domain.h
    if config.domain.shape.value == "disk":
        return 5.0 * h * h
    return max(2e-3, 5.0 * h * h)


@contextmanager
def convergence_log(out_dir: Path) -> Iterator[Path]:
    """
    Mirrors solver logging, Newton iterates included, into the run directory
    for the duration of a run. Console handlers keep their own levels.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / CONVERGENCE_LOG
    handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter("%(name)s - %(levelname)s - %(message)s"))
    loggers = [logging.getLogger(name) for name in LOGGED_PACKAGES]
    levels = [package_logger.level for package_logger in loggers]
    for package_logger in loggers:
        package_logger.addHandler(handler)
        package_logger.setLevel(logging.DEBUG)
    try:
        yield path
    finally:
        for package_logger, level in zip(loggers, levels):
            package_logger.removeHandler(handler)
            package_logger.setLevel(level)
        handler.close()


def _failure_dict(error: BaseSolverError, epsilon: Optional[float], log_path: Path) -> Dict[str, Any]:
    failure = error.as_dict()
    failure["epsilon"] = epsilon
    failure["convergence_log"] = str(log_path)
    if isinstance(error, ConvergenceError):
        failure["history"] = error.history
        failure["last_t"] = error.last_t
        failure["last_residual"] = error.last_residual
    return failure


class RunService:
    """
    Service for configured solver runs.
    """

    @staticmethod
    def output_dir(config: RunConfig, override: Optional[Union[str, Path]] = None) -> Path:
        """Output directory: command-line override, then [output] directory, then OUTPUT_DIR/<hash>."""
        if override:
            return Path(override)
        if config.output.directory:
            return Path(config.output.directory)
        return Path(Config.OUTPUT_DIR) / config.config_hash()[:12]

    @staticmethod
    def _solve_ladder(config: RunConfig, out_dir: Path) -> Tuple[GridDomain, LadderResult, Path]:
        domain = build_domain(config.domain.to_shape(), config.domain.h)
        schedule = config.schedule()
        with convergence_log(out_dir) as log_path:
            logger.info(f"Run {config.config_hash()[:12]}: {domain.n_unknowns} unknowns, ladder {schedule.epsilon_ladder}")
            result = epsilon_continuation(domain, schedule)
        return domain, result, log_path

    @staticmethod
    def _export(config: RunConfig, domain: GridDomain, result: LadderResult, out_dir: Path) -> List[Path]:
        written: List[Path] = []
        write_json(out_dir / CONFIG_FILE, config.model_dump(mode="json"))
        for index, state in enumerate(result.states):
            stem = solution_stem(index)
            if config.output.export_csv:
                written.append(write_solution_csv(out_dir / f"solution_{stem}.csv", state))
            if config.output.export_svg:
                written.append(PlotService.field_contour(
                    domain, state.u, f"u, epsilon={state.epsilon:g}", out_dir / f"u_{stem}.svg"
                ))
                written.append(PlotService.field_contour(
                    domain, state.kappa_max, f"kappa_max, epsilon={state.epsilon:g}", out_dir / f"kappa_max_{stem}.svg"
                ))
        if config.output.export_svg and result.records:
            written.append(PlotService.ladder_trend(result.trend, config.solve.sigma, out_dir / "trend.svg"))
        return written

    @staticmethod
    def solve(config: RunConfig, out_dir: Path) -> Tuple[DiagnosticsReport, int]:
        """
        Solves the configured epsilon ladder and writes every artifact.

        Args:
            config: Validated run configuration
            out_dir: Output directory

        Returns:
            Tuple of the diagnostics report and the exit status

        Raises:
            ConfigurationError: If the domain cannot be discretized
        """
        domain, result, log_path = RunService._solve_ladder(config, out_dir)
        spec = config.curvature.spec
        report = DiagnosticsReport(
            config_hash=config.config_hash(),
            h=config.domain.h,
            curvature=spec.label,
            sigma=config.solve.sigma,
            excess_surrogate=None if spec.l == 0 else excess_surrogate(spec),
            tolerances=config.tolerances(),
            geometry=domain.describe(),
            records=result.records,
            trend=result.trend,
        )
        if result.failure is not None:
            report.failure = _failure_dict(result.failure, result.failed_epsilon, log_path)
            logger.error(f"Solver failure; convergence log at {log_path}")
        report.status = report.evaluate_status()

        RunService._export(config, domain, result, out_dir)
        if config.output.report_json:
            write_json(out_dir / REPORT_FILE, report)
        logger.info(f"Run status {report.status.value}; artifacts in {out_dir}")
        status = ExitStatus.SUCCESS if report.status == RunStatus.PASSED else ExitStatus.NUMERICAL_FAILURE
        return report, int(status)

    @staticmethod
    def oracle_compare(config: RunConfig, out_dir: Path) -> Tuple[OracleComparison, int]:
        """
        Compares the grid solutions of a disk or annulus run with the radial oracle.

        Raises:
            ConfigurationError: If the domain is not rotationally symmetric
        """
        shape = config.domain.to_shape()
        if not shape.rotationally_symmetric:
            raise ConfigurationError(
                f"oracle-compare requires a disk or annulus, got {shape.shape.value}",
                messages=["domain.shape: oracle-compare requires disk or annulus"],
            )
        domain, result, log_path = RunService._solve_ladder(config, out_dir)
        spec = config.curvature.spec
        tolerance = oracle_tolerance(config)
        comparison = OracleComparison(
            config_hash=config.config_hash(),
            shape=shape.shape.value,
            h=config.domain.h,
            sigma=config.solve.sigma,
            curvature=spec.label,
        )
        try:
            for state in result.states:
                profile = shoot(shape, spec, config.solve.sigma, state.epsilon)
                error = np.abs(state.u - profile.sample(domain.radii))
                row = OracleRow(
                    epsilon=state.epsilon,
                    max_error=float(np.max(error)),
                    mean_error=float(np.mean(error)),
                    tolerance=tolerance,
                    passed=bool(np.max(error) <= tolerance),
                    oracle_parameter=profile.parameter,
                )
                logger.info(f"Oracle epsilon={state.epsilon:.5g}: max |u - u_oracle| = {row.max_error:.3e}")
                comparison.rows.append(row)
        except BaseSolverError as e:
            comparison.failure = e.as_dict()
            logger.error(f"Oracle failure: {e.detail}")
        if result.failure is not None:
            comparison.failure = _failure_dict(result.failure, result.failed_epsilon, log_path)
        write_json(out_dir / ORACLE_FILE, comparison)
        status = ExitStatus.SUCCESS if comparison.passed else ExitStatus.NUMERICAL_FAILURE
        return comparison, int(status)

    @staticmethod
    def render_report(run_dir: Path) -> Tuple[DiagnosticsReport, int]:
        """
        Re-renders the report, solution tables and plots of a stored run without solving.

        Raises:
            ConfigurationError: If the run directory lacks its config or report
        """
        config_path = run_dir / CONFIG_FILE
        report_path = run_dir / REPORT_FILE
        if not config_path.is_file() or not report_path.is_file():
            raise ConfigurationError(
                f"{run_dir} is not a run directory",
                messages=[f"--out: expected {CONFIG_FILE} and {REPORT_FILE} in {run_dir}"],
            )
        config = RunConfig.model_validate(read_json(config_path))
        report = DiagnosticsReport.model_validate(read_json(report_path))
        domain = build_domain(config.domain.to_shape(), config.domain.h)

        for index, record in enumerate(report.records):
            stem = solution_stem(index)
            table_path = run_dir / f"solution_{stem}.csv"
            if not table_path.is_file():
                logger.warning(f"Missing {table_path}; skipping epsilon={record.epsilon:g}")
                continue
            table = read_solution_csv(table_path)
            if table["u"].size != domain.n_unknowns:
                raise ConfigurationError(f"{table_path} does not match the stored grid")
            write_solution_table(table_path, table)
            PlotService.field_contour(domain, table["u"], f"u, epsilon={record.epsilon:g}", run_dir / f"u_{stem}.svg")
            PlotService.field_contour(
                domain, table["kappa_max"], f"kappa_max, epsilon={record.epsilon:g}", run_dir / f"kappa_max_{stem}.svg"
            )
        if report.records:
            PlotService.ladder_trend(report.trend, report.sigma, run_dir / "trend.svg")
        write_json(report_path, report)
        status = ExitStatus.SUCCESS if report.status == RunStatus.PASSED else ExitStatus.NUMERICAL_FAILURE
        return report, int(status)
