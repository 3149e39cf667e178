"""
Solve command.

Solves the configured epsilon ladder and writes the solution tables, the
diagnostics report and the plots.
"""
import argparse
import logging

from services.run_service import RunService
from utils.config import load_run_config
from utils.errors import ExitStatus
from utils.middleware import command_logging, error_tracking

logger = logging.getLogger(__name__)

COMMAND = "solve"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(COMMAND, parents=[parent], help="Solve the configured Dirichlet problem")
    parser.add_argument("--config", metavar="PATH", required=True, help="Run configuration file")
    return parser


@error_tracking
@command_logging(COMMAND)
def handle(args: argparse.Namespace) -> int:
    """
    Runs a configured solve.

    Args:
        args: Parsed arguments with config and out

    Returns:
        int: 0 if every epsilon converged and every hard check passed, 1 otherwise
    """
    config = load_run_config(args.config)
    out_dir = RunService.output_dir(config, args.out)
    report, status = RunService.solve(config, out_dir)

    for record in report.records:
        failed = [check.name for check in record.checks if check.failed]
        print(
            f"epsilon={record.epsilon:<10.5g} residual={record.residual:.2e} max_w={record.max_w:.5f} "
            f"max_kappa={record.max_kappa:.5f} {'FAILED: ' + ', '.join(failed) if failed else 'ok'}"
        )
    if report.failure is not None:
        print(f"Solver failure at epsilon={report.failure.get('epsilon')}: {report.failure.get('detail')}")
        print(f"Convergence log: {report.failure.get('convergence_log')}")
    print(f"Status: {report.status.value} ({out_dir})")
    if status != ExitStatus.SUCCESS:
        logger.warning(f"Solve finished with status {report.status.value}")
    return status
