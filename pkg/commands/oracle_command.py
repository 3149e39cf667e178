"""
Oracle comparison command.

Solves a disk or annulus configuration and tabulates the discrepancy to the
radial shooting solution at every epsilon.
"""
import argparse
import logging

from services.run_service import RunService
from utils.config import load_run_config
from utils.middleware import command_logging, error_tracking

logger = logging.getLogger(__name__)

COMMAND = "oracle-compare"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        COMMAND, parents=[parent], help="Compare a disk or annulus solve with the radial oracle"
    )
    parser.add_argument("--config", metavar="PATH", required=True, help="Run configuration file")
    return parser


@error_tracking
@command_logging(COMMAND)
def handle(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    out_dir = RunService.output_dir(config, args.out)
    comparison, status = RunService.oracle_compare(config, out_dir)

    print(f"{'epsilon':>10} {'max error':>12} {'mean error':>12} {'tolerance':>12}  result")
    for row in comparison.rows:
        print(
            f"{row.epsilon:>10.5g} {row.max_error:>12.3e} {row.mean_error:>12.3e} {row.tolerance:>12.3e}  "
            f"{'ok' if row.passed else 'FAILED'}"
        )
    if comparison.failure is not None:
        print(f"Failure: {comparison.failure.get('detail')}")
    return status
