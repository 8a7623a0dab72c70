#!/usr/bin/env python3
"""
Steane T-gate noise simulator
Main Application Entry Point
"""
import argparse
import logging
import sys
from typing import List, Optional

from constants import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_WORKERS,
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_SIMULATION_ERROR,
    OUTPUT_FORMATS,
    SWEEP_GRID_POINTS,
)
from core.orchestrator import COMMANDS, RunConfig, SimulationOrchestrator, render
from errors import SimulationError
from protocols import STAGES
from utils import emit

logger = logging.getLogger("steane_tgate")

_HELP = {
    "table1": "fidelity of the constructed |Theta> and its decoded |theta>",
    "table2": "output fidelities after the T gate (fitted over the angle grid)",
    "table3": "gate fidelity Tr[chi(p) chi(0)] of the logical T gate",
    "sweep": "first-order coefficients of one method/stage over the angle grid",
    "oracle-check": "engine vs exact density-matrix oracle on the toy corpus",
    "dump-circuit": "location records of one pipeline circuit",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Perturbative Pauli-noise simulator for Steane-code T gates",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py table1 --compare                 # |Theta> fidelities vs reference
  python main.py table3 --method FT --format markdown
  python main.py table2 --stage t-gate --grid 8
  python main.py sweep --method GET --plot get.png
  python main.py oracle-check --order 2
  python main.py dump-circuit --method GE0 --stage t-gate+noisy-ec
        """,
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--method", action="append", type=str.upper, choices=["FT", "GE0", "GET"],
                        help="construction method (repeatable; default: all)")
    common.add_argument("--stage", action="append", choices=STAGES,
                        help="pipeline stage (repeatable)")
    common.add_argument("--order", type=int, default=None,
                        help="truncation order K (0, 1 or 2; default 1)")
    common.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                        help="input angle alpha for reported polynomials")
    common.add_argument("--beta", type=float, default=DEFAULT_BETA,
                        help="input phase beta for reported polynomials")
    common.add_argument("--grid", type=int, default=SWEEP_GRID_POINTS,
                        help="angle grid points per axis")
    common.add_argument("--rounds", type=int, default=None,
                        help="|Theta> projection rounds for FT/GE0 (1 or 2; default 2)")
    common.add_argument("--compare", action="store_true",
                        help="diff first-order coefficients against the bundled reference")
    common.add_argument("--format", choices=OUTPUT_FORMATS, default="json",
                        help="output format")
    common.add_argument("--workers", type=int, default=DEFAULT_WORKERS,
                        help="branch worker threads")
    common.add_argument("--out", metavar="FILE", default=None,
                        help="write the report to FILE instead of stdout")
    common.add_argument("--verbose", action="store_true", help="debug logging")
    common.add_argument("--quiet", action="store_true", help="warnings only, no banner")

    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        cmd = sub.add_parser(command, parents=[common], help=_HELP[command])
        if command == "sweep":
            cmd.add_argument("--plot", metavar="FILE", default=None,
                             help="save a heat map of the decoded p_z coefficient")
    return parser


def configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    if not args.quiet:
        print("\n" + "=" * 60, file=sys.stderr)
        print("STEANE CODE T-GATE NOISE SIMULATOR", file=sys.stderr)
        print(f"  {args.command}", file=sys.stderr)
        print("=" * 60 + "\n", file=sys.stderr)

    try:
        config = RunConfig.from_args(args)
        report = SimulationOrchestrator(config).run()
    except SimulationError as exc:
        logger.error("%s", exc)
        return EXIT_SIMULATION_ERROR

    emit(render(report, config.output_format), config.out)
    if not report.passed:
        logger.warning("%s: some checks failed", config.command)
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
