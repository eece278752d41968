"""Command-line entry point: one subcommand per command class."""

import argparse
import logging
import sys
from collections.abc import Sequence
from typing import NoReturn

from qcycle.commands.direct import Direct
from qcycle.commands.quorum import Quorum
from qcycle.commands.report import Report
from qcycle.commands.route import Route
from qcycle.commands.simulate import Simulate
from qcycle.services.quorum import (
    BaseFileError,
    QuorumInfeasibleError,
    SearchBudgetExhausted,
)
from qcycle.services.routing import RoutingError
from qcycle.services.topology import (
    MappingError,
    TopologyParseError,
    TopologyValidationError,
)

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3

COMMANDS = [Quorum(), Route(), Direct(), Simulate(), Report()]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qcycle",
        description="Quorum-based protection cycle planning and fault simulation.",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log at DEBUG level"
    )
    subparsers = parser.add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    for command in COMMANDS:
        command.configure(subparsers.add_parser(command.name, help=command.help))
    return parser


def exit_code(error: Exception) -> int:
    """Map a failure to the process exit code."""
    if isinstance(error, QuorumInfeasibleError | SearchBudgetExhausted | RoutingError):
        return EXIT_INFEASIBLE
    if isinstance(
        error,
        OSError
        | TopologyParseError
        | TopologyValidationError
        | BaseFileError
        | MappingError,
    ):
        return EXIT_IO
    return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"qcycle: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    command = next(c for c in COMMANDS if c.name == args.command)
    try:
        return command.run(args)
    except (ValueError, RuntimeError, OSError, LookupError) as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        logger.error(f"{args.command}: {e}")
        return exit_code(e)
