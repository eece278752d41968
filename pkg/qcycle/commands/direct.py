"""Cycle direction command."""

import argparse
import logging

from qcycle.commands.route import add_routing_arguments, route_from_files
from qcycle.services.config import Strategy
from qcycle.services.direction import (
    CycleMasks,
    assign_forward,
    assign_random,
    dump_directions,
    dump_missing_pairs,
    greedy_update_cycle_direction,
    initial_cycle_direction,
    missing_fraction,
)

logger = logging.getLogger(__name__)

DIRECT_STRATEGIES = [Strategy.FORWARD, Strategy.RANDOM, Strategy.GREEDY]


class Direct:
    """Assign cycle directions and list the directed pairs left missing."""

    name = "direct"
    help = "Assign cycle directions (forward, random or greedy)"

    def configure(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--strategy",
            choices=[s.value for s in DIRECT_STRATEGIES],
            default=Strategy.GREEDY.value,
        )
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument(
            "--exclude-pass-through",
            action="store_true",
            help="Only quorum members form pairs on a cycle",
        )
        add_routing_arguments(parser)

    def run(self, args: argparse.Namespace) -> int:
        topology, routes = route_from_files(args)
        n = topology.node_count
        through = not args.exclude_pass_through
        strategy = Strategy(args.strategy)

        if strategy is Strategy.FORWARD:
            assignment = assign_forward(routes, n, through)
        elif strategy is Strategy.RANDOM:
            assignment = assign_random(routes, n, args.seed, through)
        else:
            masks = CycleMasks.build(routes, n, through)
            initial, pc = initial_cycle_direction(routes, n, through, masks=masks)
            logger.info(f"Initial directions: {initial.missing_count} missing pairs")
            assignment = greedy_update_cycle_direction(
                routes, initial, pc, through, masks=masks
            )

        print(dump_directions(assignment), end="")
        pct = 100.0 * missing_fraction(assignment.missing, n)
        print(f"# missing {assignment.missing_count} pairs ({pct:.2f}%)")
        print(dump_missing_pairs(assignment.missing), end="")
        return 0
