"""Cycle routing command."""

import argparse
import logging

from qcycle.services.quorum import (
    QuorumInfeasibleError,
    build_quorum_set,
    load_bases_file,
    lookup_base,
)
from qcycle.services.routing import (
    DEFAULT_ROUTE_BUDGET,
    CycleRoute,
    dump_cycles,
    links_used,
    route_all,
)
from qcycle.services.topology import Topology, load_topology_file

logger = logging.getLogger(__name__)


def add_routing_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("topology", help="Edge-list topology file")
    parser.add_argument("basefile", help="Base-set file holding a base for N")
    parser.add_argument(
        "--redundancy", "-r", type=int, default=1, help="Required redundancy R"
    )
    parser.add_argument("--budget", type=int, default=DEFAULT_ROUTE_BUDGET)


def route_from_files(args: argparse.Namespace) -> tuple[Topology, list[CycleRoute]]:
    """Load topology and base file, then route every quorum.

    Raises:
        QuorumInfeasibleError: If the file lists no base for (N, R).
    """
    topology = load_topology_file(args.topology)
    n = topology.node_count
    base = lookup_base(load_bases_file(args.basefile), n, args.redundancy)
    if base is None:
        raise QuorumInfeasibleError(
            f"{args.basefile} lists no base for N={n} with R>={args.redundancy}"
        )
    return topology, route_all(topology, build_quorum_set(base), args.budget)


class Route:
    """Route every quorum of a listed base as a cycle on a topology."""

    name = "route"
    help = "Route quorum cycles and print the cycle dump"

    def configure(self, parser: argparse.ArgumentParser) -> None:
        add_routing_arguments(parser)

    def run(self, args: argparse.Namespace) -> int:
        topology, routes = route_from_files(args)
        print(dump_cycles(routes), end="")
        single, paired = links_used(routes), links_used(routes, paired=True)
        print(f"# links used {single} ({paired} paired)")
        logger.info(f"Routed {len(routes)} cycles on '{topology.name}'")
        return 0
