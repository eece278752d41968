"""Single link failure sweeps over a directed cycle solution."""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from qcycle.services.direction import Pair, pair_mask
from qcycle.services.routing import CycleRoute, Direction
from qcycle.services.topology import Edge, Topology, edges_of_walk, normalize_edge

logger = logging.getLogger(__name__)


class FaultMode(str, Enum):
    """What a cycle still provides once one of its links is cut.

    WHOLE_CYCLE: nothing, the trail is down.
    SEGMENT: each surviving fragment keeps its own downstream pairs.
    """

    WHOLE_CYCLE = "whole_cycle"
    SEGMENT = "segment"


class UnknownEdgeError(LookupError):
    """Failed edge is not part of the topology."""


@dataclass(frozen=True)
class EdgeFault:
    missing: frozenset[Pair]
    compensated_missing: int | None = None

    @property
    def missing_count(self) -> int:
        return len(self.missing)


@dataclass(frozen=True)
class FaultReport:
    per_edge: dict[Edge, EdgeFault]
    mean_missing: float
    total_pairs: int
    coverage: float
    edges_swept: tuple[Edge, ...]
    mean_compensated_missing: float | None = field(default=None)


def _covered_grid(
    cycles: Sequence[CycleRoute],
    directions: Sequence[Direction],
    n: int,
    failed_edge: Edge | None,
    mode: FaultMode,
    count_pass_through: bool,
) -> tuple[np.ndarray, list[int]]:
    """OR of surviving pair grids, plus the hubs of cycles left intact."""
    grid = np.zeros((n, n), dtype=bool)
    hubs = []
    for cycle, direction in zip(cycles, directions, strict=True):
        edges = cycle.edges
        if failed_edge is None or failed_edge not in edges:
            grid |= pair_mask(cycle, direction, n, count_pass_through)
            hubs.append(cycle.hub)
        elif mode is FaultMode.SEGMENT:
            for fragment in _fragments(cycle, direction, failed_edge):
                grid |= _fragment_mask(fragment, n, cycle, count_pass_through)
    return grid, hubs


def _fragments(
    cycle: CycleRoute, direction: Direction, failed_edge: Edge
) -> list[tuple[int, ...]]:
    """Split the lit traversal wherever it crosses the failed edge."""
    traversal = cycle.traversal(direction)
    fragments = []
    start = 0
    for pos, edge in enumerate(edges_of_walk(traversal)):
        if edge == failed_edge:
            fragments.append(traversal[start : pos + 1])
            start = pos + 1
    fragments.append(traversal[start:])
    return [f for f in fragments if len(f) > 1]


def _fragment_mask(
    fragment: Sequence[int], n: int, cycle: CycleRoute, count_pass_through: bool
) -> np.ndarray:
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    for pos, node in enumerate(fragment):
        first.setdefault(node, pos)
        last[node] = pos
    allowed = cycle.nodes if count_pass_through else cycle.members
    mask = np.zeros((n, n), dtype=bool)
    for a in first:
        for b in last:
            if a != b and a in allowed and b in allowed and first[a] < last[b]:
                mask[a, b] = True
    return mask


def _grid_to_pairs(grid: np.ndarray) -> set[Pair]:
    return {(int(i), int(j)) for i, j in np.argwhere(grid)}


def _missing_grid(covered: np.ndarray) -> np.ndarray:
    missing = ~covered
    np.fill_diagonal(missing, False)
    return missing


def _relay(covered: np.ndarray, hubs: Iterable[int]) -> np.ndarray:
    hubs = sorted(set(hubs))
    if not hubs:
        return covered.copy()
    into = covered[:, hubs].astype(np.int64)
    out = covered[hubs, :].astype(np.int64)
    closed = covered | ((into @ out) > 0)
    np.fill_diagonal(closed, False)
    return closed


def pairs_under_fault(
    topology: Topology,
    cycles: Sequence[CycleRoute],
    directions: Sequence[Direction],
    failed_edge: Edge,
    mode: FaultMode = FaultMode.WHOLE_CYCLE,
    count_pass_through: bool = True,
) -> set[Pair]:
    """Directed pairs still provided after `failed_edge` goes down.

    Raises:
        UnknownEdgeError: If the edge is not in the topology.
    """
    edge = normalize_edge(*failed_edge)
    if edge not in topology.edges:
        raise UnknownEdgeError(f"edge {edge} is not a link of '{topology.name}'")
    grid, _ = _covered_grid(
        cycles, directions, topology.node_count, edge, mode, count_pass_through
    )
    return _grid_to_pairs(grid)


def used_edges(cycles: Iterable[CycleRoute]) -> list[Edge]:
    return sorted({edge for cycle in cycles for edge in cycle.edges})


def sweep_single_faults(
    topology: Topology,
    cycles: Sequence[CycleRoute],
    directions: Sequence[Direction],
    mode: FaultMode = FaultMode.WHOLE_CYCLE,
    compensation: bool = False,
    count_pass_through: bool = True,
) -> FaultReport:
    """Fail every link used by some cycle, once each, and aggregate missing pairs.

    Links no cycle uses are left out so they do not bias the mean toward zero.
    """
    if not cycles:
        raise ValueError("fault sweep needs at least one cycle")

    n = topology.node_count
    total = n * (n - 1)
    swept = used_edges(cycles)
    per_edge: dict[Edge, EdgeFault] = {}

    for edge in swept:
        covered, hubs = _covered_grid(
            cycles, directions, n, edge, mode, count_pass_through
        )
        compensated = None
        if compensation:
            compensated = int(np.count_nonzero(_missing_grid(_relay(covered, hubs))))
        per_edge[edge] = EdgeFault(
            frozenset(_grid_to_pairs(_missing_grid(covered))), compensated
        )

    counts = [fault.missing_count for fault in per_edge.values()]
    mean_missing = float(np.mean(counts))
    mean_compensated = None
    if compensation:
        mean_compensated = float(
            np.mean([fault.compensated_missing for fault in per_edge.values()])
        )

    report = FaultReport(
        per_edge=per_edge,
        mean_missing=mean_missing,
        total_pairs=total,
        coverage=1.0 - mean_missing / total,
        edges_swept=tuple(swept),
        mean_compensated_missing=mean_compensated,
    )
    logger.debug(
        f"Swept {len(swept)} used links on '{topology.name}': "
        f"mean missing {mean_missing:.3f}, coverage {fault_coverage(report):.2f}%"
    )
    return report


def fault_coverage(report: FaultReport) -> float:
    """Percent fault coverage: 100 * (1 - mean missing / total pairs)."""
    if report.total_pairs <= 0:
        raise ValueError("fault coverage needs a positive pair total")
    return 100.0 * (1.0 - report.mean_missing / report.total_pairs)


def compensated_pairs(covered: Iterable[Pair], hubs: Iterable[int]) -> set[Pair]:
    """Add pairs reachable by one O/E/O relay: (a, h) and (h, b) with h a hub."""
    covered = set(covered)
    hubs = set(hubs)
    result = set(covered)
    outgoing: dict[int, set[int]] = {}
    for a, b in covered:
        outgoing.setdefault(a, set()).add(b)
    for a, h in covered:
        if h not in hubs:
            continue
        for b in outgoing.get(h, ()):
            if b != a:
                result.add((a, b))
    return result


def fault_free_compensated_missing(
    topology: Topology,
    cycles: Sequence[CycleRoute],
    directions: Sequence[Direction],
    count_pass_through: bool = True,
) -> int:
    """Missing pairs left after hub relays with no link down."""
    covered, hubs = _covered_grid(
        cycles,
        directions,
        topology.node_count,
        None,
        FaultMode.WHOLE_CYCLE,
        count_pass_through,
    )
    return int(np.count_nonzero(_missing_grid(_relay(covered, hubs))))
