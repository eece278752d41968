"""Quorum cycle routing: one closed, edge-simple walk per quorum.

The router stands in for a close-to-optimal cycle heuristic that is not
reproduced here. It orders members by nearest-neighbor hop distance from
the hub, joins consecutive members with shortest paths that avoid links
already on the walk, closes back to the hub, then cuts out loops that
visit no otherwise-missing member. When every ordering fails it falls back
to a bounded backtracking search over closed trails.
"""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache

import networkx as nx

from qcycle.services.quorum import QuorumSet
from qcycle.services.topology import Edge, Topology, edges_of_walk, normalize_edge

logger = logging.getLogger(__name__)

# Backtracking states explored before giving up on a member set
DEFAULT_ROUTE_BUDGET = 200_000


class Direction(str, Enum):
    """Traversal direction of a unidirectional cycle."""

    FORWARD = "F"
    BACKWARD = "B"

    def flipped(self) -> "Direction":
        return Direction.BACKWARD if self is Direction.FORWARD else Direction.FORWARD


class RoutingError(RuntimeError):
    """A quorum could not be routed as a cycle."""

    def __init__(self, message: str, quorum_index: int | None = None):
        self.reason = message
        self.quorum_index = quorum_index
        super().__init__(self._render())

    def _render(self) -> str:
        if self.quorum_index is None:
            return self.reason
        return f"quorum {self.quorum_index}: {self.reason}"

    def annotate(self, quorum_index: int) -> "RoutingError":
        self.quorum_index = quorum_index
        self.args = (self._render(),)
        return self


class RoutingInfeasibleError(RoutingError):
    """No edge-simple closed walk covers the members (or the search gave up)."""


class DisconnectedMembersError(RoutingError):
    """Some members are unreachable from the hub."""


@dataclass(frozen=True)
class CycleRoute:
    """Closed walk [hub, v1, ..., hub] carrying one quorum."""

    quorum_index: int
    hub: int
    walk: tuple[int, ...]
    members: frozenset[int]
    direction: Direction = Direction.FORWARD

    def __post_init__(self) -> None:
        if len(self.walk) < 3:
            raise ValueError(f"walk {list(self.walk)} is shorter than 3 entries")
        if self.walk[0] != self.hub or self.walk[-1] != self.hub:
            raise ValueError(f"walk {list(self.walk)} must start and end at {self.hub}")

    @property
    def edges(self) -> list[Edge]:
        return edges_of_walk(self.walk)

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset(self.walk)

    @property
    def link_count(self) -> int:
        return len(self.walk) - 1

    def traversal(self, direction: Direction | None = None) -> tuple[int, ...]:
        """Walk in the order the light travels for the given direction."""
        direction = direction or self.direction
        return self.walk if direction is Direction.FORWARD else self.walk[::-1]

    def with_direction(self, direction: Direction) -> "CycleRoute":
        return replace(self, direction=direction)


def validate_route(topology: Topology, route: CycleRoute) -> list[str]:
    """List every cycle invariant the route violates (empty when valid)."""
    problems = []
    walk = route.walk
    if walk[0] != route.hub or walk[-1] != route.hub:
        problems.append("walk does not start and end at the hub")
    if len(walk) < 3 or len(set(walk)) < 2:
        problems.append("walk has fewer than 2 distinct nodes")
    edges = route.edges
    if len(edges) != len(set(edges)):
        problems.append("walk reuses an undirected edge")
    missing = route.members - set(walk)
    if missing:
        problems.append(f"members {sorted(missing)} not on walk")
    off_topology = [e for e in edges if e not in topology.edges]
    if off_topology:
        problems.append(f"walk steps {off_topology} are not topology edges")
    return problems


@lru_cache(maxsize=16)
def _hop_distances(topology: Topology) -> dict[int, dict[int, int]]:
    return dict(nx.all_pairs_shortest_path_length(topology.graph))


def _nearest_chain(
    dist: dict[int, dict[int, int]], first: int, remaining: Iterable[int]
) -> list[int]:
    order = [first]
    left = set(remaining) - {first}
    current = first
    while left:
        current = min(left, key=lambda m: (dist[current][m], m))
        order.append(current)
        left.remove(current)
    return order


def _orderings(
    topology: Topology, members: frozenset[int], hub: int
) -> list[list[int]]:
    """Nearest-member chains from every start, each followed by its reverse."""
    dist = _hop_distances(topology)
    others = sorted(members - {hub}, key=lambda m: (dist[hub][m], m))
    candidates = []
    for first in others:
        chain = _nearest_chain(dist, first, others)
        candidates.append(chain)
        candidates.append(chain[::-1])

    unique = []
    for order in candidates:
        if order not in unique:
            unique.append(order)
    return unique


def _path_avoiding(
    topology: Topology, source: int, target: int, used: set[Edge]
) -> list[int] | None:
    hidden = [*used, *((v, u) for u, v in used)]
    view = nx.restricted_view(topology.graph, [], hidden)
    try:
        return nx.shortest_path(view, source, target)
    except nx.NetworkXNoPath:
        return None


def _chain_walk(topology: Topology, hub: int, order: Sequence[int]) -> list[int] | None:
    walk = [hub]
    used: set[Edge] = set()
    for target in [*order, hub]:
        if target != hub and target in walk:
            continue
        path = _path_avoiding(topology, walk[-1], target, used)
        if path is None:
            return None
        used.update(edges_of_walk(path))
        walk.extend(path[1:])
    return walk


def _remove_detours(walk: list[int], members: frozenset[int]) -> list[int]:
    """Cut closed sub-walks whose removal keeps every member on the walk."""
    last = len(walk) - 1
    changed = True
    while changed:
        changed = False
        for p in range(len(walk)):
            for q in range(len(walk) - 1, p, -1):
                if walk[p] != walk[q] or (p == 0 and q == last):
                    continue
                shorter = walk[: p + 1] + walk[q + 1 :]
                if members <= set(shorter):
                    walk = shorter
                    last = len(walk) - 1
                    changed = True
                    break
            if changed:
                break
    return walk


def _splits_across_bridge(
    topology: Topology, members: frozenset[int], hub: int
) -> Edge | None:
    graph = topology.graph
    for u, v in nx.bridges(graph):
        view = nx.restricted_view(graph, [], [(u, v), (v, u)])
        side = nx.node_connected_component(view, hub)
        if not members <= side:
            return normalize_edge(u, v)
    return None


class _TrailSearch:
    """Depth-first search over closed trails from the hub, lowest neighbor first."""

    def __init__(
        self, topology: Topology, hub: int, members: frozenset[int], budget: int
    ):
        self.topology = topology
        self.hub = hub
        self.members = members
        self.budget = budget
        self.expanded = 0
        self.used: set[Edge] = set()
        self.walk = [hub]

    def _can_finish(self, node: int, uncovered: set[int]) -> bool:
        hidden = [*self.used, *((v, u) for u, v in self.used)]
        view = nx.restricted_view(self.topology.graph, [], hidden)
        reachable = nx.node_connected_component(view, node)
        return self.hub in reachable and uncovered <= reachable

    def run(self) -> list[int] | None:
        return self._extend(self.hub, set(self.members - {self.hub}))

    def _extend(self, node: int, uncovered: set[int]) -> list[int] | None:
        self.expanded += 1
        if self.expanded > self.budget:
            raise RoutingInfeasibleError(
                f"trail search budget of {self.budget} states exhausted"
            )
        if node == self.hub and len(self.walk) > 1 and not uncovered:
            return list(self.walk)
        if not self._can_finish(node, uncovered):
            return None

        for nxt in self.topology.neighbors(node):
            edge = normalize_edge(node, nxt)
            if edge in self.used:
                continue
            self.used.add(edge)
            self.walk.append(nxt)
            newly = nxt in uncovered
            if newly:
                uncovered.discard(nxt)
            found = self._extend(nxt, uncovered)
            if found is not None:
                return found
            if newly:
                uncovered.add(nxt)
            self.walk.pop()
            self.used.discard(edge)
        return None


def route_cycle(
    topology: Topology,
    members: Iterable[int],
    hub: int,
    quorum_index: int = 0,
    budget: int = DEFAULT_ROUTE_BUDGET,
) -> CycleRoute:
    """Route an edge-simple closed walk from `hub` through every member.

    Raises:
        ValueError: If the hub is not a member or fewer than 2 members are given.
        DisconnectedMembersError: If a member is unreachable from the hub.
        RoutingInfeasibleError: If no closed trail covers the members.
    """
    members = frozenset(members)
    if hub not in members:
        raise ValueError(f"hub {hub} is not a quorum member")
    if len(members) < 2:
        raise ValueError("a cycle needs at least 2 members")

    component = nx.node_connected_component(topology.graph, hub)
    unreachable = members - component
    if unreachable:
        raise DisconnectedMembersError(
            f"members {sorted(unreachable)} unreachable from hub {hub}"
        )
    bridge = _splits_across_bridge(topology, members, hub)
    if bridge is not None:
        raise RoutingInfeasibleError(f"members straddle bridge {bridge}")

    for attempt, order in enumerate(_orderings(topology, members, hub)):
        walk = _chain_walk(topology, hub, order)
        if walk is not None:
            if attempt:
                logger.debug(f"Quorum {quorum_index} routed on ordering #{attempt}")
            walk = _remove_detours(walk, members)
            return CycleRoute(quorum_index, hub, tuple(walk), members)

    logger.debug(f"Quorum {quorum_index}: greedy orderings failed, searching trails")
    walk = _TrailSearch(topology, hub, members, budget).run()
    if walk is None:
        raise RoutingInfeasibleError(
            f"no edge-simple closed walk through {sorted(members)}"
        )
    walk = _remove_detours(walk, members)
    return CycleRoute(quorum_index, hub, tuple(walk), members)


def route_all(
    topology: Topology, quorum_set: QuorumSet, budget: int = DEFAULT_ROUTE_BUDGET
) -> list[CycleRoute]:
    """Route every quorum; cycle i is hubbed at the rotated first base member.

    Raises:
        RoutingError: The first per-quorum failure, annotated with its index.
    """
    routes = []
    for index, quorum in enumerate(quorum_set.quorums):
        try:
            routes.append(
                route_cycle(topology, quorum, quorum_set.hub(index), index, budget)
            )
        except RoutingError as e:
            raise e.annotate(index) from None
    logger.debug(
        f"Routed {len(routes)} cycles on '{topology.name}' "
        f"using {links_used(routes, paired=False)} links"
    )
    return routes


def links_used(cycles: Sequence[CycleRoute], paired: bool = False) -> int:
    """Links consumed by the cycles; paired cycles also pay for their reverse twin."""
    total = sum(c.link_count for c in cycles)
    return 2 * total if paired else total


def dump_cycles(cycles: Sequence[CycleRoute]) -> str:
    lines = (
        f"{c.quorum_index} {c.hub}: {' '.join(str(v) for v in c.walk)}" for c in cycles
    )
    return "".join(line + "\n" for line in lines)
