"""Cycle direction assignment: directed pair formation and greedy heuristics.

A unidirectional cycle broken at its hub is a bus from the hub back to the
hub. A node transmits from any of its taps and receives at any later tap,
so (a, b) is formed iff a's first position precedes b's last position.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from qcycle.services.routing import CycleRoute, Direction

logger = logging.getLogger(__name__)

Pair = tuple[int, int]
StepObserver = Callable[[int, Sequence[Direction], "PairCoverage"], None]


class CoverageMismatchError(RuntimeError):
    """Pair coverage disagrees with a rebuild from the current directions."""


class EmptySolutionError(ValueError):
    """Direction assignment requested for an empty cycle list."""


def _first_last(traversal: Sequence[int]) -> tuple[dict[int, int], dict[int, int]]:
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    for pos, node in enumerate(traversal):
        first.setdefault(node, pos)
        last[node] = pos
    return first, last


def _participants(cycle: CycleRoute, count_pass_through: bool) -> list[int]:
    nodes = cycle.nodes if count_pass_through else cycle.nodes & cycle.members
    return sorted(nodes)


def ordered_pairs(
    cycle: CycleRoute,
    direction: Direction | None = None,
    count_pass_through: bool = True,
) -> set[Pair]:
    """Directed pairs (a, b) the cycle carries when lit in `direction`."""
    first, last = _first_last(cycle.traversal(direction))
    nodes = _participants(cycle, count_pass_through)
    return {(a, b) for a in nodes for b in nodes if a != b and first[a] < last[b]}


def pair_mask(
    cycle: CycleRoute,
    direction: Direction,
    n: int,
    count_pass_through: bool = True,
) -> np.ndarray:
    """Boolean n x n grid of ordered_pairs(cycle, direction)."""
    first, last = _first_last(cycle.traversal(direction))
    nodes = _participants(cycle, count_pass_through)
    idx = np.array(nodes, dtype=np.int64)
    f = np.array([first[v] for v in nodes])
    lst = np.array([last[v] for v in nodes])
    mask = np.zeros((n, n), dtype=bool)
    mask[np.ix_(idx, idx)] = f[:, None] < lst[None, :]
    np.fill_diagonal(mask, False)
    return mask


@dataclass
class CycleMasks:
    """Pair grids for both directions of every cycle, computed once."""

    n: int
    forward: list[np.ndarray]
    backward: list[np.ndarray]

    @classmethod
    def build(
        cls, cycles: Sequence[CycleRoute], n: int, count_pass_through: bool = True
    ) -> "CycleMasks":
        return cls(
            n,
            [pair_mask(c, Direction.FORWARD, n, count_pass_through) for c in cycles],
            [pair_mask(c, Direction.BACKWARD, n, count_pass_through) for c in cycles],
        )

    def __len__(self) -> int:
        return len(self.forward)

    def get(self, index: int, direction: Direction) -> np.ndarray:
        if direction is Direction.FORWARD:
            return self.forward[index]
        return self.backward[index]


@dataclass
class PairCoverage:
    """counts[i][j]: cycles currently providing i -> j (diagonal always 0)."""

    n: int
    counts: np.ndarray

    @classmethod
    def empty(cls, n: int) -> "PairCoverage":
        return cls(n, np.zeros((n, n), dtype=np.int64))

    @classmethod
    def rebuild(
        cls, masks: CycleMasks, directions: Sequence[Direction]
    ) -> "PairCoverage":
        pc = cls.empty(masks.n)
        for index, direction in enumerate(directions):
            pc.add(masks.get(index, direction))
        return pc

    def copy(self) -> "PairCoverage":
        return PairCoverage(self.n, self.counts.copy())

    def new_pairs(self, mask: np.ndarray) -> int:
        """Pairs in `mask` that would go from uncovered to covered."""
        return int(np.count_nonzero(mask & (self.counts == 0)))

    def add(self, mask: np.ndarray) -> None:
        self.counts += mask

    def remove(self, mask: np.ndarray) -> None:
        self.counts -= mask
        if (self.counts < 0).any():
            raise CoverageMismatchError("pair count went negative on removal")

    def covered(self) -> np.ndarray:
        return self.counts > 0

    def missing_count(self) -> int:
        return self.n * (self.n - 1) - int(np.count_nonzero(self.counts))

    def matches(self, other: "PairCoverage") -> bool:
        return self.n == other.n and np.array_equal(self.counts, other.counts)


@dataclass(frozen=True)
class DirectionAssignment:
    directions: tuple[Direction, ...]
    missing: frozenset[Pair]
    passes: int = field(default=0, compare=False)

    @property
    def missing_count(self) -> int:
        return len(self.missing)


def missing_pairs(pc: PairCoverage, universe: int | None = None) -> set[Pair]:
    """Directed pairs (i, j), i != j, that no cycle provides."""
    n = pc.n if universe is None else universe
    zero = pc.counts[:n, :n] == 0
    np.fill_diagonal(zero, False)
    return {(int(i), int(j)) for i, j in np.argwhere(zero)}


def missing_fraction(missing: set[Pair] | frozenset[Pair], n: int) -> float:
    return len(missing) / (n * (n - 1))


def _assignment(
    directions: Sequence[Direction], pc: PairCoverage, passes: int = 0
) -> DirectionAssignment:
    return DirectionAssignment(tuple(directions), frozenset(missing_pairs(pc)), passes)


def _require_cycles(cycles: Sequence[CycleRoute]) -> None:
    if not cycles:
        raise EmptySolutionError("no cycles to assign directions to")


def initial_cycle_direction(
    cycles: Sequence[CycleRoute],
    n: int,
    count_pass_through: bool = True,
    observer: StepObserver | None = None,
    masks: CycleMasks | None = None,
) -> tuple[DirectionAssignment, PairCoverage]:
    """Choose each cycle's first direction greedily, in cycle order.

    Forward wins ties. All pairs of the chosen direction are counted,
    including ones that were already covered.
    """
    _require_cycles(cycles)
    masks = masks or CycleMasks.build(cycles, n, count_pass_through)
    pc = PairCoverage.empty(n)
    directions: list[Direction] = []

    for index in range(len(cycles)):
        forward = masks.get(index, Direction.FORWARD)
        backward = masks.get(index, Direction.BACKWARD)
        if pc.new_pairs(forward) >= pc.new_pairs(backward):
            directions.append(Direction.FORWARD)
            pc.add(forward)
        else:
            directions.append(Direction.BACKWARD)
            pc.add(backward)
        if observer:
            observer(index, directions, pc)

    assignment = _assignment(directions, pc)
    logger.debug(f"Initial directions leave {assignment.missing_count} pairs missing")
    return assignment, pc


def greedy_update_cycle_direction(
    cycles: Sequence[CycleRoute],
    assignment: DirectionAssignment,
    pc: PairCoverage,
    count_pass_through: bool = True,
    observer: StepObserver | None = None,
    masks: CycleMasks | None = None,
) -> DirectionAssignment:
    """Flip single cycles while a flip strictly reduces missing pairs.

    Passes run over all cycles in index order until one makes no change;
    ties keep the current direction. `pc` is updated in place.

    Raises:
        CoverageMismatchError: If `pc` does not match a rebuild from `assignment`.
    """
    _require_cycles(cycles)
    masks = masks or CycleMasks.build(cycles, pc.n, count_pass_through)
    if not pc.matches(PairCoverage.rebuild(masks, assignment.directions)):
        raise CoverageMismatchError("pair coverage does not match the assignment")

    directions = list(assignment.directions)
    passes = 0
    step = 0
    changed = True
    while changed:
        changed = False
        passes += 1
        for index, current in enumerate(directions):
            pc.remove(masks.get(index, current))
            forward = pc.new_pairs(masks.get(index, Direction.FORWARD))
            backward = pc.new_pairs(masks.get(index, Direction.BACKWARD))
            if forward > backward:
                chosen = Direction.FORWARD
            elif backward > forward:
                chosen = Direction.BACKWARD
            else:
                chosen = current
            pc.add(masks.get(index, chosen))
            if chosen is not current:
                directions[index] = chosen
                changed = True
            if observer:
                observer(step, directions, pc)
            step += 1

    result = _assignment(directions, pc, passes)
    logger.debug(
        f"Greedy update: {assignment.missing_count} -> {result.missing_count} "
        f"missing pairs in {passes} passes"
    )
    return result


def _fixed(
    cycles: Sequence[CycleRoute],
    directions: Sequence[Direction],
    n: int,
    count_pass_through: bool,
) -> DirectionAssignment:
    masks = CycleMasks.build(cycles, n, count_pass_through)
    return _assignment(directions, PairCoverage.rebuild(masks, directions))


def assign_forward(
    cycles: Sequence[CycleRoute], n: int, count_pass_through: bool = True
) -> DirectionAssignment:
    """Baseline: every cycle lit in its routed (forward) order."""
    _require_cycles(cycles)
    return _fixed(cycles, [Direction.FORWARD] * len(cycles), n, count_pass_through)


def assign_random(
    cycles: Sequence[CycleRoute], n: int, seed: int, count_pass_through: bool = True
) -> DirectionAssignment:
    """Baseline: an independent fair coin per cycle from a seeded generator."""
    _require_cycles(cycles)
    coins = np.random.default_rng(seed).integers(0, 2, size=len(cycles))
    directions = [Direction.FORWARD if c == 0 else Direction.BACKWARD for c in coins]
    return _fixed(cycles, directions, n, count_pass_through)


def assignment_from_routes(
    cycles: Sequence[CycleRoute], n: int, count_pass_through: bool = True
) -> DirectionAssignment:
    """Assignment taking each route's own direction flag."""
    _require_cycles(cycles)
    return _fixed(cycles, [c.direction for c in cycles], n, count_pass_through)


def expand_paired(cycles: Sequence[CycleRoute]) -> list[CycleRoute]:
    """Each cycle followed by its reversed twin."""
    expanded = []
    for cycle in cycles:
        expanded.append(cycle.with_direction(Direction.FORWARD))
        expanded.append(cycle.with_direction(Direction.BACKWARD))
    return expanded


def dump_directions(assignment: DirectionAssignment) -> str:
    return "".join(f"{i} {d.value}\n" for i, d in enumerate(assignment.directions))


def dump_missing_pairs(missing: set[Pair] | frozenset[Pair]) -> str:
    return "".join(f"{i} {j}\n" for i, j in sorted(missing))
