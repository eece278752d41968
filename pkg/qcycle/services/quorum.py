"""Cyclic quorum sets: rotation, difference profiles, R-redundant base search."""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

QUORUMS_DIR = Path(__file__).parent.parent.parent / "data" / "quorums"

# Moves allowed on a plateau before the hill climber restarts
PLATEAU_LIMIT = 50


class SearchStrategy(str, Enum):
    EXHAUSTIVE = "exhaustive"
    RANDOMIZED = "randomized"


class QuorumInfeasibleError(ValueError):
    """No base of any size can reach the requested redundancy."""


class SearchBudgetExhausted(RuntimeError):
    """Randomized search ran out of iterations before finding a verified base."""


class BaseFileError(ValueError):
    """Malformed or unverifiable line in a base-set file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class QuorumBase:
    """Base quorum S_0 in Z_n that every other quorum is a rotation of."""

    n: int
    members: tuple[int, ...]
    redundancy: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"population size must be positive, got {self.n}")
        if self.redundancy < 1:
            raise ValueError(f"redundancy must be at least 1, got {self.redundancy}")
        if not self.members:
            raise ValueError("base must have at least one member")
        if any(x < 0 or x >= self.n for x in self.members):
            raise ValueError(f"base members must lie in [0, {self.n})")
        if list(self.members) != sorted(set(self.members)):
            raise ValueError("base members must be strictly increasing")

    @classmethod
    def of(cls, n: int, members: Iterable[int], redundancy: int = 1) -> "QuorumBase":
        return cls(n, tuple(sorted({x % n for x in members})), redundancy)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def verified(self) -> bool:
        return verify_redundancy(self)

    def translate(self, offset: int) -> "QuorumBase":
        rotated = rotate_quorum(self, offset % self.n)
        return QuorumBase.of(self.n, rotated, self.redundancy)


@dataclass(frozen=True)
class QuorumSet:
    """All n rotations of a base; quorums[i] is the base shifted by i."""

    base: QuorumBase
    quorums: tuple[frozenset[int], ...]

    @property
    def n(self) -> int:
        return self.base.n

    def hub(self, index: int) -> int:
        """Hub of quorum `index`: the rotated image of the base's first member."""
        return (self.base.members[0] + index) % self.base.n


@dataclass(frozen=True)
class DifferenceProfile:
    """Multiplicity lambda(d) of every nonzero difference d among base members."""

    n: int
    counts: tuple[int, ...]  # index d = 0..n-1, counts[0] unused

    def __getitem__(self, d: int) -> int:
        if not 1 <= d < self.n:
            raise KeyError(d)
        return self.counts[d]

    def as_dict(self) -> dict[int, int]:
        return {d: self.counts[d] for d in range(1, self.n)}

    @property
    def minimum(self) -> int:
        return min(self.counts[1:], default=0)

    @property
    def total(self) -> int:
        return sum(self.counts[1:])


def rotate_quorum(base: QuorumBase, i: int) -> frozenset[int]:
    """Quorum i of the cyclic set: {(x + i) mod n : x in base}.

    Raises:
        ValueError: If i is outside [0, n).
    """
    if not 0 <= i < base.n:
        raise ValueError(f"rotation index {i} outside [0, {base.n})")
    return frozenset((x + i) % base.n for x in base.members)


def build_quorum_set(base: QuorumBase) -> QuorumSet:
    return QuorumSet(base, tuple(rotate_quorum(base, i) for i in range(base.n)))


def _difference_counts(members: Iterable[int], n: int) -> np.ndarray:
    arr = np.fromiter(members, dtype=np.int64)
    diffs = (arr[:, None] - arr[None, :]) % n
    counts = np.bincount(diffs.ravel(), minlength=n)
    counts[0] = 0  # x == y pairs
    return counts


def difference_multiplicity(members: Iterable[int], n: int) -> DifferenceProfile:
    """Count ordered member pairs (x, y), x != y, by their difference (x - y) mod n."""
    members = list(members)
    if not members:
        raise ValueError("members must be non-empty")
    if any(x < 0 or x >= n for x in members):
        raise ValueError(f"members must lie in [0, {n})")
    counts = _difference_counts(members, n)
    return DifferenceProfile(n, tuple(int(c) for c in counts))


def verify_redundancy(base: QuorumBase) -> bool:
    """True iff every node pair co-occurs in at least `redundancy` rotations."""
    if base.n == 1:
        return True
    return difference_multiplicity(base.members, base.n).minimum >= base.redundancy


def pair_occurrences(quorum_set: QuorumSet) -> np.ndarray:
    """Brute-force n x n grid of how many quorums hold each unordered pair."""
    n = quorum_set.n
    grid = np.zeros((n, n), dtype=np.int64)
    for quorum in quorum_set.quorums:
        idx = np.fromiter(sorted(quorum), dtype=np.int64)
        grid[np.ix_(idx, idx)] += 1
    np.fill_diagonal(grid, 0)
    return grid


def pair_count(k: int) -> int:
    """Pairs within one quorum of size k."""
    if k < 0:
        raise ValueError(f"quorum size must be nonnegative, got {k}")
    return k * (k - 1) // 2


def total_pair_count(n: int, k: int) -> int:
    """Pairs formed across all n quorums of size k (counted with multiplicity)."""
    if n < 1:
        raise ValueError(f"population size must be positive, got {n}")
    return n * pair_count(k)


def sizing_estimate(k: int, r: int) -> int:
    """ceil(sqrt(r) * k): growth estimate of the redundant quorum size."""
    if k < 1 or r < 1:
        raise ValueError("k and r must both be at least 1")
    target = r * k * k
    root = math.isqrt(target)
    return root if root * root == target else root + 1


def lower_bound_size(n: int, r: int) -> int:
    """Smallest size whose ordered pairs can cover every difference r times.

    Raises:
        QuorumInfeasibleError: If no size up to n qualifies (r > n).
    """
    if r > n:
        raise QuorumInfeasibleError(
            f"redundancy {r} exceeds N={n}: even the full residue set has "
            f"lambda(d) = {n} for every difference"
        )
    need = r * (n - 1)
    k = 1
    while k * (k - 1) < need:
        k += 1
    return k


def _covers(members: tuple[int, ...], n: int, r: int, counts: list[int]) -> bool:
    for i in range(1, n):
        counts[i] = 0
    for x in members:
        for y in members:
            if x != y:
                counts[(x - y) % n] += 1
    return all(counts[d] >= r for d in range(1, n))


def _exhaustive(n: int, r: int, start: int) -> QuorumBase:
    scratch = [0] * n
    for size in range(start, n + 1):
        tried = 0
        for rest in combinations(range(1, n), size - 1):
            tried += 1
            members = (0, *rest)
            if _covers(members, n, r, scratch):
                logger.debug(f"N={n} R={r}: size {size} verified after {tried} subsets")
                return QuorumBase(n, members, r)
        logger.debug(f"N={n} R={r}: no base of size {size} ({tried} subsets)")
    # Unreachable when r <= n: the full residue set always verifies
    raise QuorumInfeasibleError(f"no base verifies N={n} at R={r}")


class _HillClimber:
    """Single-swap local search minimizing sum_d max(0, r - lambda(d))."""

    def __init__(self, n: int, r: int, size: int, rng: np.random.Generator):
        self.n = n
        self.r = r
        self.size = size
        self.rng = rng

    def _histograms(self, points: np.ndarray, members: np.ndarray) -> np.ndarray:
        # Row p counts (p - b) and (b - p) mod n over b in members
        diffs = (points[:, None] - members[None, :]) % self.n
        rows = np.zeros((len(points), self.n), dtype=np.int64)
        row_idx = np.broadcast_to(np.arange(len(points))[:, None], diffs.shape)
        np.add.at(rows, (row_idx, diffs), 1)
        np.add.at(rows, (row_idx, (-diffs) % self.n), 1)
        return rows

    def _deficit(self, lam: np.ndarray) -> np.ndarray:
        return np.maximum(0, self.r - lam[..., 1:]).sum(axis=-1)

    def run(self, moves: int) -> tuple[tuple[int, ...] | None, int]:
        """Climb from a random start; returns (members or None, moves used)."""
        n = self.n
        members = np.sort(self.rng.choice(n, size=self.size, replace=False))
        lam = _difference_counts(members.tolist(), n)
        current = int(self._deficit(lam))
        used = 0
        plateau = 0

        while current > 0 and used < moves:
            used += 1
            outside = np.setdiff1d(np.arange(n), members, assume_unique=True)
            if len(outside) == 0:
                break
            remove = self._histograms(members, members)
            add = self._histograms(outside, members)
            # lambda after swapping members[a] out and outside[b] in
            cand = lam[None, None, :] - remove[:, None, :] + add[None, :, :]
            cross = (outside[None, :] - members[:, None]) % n
            a_idx, b_idx = np.indices(cross.shape)
            np.subtract.at(cand, (a_idx, b_idx, cross), 1)
            np.subtract.at(cand, (a_idx, b_idx, (-cross) % n), 1)
            cand[..., 0] = 0

            scores = self._deficit(cand)
            best = int(scores.min())
            if best > current or (best == current and plateau >= PLATEAU_LIMIT):
                break
            plateau = plateau + 1 if best == current else 0

            choices = np.argwhere(scores == best)
            a, b = choices[self.rng.integers(len(choices))]
            members = np.sort(np.append(np.delete(members, a), outside[b]))
            lam = cand[a, b].copy()
            current = best

        if current == 0:
            return tuple(int(x) for x in members), used
        return None, used


def _randomized(n: int, r: int, start: int, seed: int, budget: int) -> QuorumBase:
    rng = np.random.default_rng(seed)
    per_size = max(1, budget // 4)
    spent = 0

    for size in range(start, n + 1):
        if size == n:
            return QuorumBase(n, tuple(range(n)), r)
        size_spent = 0
        climber = _HillClimber(n, r, size, rng)
        while size_spent < per_size and spent < budget:
            allowance = min(per_size - size_spent, budget - spent)
            members, used = climber.run(allowance)
            used = max(used, 1)
            size_spent += used
            spent += used
            if members is not None:
                # Canonical form: translate so residue 0 is a member
                base = QuorumBase.of(n, members, r).translate(-members[0])
                logger.debug(f"N={n} R={r}: size {size} found after {spent} moves")
                return base
        if spent >= budget:
            break
        logger.debug(f"N={n} R={r}: size {size} not found in {size_spent} moves")

    raise SearchBudgetExhausted(
        f"no verified base for N={n} R={r} within {budget} iterations"
    )


def find_min_redundant_base(
    n: int,
    r: int,
    strategy: SearchStrategy | str = SearchStrategy.EXHAUSTIVE,
    seed: int = 0,
    budget: int = 20000,
) -> QuorumBase:
    """Search for a smallest base whose rotations hold every pair r times.

    The exhaustive strategy fixes residue 0 in the base and walks subsets in
    lexicographic order from the counting lower bound upward, so the first
    hit is a certified minimum. The randomized strategy restarts single-swap
    hill climbing at each size from the same bound and returns the first
    verified base it meets.

    Raises:
        ValueError: If n < 3 or r < 1.
        QuorumInfeasibleError: If r > n.
        SearchBudgetExhausted: If the randomized search runs out of budget.
    """
    if n < 3:
        raise ValueError(f"population size must be at least 3, got {n}")
    if r < 1:
        raise ValueError(f"redundancy must be at least 1, got {r}")
    strategy = SearchStrategy(strategy)

    start = lower_bound_size(n, r)
    logger.debug(f"N={n} R={r}: counting bound {start}, search {strategy.value}")
    if strategy is SearchStrategy.EXHAUSTIVE:
        base = _exhaustive(n, r, start)
    else:
        base = _randomized(n, r, start, seed, budget)

    logger.info(f"Found base for N={n} R={r}: size {base.size} {list(base.members)}")
    return base


def load_bases(text: str) -> list[QuorumBase]:
    """Parse "N R k m_0 ... m_{k-1}" lines, re-verifying every entry.

    Raises:
        BaseFileError: If a line is malformed or its base does not verify.
    """
    bases = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values = [int(x) for x in line.split()]
        except ValueError:
            raise BaseFileError(f"non-integer field in '{line}'", line_no) from None
        if len(values) < 4:
            raise BaseFileError(f"expected 'N R k members...', got '{line}'", line_no)

        n, r, k, *members = values
        if len(members) != k:
            raise BaseFileError(
                f"declared size {k} but {len(members)} members", line_no
            )
        try:
            base = QuorumBase(n, tuple(members), r)
        except ValueError as e:
            raise BaseFileError(str(e), line_no) from None
        if not verify_redundancy(base):
            raise BaseFileError(
                f"base {members} does not verify N={n} at R={r}", line_no
            )
        bases.append(base)
    return bases


def load_bases_file(path: Path | str) -> list[QuorumBase]:
    path = Path(path)
    bases = load_bases(path.read_text())
    logger.info(f"Loaded {len(bases)} verified bases from {path.name}")
    return bases


def serialize_bases(bases: Iterable[QuorumBase]) -> str:
    return "".join(format_base(base) + "\n" for base in bases)


def format_base(base: QuorumBase) -> str:
    members = " ".join(str(x) for x in base.members)
    return f"{base.n} {base.redundancy} {base.size} {members}"


def lookup_base(bases: Iterable[QuorumBase], n: int, r: int) -> QuorumBase | None:
    """Smallest listed base for population n with redundancy at least r."""
    matches = [b for b in bases if b.n == n and b.redundancy >= r]
    if not matches:
        return None
    best = min(matches, key=lambda b: (b.size, b.redundancy, b.members))
    return QuorumBase(n, best.members, r)

