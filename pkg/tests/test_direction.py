"""Tests for directed pair formation and the direction heuristics."""

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcycle.services.direction import (
    CoverageMismatchError,
    CycleMasks,
    DirectionAssignment,
    EmptySolutionError,
    PairCoverage,
    assign_forward,
    assign_random,
    dump_directions,
    dump_missing_pairs,
    expand_paired,
    greedy_update_cycle_direction,
    initial_cycle_direction,
    missing_fraction,
    missing_pairs,
    ordered_pairs,
)
from qcycle.services.routing import CycleRoute, Direction, links_used

F = Direction.FORWARD
B = Direction.BACKWARD


def cycle(walk, index=0, members=None) -> CycleRoute:
    return CycleRoute(
        index, walk[0], tuple(walk), frozenset(walk if members is None else members)
    )


def all_pairs(nodes):
    return {(a, b) for a in nodes for b in nodes if a != b}


def exhaustive_missing(cycles, n) -> int:
    """Fewest missing pairs over every direction combination."""
    universe = all_pairs(range(n))
    options = [(ordered_pairs(c, F), ordered_pairs(c, B)) for c in cycles]
    best = len(universe)
    for combo in product((0, 1), repeat=len(cycles)):
        covered = set()
        for pairs, pick in zip(options, combo, strict=True):
            covered |= pairs[pick]
        best = min(best, len(universe - covered))
    return best


walks = st.integers(min_value=2, max_value=8).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.integers(0, n - 1),
        st.lists(st.integers(0, n - 1), min_size=1, max_size=12),
    )
)


def random_instance(rng: np.random.Generator, n: int, count: int) -> list[CycleRoute]:
    cycles = []
    for index in range(count):
        k = int(rng.integers(2, n + 1))
        nodes = [int(x) for x in rng.choice(n, size=k, replace=False)]
        cycles.append(cycle([*nodes, nodes[0]], index))
    return cycles


class TestOrderedPairs:
    """Test the pairs a lit cycle carries."""

    def test_triangle_forward(self):
        assert ordered_pairs(cycle([0, 1, 2, 0]), F) == all_pairs({0, 1, 2}) - {(2, 1)}

    def test_triangle_backward(self):
        assert ordered_pairs(cycle([0, 1, 2, 0]), B) == all_pairs({0, 1, 2}) - {(1, 2)}

    def test_two_node_cycle(self):
        for d in (F, B):
            assert ordered_pairs(cycle([0, 1, 0]), d) == {(0, 1), (1, 0)}

    def test_repeated_node_uses_best_taps(self):
        """A node visited twice sends from its first tap and receives at its last."""
        pairs = ordered_pairs(cycle([0, 1, 2, 1, 3, 0]), F)
        assert (2, 1) in pairs
        assert (3, 2) not in pairs

    def test_pass_through_toggle(self):
        """Excluding pass-through nodes keeps only member pairs."""
        c = cycle([0, 1, 2, 3, 0], members={0, 2})
        assert ordered_pairs(c, F, count_pass_through=False) == {(0, 2), (2, 0)}
        assert (1, 3) in ordered_pairs(c, F)

    @given(walks)
    @settings(max_examples=500, deadline=None)
    def test_directions_complement(self, drawn):
        """Forward and backward together carry every pair on the walk."""
        _, hub, middle = drawn
        c = cycle([hub, *middle, hub])
        union = ordered_pairs(c, F) | ordered_pairs(c, B)
        assert union == all_pairs(set(c.walk))

    @given(st.integers(min_value=2, max_value=12))
    def test_simple_cycle_closed_form(self, k):
        """A simple cycle on k nodes misses (k-1)(k-2)/2 pairs per direction."""
        c = cycle([*range(k), 0])
        for d in (F, B):
            pairs = ordered_pairs(c, d)
            assert len(pairs) == 2 * (k - 1) + (k - 1) * (k - 2) // 2
            assert len(all_pairs(range(k)) - pairs) == (k - 1) * (k - 2) // 2


class TestInitialCycleDirection:
    """Test greedy first-direction choice."""

    def test_single_triangle_ties_forward(self):
        assignment, pc = initial_cycle_direction([cycle([0, 1, 2, 0])], 3)
        assert assignment.directions == (F,)
        assert assignment.missing == {(2, 1)}
        assert int(np.count_nonzero(pc.counts)) == 5

    def test_second_copy_goes_backward(self):
        cycles = [cycle([0, 1, 2, 0]), cycle([0, 1, 2, 0], 1)]
        assignment, _ = initial_cycle_direction(cycles, 3)
        assert assignment.directions == (F, B)
        assert assignment.missing == frozenset()

    def test_two_node_cycle(self):
        assignment, _ = initial_cycle_direction([cycle([0, 1, 0])], 2)
        assert assignment.directions == (F,)
        assert assignment.missing_count == 0

    def test_counts_keep_multiplicity(self):
        """Already covered pairs are counted again by the chosen direction."""
        cycles = [cycle([0, 1, 2, 0]), cycle([0, 1, 2, 0], 1)]
        _, pc = initial_cycle_direction(cycles, 3)
        assert pc.counts[0, 1] == 2
        assert pc.counts[2, 1] == 1

    def test_empty_rejected(self):
        with pytest.raises(EmptySolutionError):
            initial_cycle_direction([], 3)


class TestGreedyUpdate:
    """Test single-flip improvement passes."""

    def test_fixed_point_takes_one_pass(self):
        cycles = [cycle([0, 1, 2, 0]), cycle([0, 1, 2, 0], 1)]
        initial, pc = initial_cycle_direction(cycles, 3)
        result = greedy_update_cycle_direction(cycles, initial, pc)
        assert result.directions == initial.directions
        assert result.passes == 1

    def test_matches_exhaustive_on_three_cycles(self):
        cycles = [cycle([0, 1, 2, 0]), cycle([0, 1, 3, 0], 1), cycle([1, 2, 3, 1], 2)]
        initial, pc = initial_cycle_direction(cycles, 4)
        result = greedy_update_cycle_direction(cycles, initial, pc)
        assert result.missing_count == exhaustive_missing(cycles, 4) == 1

    def test_flips_a_bad_start(self):
        """Two identical forward cycles improve by flipping one."""
        cycles = [cycle([0, 1, 2, 0]), cycle([0, 1, 2, 0], 1)]
        masks = CycleMasks.build(cycles, 3)
        start = DirectionAssignment((F, F), frozenset({(2, 1)}))
        pc = PairCoverage.rebuild(masks, start.directions)
        result = greedy_update_cycle_direction(cycles, start, pc, masks=masks)
        assert result.missing_count == 0
        assert B in result.directions

    def test_inconsistent_coverage_rejected(self):
        cycles = [cycle([0, 1, 2, 0])]
        initial, _ = initial_cycle_direction(cycles, 3)
        with pytest.raises(CoverageMismatchError):
            greedy_update_cycle_direction(cycles, initial, PairCoverage.empty(3))

    def test_incremental_state_matches_rebuild(self):
        """After every step the running counts equal a rebuild from scratch."""
        rng = np.random.default_rng(17)
        gaps = []
        for _ in range(100):
            n = int(rng.integers(3, 9))
            cycles = random_instance(rng, n, int(rng.integers(1, 13)))
            masks = CycleMasks.build(cycles, n)

            def shadow(step, directions, pc, masks=masks):
                assert pc.matches(PairCoverage.rebuild(masks, directions))

            initial, pc = initial_cycle_direction(
                cycles, n, observer=shadow, masks=masks
            )
            result = greedy_update_cycle_direction(
                cycles, initial, pc, observer=shadow, masks=masks
            )
            assert result.missing_count <= initial.missing_count
            assert result.passes <= n * n
            assert result.missing == frozenset(missing_pairs(pc))

            optimum = exhaustive_missing(cycles, n)
            assert result.missing_count >= optimum
            gaps.append(result.missing_count - optimum)
        print(f"greedy gap to optimum: mean {np.mean(gaps):.3f}, max {max(gaps)}")


class TestBaselines:
    """Test fixed and random direction baselines."""

    def test_forward(self):
        assignment = assign_forward([cycle([0, 1, 2, 0])], 3)
        assert assignment.directions == (F,)
        assert assignment.missing == {(2, 1)}

    def test_forward_empty_rejected(self):
        with pytest.raises(EmptySolutionError):
            assign_forward([], 3)

    def test_forward_two_node(self):
        assert assign_forward([cycle([0, 1, 0])], 2).missing_count == 0

    def test_random_is_deterministic(self):
        cycles = [cycle([0, 1, 2, 0], i) for i in range(20)]
        assert assign_random(cycles, 3, seed=4) == assign_random(cycles, 3, seed=4)

    def test_random_two_node(self):
        for seed in range(5):
            assert assign_random([cycle([0, 1, 0])], 2, seed).missing_count == 0

    def test_random_is_fair(self):
        """Forward share of 1000 coins stays within [0.45, 0.55] for most seeds."""
        cycles = [cycle([0, 1, 0], i) for i in range(1000)]
        inside = 0
        for seed in range(100):
            directions = assign_random(cycles, 2, seed).directions
            share = directions.count(F) / len(directions)
            inside += 0.45 <= share <= 0.55
        assert inside >= 95


class TestPaired:
    """Test the paired-cycle baseline."""

    def test_twins_cover_everything(self):
        twins = expand_paired([cycle([0, 1, 2, 0])])
        assert [c.direction for c in twins] == [F, B]
        union = ordered_pairs(twins[0]) | ordered_pairs(twins[1])
        assert union == all_pairs({0, 1, 2})

    def test_empty(self):
        assert expand_paired([]) == []

    def test_links_double(self):
        cycles = [cycle([0, 1, 2, 0]), cycle([1, 2, 3, 1], 1)]
        assert links_used(expand_paired(cycles)) == 2 * links_used(cycles)


class TestMissingPairs:
    """Test missing-pair extraction and dumps."""

    def test_full_coverage(self):
        pc = PairCoverage(3, np.ones((3, 3), dtype=np.int64))
        assert missing_pairs(pc) == set()

    def test_empty_coverage(self):
        assert missing_pairs(PairCoverage.empty(3)) == all_pairs(range(3))

    def test_fraction(self):
        assert missing_fraction({(2, 1)}, 3) == pytest.approx(1 / 6)

    def test_dumps(self):
        assignment = DirectionAssignment((F, B), frozenset({(2, 1), (0, 2)}))
        assert dump_directions(assignment) == "0 F\n1 B\n"
        assert dump_missing_pairs(assignment.missing) == "0 2\n2 1\n"
