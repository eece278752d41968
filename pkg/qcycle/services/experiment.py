"""Mapping sweeps comparing direction strategies on one network."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, fields

import numpy as np
import pandas as pd

from qcycle.services.config import ExperimentConfig, Strategy
from qcycle.services.direction import (
    CycleMasks,
    DirectionAssignment,
    assign_forward,
    assign_random,
    assignment_from_routes,
    expand_paired,
    greedy_update_cycle_direction,
    initial_cycle_direction,
)
from qcycle.services.faultsim import (
    fault_coverage,
    fault_free_compensated_missing,
    sweep_single_faults,
)
from qcycle.services.quorum import (
    QuorumBase,
    QuorumSet,
    SearchStrategy,
    build_quorum_set,
    find_min_redundant_base,
    load_bases_file,
    lookup_base,
)
from qcycle.services.routing import CycleRoute, RoutingError, links_used, route_all
from qcycle.services.topology import (
    Edge,
    Topology,
    apply_mapping,
    generate_mappings,
    load_topology_file,
)

logger = logging.getLogger(__name__)

# Largest population searched exhaustively when quorum_search=auto
AUTO_EXHAUSTIVE_MAX = 20

Z_95 = 1.96


class SampleMismatchError(ValueError):
    """Strategies being compared were evaluated on different mappings."""


@dataclass(frozen=True)
class MappingRow:
    """One strategy evaluated on one node mapping."""

    mapping_id: int
    strategy: Strategy
    links_used: int
    fault_free_missing: int
    mean_missing: float | None = None
    coverage_pct: float | None = None
    compensated_missing: int | None = None
    mean_compensated_missing: float | None = None


MAPPING_FIELDS = [f.name for f in fields(MappingRow)]
OPTIONAL_FIELDS = [
    "mean_missing",
    "coverage_pct",
    "compensated_missing",
    "mean_compensated_missing",
]


@dataclass(frozen=True)
class FaultRow:
    mapping_id: int
    strategy: Strategy
    failed_edge: Edge
    missing_count: int
    compensated_missing: int | None = None


@dataclass(frozen=True)
class Estimate:
    """Sample mean with a normal-approximation 95% half-width."""

    mean: float
    half_width: float
    samples: int


@dataclass(frozen=True)
class StrategySummary:
    strategy: Strategy
    samples: int
    links_used: Estimate
    missing_pct: Estimate
    coverage_pct: Estimate | None
    mean_fault_missing: Estimate | None
    mean_compensated_missing: Estimate | None = None


@dataclass(frozen=True)
class AggregateResult:
    network: str
    nodes: int
    redundancy: int
    summaries: dict[Strategy, StrategySummary]
    skipped: int = 0


@dataclass(frozen=True)
class Reduction:
    """Percent change of a candidate's mean against a baseline's mean."""

    metric: str
    baseline: Strategy
    candidate: Strategy
    baseline_mean: float
    candidate_mean: float

    @property
    def change_pct(self) -> float | None:
        if self.baseline_mean == 0:
            return None
        return 100.0 * (self.candidate_mean - self.baseline_mean) / self.baseline_mean

    def formatted(self) -> str:
        change = self.change_pct
        return "n/a" if change is None else f"{change:.2f}"


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    nodes: int
    rows: list[MappingRow] = field(default_factory=list)
    fault_rows: list[FaultRow] = field(default_factory=list)
    skipped: list[int] = field(default_factory=list)
    bases: dict[int, QuorumBase] = field(default_factory=dict)

    def aggregate(self) -> AggregateResult:
        return aggregate_rows(
            self.rows,
            network=self.config.network,
            nodes=self.nodes,
            redundancy=self.config.redundancy,
            skipped=len(self.skipped),
        )


def derive_seed(master: int, strategy: Strategy, mapping_id: int) -> int:
    """Stable per-(strategy, mapping) seed, independent of the strategy list."""
    entropy = [master, list(Strategy).index(strategy), mapping_id]
    state = np.random.SeedSequence(entropy).generate_state(1, np.uint64)
    return int(state[0])


def _estimate(mean: float, std: float, count: int) -> Estimate:
    if count == 1:
        return Estimate(float(mean), 0.0, 1)
    return Estimate(float(mean), Z_95 * float(std) / math.sqrt(count), count)


def mean_ci(values: Sequence[float]) -> Estimate:
    """Mean and 1.96 * sample stddev / sqrt(n); zero width for one sample."""
    if not values:
        return Estimate(math.nan, math.nan, 0)
    series = pd.Series(values, dtype=float)
    return _estimate(series.mean(), series.std(ddof=1), len(series))


def obtain_base(config: ExperimentConfig, n: int, r: int) -> QuorumBase:
    """Base for (n, r) from the configured file, else from a search.

    Raises:
        QuorumInfeasibleError: If r cannot be reached for n.
        SearchBudgetExhausted: If the randomized search gives up.
    """
    if config.quorum_file is not None:
        base = lookup_base(load_bases_file(config.quorum_file), n, r)
        if base is not None:
            logger.info(f"Using listed base for N={n} R={r}: {list(base.members)}")
            return base
        logger.warning(
            f"No base for N={n} R={r} in {config.quorum_file.name}, searching instead"
        )

    if config.quorum_search == "auto":
        strategy = (
            SearchStrategy.EXHAUSTIVE
            if n <= AUTO_EXHAUSTIVE_MAX
            else SearchStrategy.RANDOMIZED
        )
    else:
        strategy = SearchStrategy(config.quorum_search)
    return find_min_redundant_base(
        n, r, strategy, seed=config.seed, budget=config.search_budget
    )


def _assign(
    strategy: Strategy,
    cycles: Sequence[CycleRoute],
    n: int,
    config: ExperimentConfig,
    mapping_id: int,
) -> DirectionAssignment:
    through = config.count_pass_through
    if strategy is Strategy.PAIRED:
        return assignment_from_routes(cycles, n, through)
    if strategy is Strategy.FORWARD:
        return assign_forward(cycles, n, through)
    if strategy is Strategy.RANDOM:
        seed = derive_seed(config.seed, strategy, mapping_id)
        return assign_random(cycles, n, seed, through)

    masks = CycleMasks.build(cycles, n, through)
    initial, pc = initial_cycle_direction(cycles, n, through, masks=masks)
    return greedy_update_cycle_direction(cycles, initial, pc, through, masks=masks)


def _route_mapping(
    topology: Topology,
    config: ExperimentConfig,
    single_set: QuorumSet | None,
    paired_set: QuorumSet | None,
) -> dict[Strategy, list[CycleRoute]]:
    routes: dict[Strategy, list[CycleRoute]] = {}
    if single_set is not None:
        single = route_all(topology, single_set, config.route_budget)
        for strategy in config.strategies:
            if strategy is not Strategy.PAIRED:
                routes[strategy] = single
    if paired_set is not None:
        routes[Strategy.PAIRED] = expand_paired(
            route_all(topology, paired_set, config.route_budget)
        )
    return routes


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Route, direct and fault-sweep every strategy on every node mapping.

    Mappings whose routing is infeasible are logged, recorded and left
    out of the aggregate.

    Raises:
        QuorumInfeasibleError: If no base exists for the configured redundancy.
    """
    topology = load_topology_file(config.topology)
    n = topology.node_count
    result = ExperimentResult(config=config, nodes=n)

    single_set = paired_set = None
    if any(s is not Strategy.PAIRED for s in config.strategies):
        base = obtain_base(config, n, config.redundancy)
        result.bases[config.redundancy] = base
        single_set = build_quorum_set(base)
    if Strategy.PAIRED in config.strategies:
        base = result.bases.get(1) or obtain_base(config, n, 1)
        result.bases[1] = base
        paired_set = build_quorum_set(base)

    for mapping in generate_mappings(n, config.mappings, config.seed):
        mapped = apply_mapping(topology, mapping)
        try:
            routes = _route_mapping(mapped, config, single_set, paired_set)
        except RoutingError as e:
            logger.warning(f"Skipping mapping {mapping.index}: {e}")
            result.skipped.append(mapping.index)
            continue

        for strategy in config.strategies:
            cycles = routes[strategy]
            assignment = _assign(strategy, cycles, n, config, mapping.index)
            row = _evaluate(
                mapped, strategy, cycles, assignment, config, mapping.index, result
            )
            result.rows.append(row)
        logger.debug(f"Mapping {mapping.index} done")

    logger.info(
        f"Experiment '{config.network}' R={config.redundancy}: "
        f"{config.mappings - len(result.skipped)} mappings evaluated, "
        f"{len(result.skipped)} skipped"
    )
    return result


def _evaluate(
    topology: Topology,
    strategy: Strategy,
    cycles: Sequence[CycleRoute],
    assignment: DirectionAssignment,
    config: ExperimentConfig,
    mapping_id: int,
    result: ExperimentResult,
) -> MappingRow:
    mean_missing = coverage = compensated = mean_compensated = None
    if config.fault_sweep:
        report = sweep_single_faults(
            topology,
            cycles,
            assignment.directions,
            mode=config.fault_mode,
            compensation=config.compensation,
            count_pass_through=config.count_pass_through,
        )
        mean_missing = report.mean_missing
        coverage = fault_coverage(report)
        mean_compensated = report.mean_compensated_missing
        result.fault_rows.extend(
            FaultRow(
                mapping_id,
                strategy,
                edge,
                fault.missing_count,
                fault.compensated_missing,
            )
            for edge, fault in report.per_edge.items()
        )
    if config.compensation:
        compensated = fault_free_compensated_missing(
            topology, cycles, assignment.directions, config.count_pass_through
        )
    return MappingRow(
        mapping_id=mapping_id,
        strategy=strategy,
        links_used=links_used(cycles),
        fault_free_missing=assignment.missing_count,
        mean_missing=mean_missing,
        coverage_pct=coverage,
        compensated_missing=compensated,
        mean_compensated_missing=mean_compensated,
    )


MEASURES = [
    "links_used",
    "missing_pct",
    "coverage_pct",
    "mean_missing",
    "mean_compensated_missing",
]


def rows_frame(rows: Sequence[MappingRow]) -> pd.DataFrame:
    """One frame row per mapping row; absent measurements become NaN."""
    frame = pd.DataFrame(rows, columns=MAPPING_FIELDS)
    frame[OPTIONAL_FIELDS] = frame[OPTIONAL_FIELDS].astype(float)
    return frame


def _column_estimate(stats: pd.DataFrame, strategy, column: str) -> Estimate:
    mean, std, count = stats.loc[strategy, column]
    if count == 0:
        return Estimate(math.nan, math.nan, 0)
    return _estimate(mean, std, int(count))


def _optional_estimate(stats: pd.DataFrame, strategy, column: str) -> Estimate | None:
    found = _column_estimate(stats, strategy, column)
    return found if found.samples else None


def aggregate_rows(
    rows: Sequence[MappingRow],
    network: str,
    nodes: int,
    redundancy: int,
    skipped: int = 0,
) -> AggregateResult:
    """Per-strategy means and 95% half-widths over evaluated mappings."""
    if not rows:
        return AggregateResult(network, nodes, redundancy, {}, skipped)

    frame = rows_frame(rows)
    frame["missing_pct"] = 100.0 * frame["fault_free_missing"] / (nodes * (nodes - 1))
    grouped = frame.groupby("strategy", sort=False)
    stats = grouped[MEASURES].agg(["mean", "std", "count"])

    summaries = {}
    for key, samples in grouped.size().items():
        strategy = Strategy(key)
        summaries[strategy] = StrategySummary(
            strategy=strategy,
            samples=int(samples),
            links_used=_column_estimate(stats, key, "links_used"),
            missing_pct=_column_estimate(stats, key, "missing_pct"),
            coverage_pct=_optional_estimate(stats, key, "coverage_pct"),
            mean_fault_missing=_optional_estimate(stats, key, "mean_missing"),
            mean_compensated_missing=_optional_estimate(
                stats, key, "mean_compensated_missing"
            ),
        )
    return AggregateResult(network, nodes, redundancy, summaries, skipped)


def _mapping_ids(rows: Sequence[MappingRow], strategy: Strategy) -> list[int]:
    return sorted(r.mapping_id for r in rows if r.strategy is strategy)


def compare_strategies(
    rows: Sequence[MappingRow],
    baseline: Strategy = Strategy.FORWARD,
    candidate: Strategy = Strategy.GREEDY,
) -> list[Reduction]:
    """Missing-pair reductions of candidate vs baseline, plus link savings vs paired.

    Raises:
        SampleMismatchError: If compared strategies cover different mappings.
    """
    present = {r.strategy for r in rows}
    if len(present) < 2:
        raise SampleMismatchError("comparison needs at least two strategies")

    grouped = rows_frame(rows).groupby("strategy", sort=False)
    averages = grouped[["fault_free_missing", "links_used", "mean_missing"]].mean()

    def means(strategy: Strategy) -> dict[str, float]:
        row = averages.loc[strategy]
        out = {
            "fault_free_missing": float(row["fault_free_missing"]),
            "links_used": float(row["links_used"]),
        }
        if not pd.isna(row["mean_missing"]):
            out["mean_fault_missing"] = float(row["mean_missing"])
        return out

    def check(a: Strategy, b: Strategy) -> None:
        if _mapping_ids(rows, a) != _mapping_ids(rows, b):
            raise SampleMismatchError(
                f"'{a.value}' and '{b.value}' were evaluated on different mappings"
            )

    reductions = []
    if baseline in present and candidate in present:
        check(baseline, candidate)
        base_means, cand_means = means(baseline), means(candidate)
        for metric in ("fault_free_missing", "mean_fault_missing"):
            if metric in base_means and metric in cand_means:
                reductions.append(
                    Reduction(
                        metric,
                        baseline,
                        candidate,
                        base_means[metric],
                        cand_means[metric],
                    )
                )

    if Strategy.PAIRED in present:
        paired_means = means(Strategy.PAIRED)
        for strategy in sorted(present - {Strategy.PAIRED}, key=list(Strategy).index):
            check(Strategy.PAIRED, strategy)
            reductions.append(
                Reduction(
                    "links_used",
                    Strategy.PAIRED,
                    strategy,
                    paired_means["links_used"],
                    means(strategy)["links_used"],
                )
            )
    return reductions


def coverage_ordering_violations(aggregate: AggregateResult) -> list[str]:
    """Soft check: paired coverage should not fall below greedy coverage."""
    paired = aggregate.summaries.get(Strategy.PAIRED)
    greedy = aggregate.summaries.get(Strategy.GREEDY)
    if not paired or not greedy or not paired.coverage_pct or not greedy.coverage_pct:
        return []
    if paired.coverage_pct.mean >= greedy.coverage_pct.mean:
        return []
    return [
        f"{aggregate.network}: paired coverage {paired.coverage_pct.mean:.2f}% "
        f"below greedy {greedy.coverage_pct.mean:.2f}%"
    ]
