"""CSV and plot-data artifacts for experiment runs."""

import logging
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from dotenv import dotenv_values

from qcycle.services.config import Strategy
from qcycle.services.experiment import (
    MAPPING_FIELDS,
    AggregateResult,
    Estimate,
    ExperimentResult,
    MappingRow,
    Reduction,
    aggregate_rows,
    compare_strategies,
    coverage_ordering_violations,
    rows_frame,
)

logger = logging.getLogger(__name__)

MAPPINGS_CSV = "mappings.csv"
FAULTS_CSV = "faults.csv"
SUMMARY_CSV = "summary.csv"
REDUCTIONS_CSV = "reductions.csv"
PLOTDATA_TXT = "plotdata.txt"
RUN_CONF = "run.conf"

MAPPING_COLUMNS = MAPPING_FIELDS
FAULT_COLUMNS = [
    "mapping_id",
    "strategy",
    "failed_edge_u",
    "failed_edge_v",
    "missing_count",
    "compensated_missing",
]
REDUCTION_COLUMNS = [
    "metric",
    "baseline",
    "candidate",
    "baseline_mean",
    "candidate_mean",
    "change_pct",
]
SUMMARY_COLUMNS = [
    "network",
    "strategy",
    "samples",
    "skipped",
    "links_mean",
    "links_ci",
    "missing_pct_mean",
    "missing_pct_ci",
    "mean_fault_missing",
    "mean_fault_missing_ci",
    "coverage_pct_mean",
    "coverage_pct_ci",
    "mean_compensated_missing",
    "mean_compensated_missing_ci",
]


def _csv_text(frame: pd.DataFrame) -> str:
    # NaN and <NA> render as empty cells, floats in shortest round-trip form
    return frame.to_csv(index=False, lineterminator="\n")


def _ordered(strategies) -> list[Strategy]:
    return sorted(strategies, key=list(Strategy).index)


def row_order(row: MappingRow) -> tuple[int, int]:
    return row.mapping_id, list(Strategy).index(row.strategy)


def mappings_csv(rows: Sequence[MappingRow]) -> str:
    ordered = sorted(rows, key=row_order)
    frame = rows_frame(ordered)
    frame["strategy"] = [row.strategy.value for row in ordered]
    frame["compensated_missing"] = frame["compensated_missing"].astype("Int64")
    return _csv_text(frame[MAPPING_COLUMNS])


def faults_csv(result: ExperimentResult) -> str:
    ordered = sorted(
        result.fault_rows,
        key=lambda f: (f.mapping_id, list(Strategy).index(f.strategy), f.failed_edge),
    )
    frame = pd.DataFrame.from_records(
        [
            (f.mapping_id, f.strategy.value, *f.failed_edge, f.missing_count)
            for f in ordered
        ],
        columns=FAULT_COLUMNS[:-1],
    )
    frame["compensated_missing"] = pd.array(
        [f.compensated_missing for f in ordered], dtype="Int64"
    )
    return _csv_text(frame)


def summary_csv(aggregate: AggregateResult) -> str:
    def pair(estimate: Estimate | None) -> list[float | None]:
        if estimate is None:
            return [None, None]
        return [estimate.mean, estimate.half_width]

    records = []
    for strategy in _ordered(aggregate.summaries):
        s = aggregate.summaries[strategy]
        records.append(
            [
                aggregate.network,
                strategy.value,
                s.samples,
                aggregate.skipped,
                *pair(s.links_used),
                *pair(s.missing_pct),
                *pair(s.mean_fault_missing),
                *pair(s.coverage_pct),
                *pair(s.mean_compensated_missing),
            ]
        )
    return _csv_text(pd.DataFrame.from_records(records, columns=SUMMARY_COLUMNS))


def reductions_csv(reductions: Sequence[Reduction]) -> str:
    frame = pd.DataFrame.from_records(
        [
            (
                r.metric,
                r.baseline.value,
                r.candidate.value,
                r.baseline_mean,
                r.candidate_mean,
                r.formatted(),
            )
            for r in reductions
        ],
        columns=REDUCTION_COLUMNS,
    )
    return _csv_text(frame)


def emit_plot_data(aggregates: Sequence[AggregateResult]) -> str:
    """Whitespace-separated coverage rows, one per network and strategy."""
    lines = ["# network strategy coverage_pct ci_half_width samples"]
    for aggregate in aggregates:
        for violation in coverage_ordering_violations(aggregate):
            logger.warning(f"Coverage ordering soft check: {violation}")
        for strategy in _ordered(aggregate.summaries):
            coverage = aggregate.summaries[strategy].coverage_pct
            if coverage is None:
                continue
            lines.append(
                f"{aggregate.network} {strategy.value} {coverage.mean:.6f} "
                f"{coverage.half_width:.6f} {coverage.samples}"
            )
    return "\n".join(lines) + "\n"


def write_results(result: ExperimentResult, output_dir: Path | str) -> list[Path]:
    """Write every artifact of a run; returns the paths written.

    Raises:
        OSError: If the directory or files cannot be written.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    aggregate = result.aggregate()

    run_values = result.config.to_values()
    run_values["nodes"] = str(result.nodes)
    run_values["skipped"] = ",".join(str(i) for i in result.skipped)
    for r, base in sorted(result.bases.items()):
        run_values[f"base_r{r}"] = " ".join(str(x) for x in base.members)

    artifacts = {
        RUN_CONF: "".join(f"{k}={v}\n" for k, v in run_values.items()),
        MAPPINGS_CSV: mappings_csv(result.rows),
        SUMMARY_CSV: summary_csv(aggregate),
    }
    if result.config.fault_sweep:
        artifacts[FAULTS_CSV] = faults_csv(result)
        artifacts[PLOTDATA_TXT] = emit_plot_data([aggregate])
    if len(aggregate.summaries) >= 2:
        artifacts[REDUCTIONS_CSV] = reductions_csv(compare_strategies(result.rows))

    written = []
    for name, text in artifacts.items():
        path = output_dir / name
        path.write_text(text)
        written.append(path)
    logger.info(f"Wrote {len(written)} files to {output_dir}")
    return written


def _optional_float(value) -> float | None:
    return None if pd.isna(value) else float(value)


def _optional_int(value) -> int | None:
    return None if pd.isna(value) else int(value)


def read_mapping_rows(path: Path | str) -> list[MappingRow]:
    frame = pd.read_csv(
        path,
        dtype={"strategy": str, "compensated_missing": "Int64"},
        float_precision="round_trip",
    )
    return [
        MappingRow(
            mapping_id=int(row["mapping_id"]),
            strategy=Strategy(row["strategy"]),
            links_used=int(row["links_used"]),
            fault_free_missing=int(row["fault_free_missing"]),
            mean_missing=_optional_float(row["mean_missing"]),
            coverage_pct=_optional_float(row["coverage_pct"]),
            compensated_missing=_optional_int(row["compensated_missing"]),
            mean_compensated_missing=_optional_float(row["mean_compensated_missing"]),
        )
        for row in frame.to_dict("records")
    ]


def load_run(output_dir: Path | str) -> tuple[AggregateResult, list[MappingRow]]:
    """Recompute the aggregate of a finished run from its per-mapping rows.

    Raises:
        FileNotFoundError: If the run files are missing.
    """
    output_dir = Path(output_dir)
    run_path = output_dir / RUN_CONF
    if not run_path.exists():
        raise FileNotFoundError(f"Run description not found: {run_path}")
    values = dotenv_values(run_path)
    rows = read_mapping_rows(output_dir / MAPPINGS_CSV)
    skipped = [s for s in (values.get("skipped") or "").split(",") if s]
    aggregate = aggregate_rows(
        rows,
        network=values.get("name") or Path(values.get("topology") or "").stem,
        nodes=int(values["nodes"] or 0),
        redundancy=int(values["redundancy"] or 1),
        skipped=len(skipped),
    )
    return aggregate, rows


def format_summary(aggregate: AggregateResult) -> str:
    """Human-readable summary table."""

    def cell(estimate: Estimate | None) -> str:
        if estimate is None:
            return "-"
        return f"{estimate.mean:.2f} ± {estimate.half_width:.2f}"

    header = (
        f"{'strategy':<10}{'n':>5}  {'links':>18}  "
        f"{'missing %':>16}  {'coverage %':>18}"
    )
    lines = [
        f"{aggregate.network} (N={aggregate.nodes}, R={aggregate.redundancy}, "
        f"skipped {aggregate.skipped})",
        header,
    ]
    for strategy in _ordered(aggregate.summaries):
        s = aggregate.summaries[strategy]
        lines.append(
            f"{strategy.value:<10}{s.samples:>5}  {cell(s.links_used):>18}  "
            f"{cell(s.missing_pct):>16}  {cell(s.coverage_pct):>18}"
        )
    return "\n".join(lines)


def format_reductions(reductions: Sequence[Reduction]) -> str:
    return "\n".join(
        f"{r.metric}: {r.candidate.value} vs {r.baseline.value}: {r.formatted()}%"
        for r in reductions
    )
