"""Summary command for finished runs."""

import argparse

from qcycle.services.experiment import compare_strategies
from qcycle.services.reporting import format_reductions, format_summary, load_run


class Report:
    """Recompute and print the aggregate of a run directory."""

    name = "report"
    help = "Summarize a finished simulate run"

    def configure(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("dir", help="Output directory of a simulate run")

    def run(self, args: argparse.Namespace) -> int:
        aggregate, rows = load_run(args.dir)
        print(format_summary(aggregate))
        if len(aggregate.summaries) >= 2:
            print(format_reductions(compare_strategies(rows)))
        return 0
