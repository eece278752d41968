"""Experiment sweep command."""

import argparse
import dataclasses
import logging
from pathlib import Path

from qcycle.services.config import load_config
from qcycle.services.experiment import compare_strategies, run_experiment
from qcycle.services.reporting import format_reductions, format_summary, write_results

logger = logging.getLogger(__name__)


class Simulate:
    """Run a configured mapping sweep and write CSV and plot-data files."""

    name = "simulate"
    help = "Run an experiment from a key=value config file"

    def configure(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("config", help="Experiment config file")
        parser.add_argument(
            "--output-dir", help="Override the config's output directory"
        )

    def run(self, args: argparse.Namespace) -> int:
        config = load_config(args.config)
        if args.output_dir:
            config = dataclasses.replace(config, output_dir=Path(args.output_dir))

        result = run_experiment(config)
        write_results(result, config.output_dir)

        aggregate = result.aggregate()
        print(format_summary(aggregate))
        if len(aggregate.summaries) >= 2:
            print(format_reductions(compare_strategies(result.rows)))
        return 0
