"""Quorum base search and verification commands."""

import argparse
import logging

import numpy as np

from qcycle.services.quorum import (
    SearchStrategy,
    build_quorum_set,
    difference_multiplicity,
    find_min_redundant_base,
    format_base,
    load_bases_file,
    lower_bound_size,
    pair_occurrences,
    sizing_estimate,
)

logger = logging.getLogger(__name__)


class Quorum:
    """Find minimal R-redundant cyclic bases or verify a base-set file."""

    name = "quorum"
    help = "Search for or verify cyclic quorum bases"

    def configure(self, parser: argparse.ArgumentParser) -> None:
        actions = parser.add_subparsers(dest="quorum_action", required=True)

        find = actions.add_parser("find", help="Search a minimal base for N and R")
        find.add_argument("n", type=int, help="Population size (node count)")
        find.add_argument("r", type=int, help="Redundancy: co-occurrences per pair")
        find.add_argument(
            "--strategy",
            choices=[s.value for s in SearchStrategy],
            default=SearchStrategy.EXHAUSTIVE.value,
        )
        find.add_argument("--seed", type=int, default=0)
        find.add_argument("--budget", type=int, default=20000)

        verify = actions.add_parser(
            "verify", help="Re-verify every line of a base file"
        )
        verify.add_argument("file", help="Base-set file: 'N R k m_0 ... m_k-1' lines")

    def run(self, args: argparse.Namespace) -> int:
        if args.quorum_action == "find":
            return self.find(args)
        return self.verify(args)

    def find(self, args: argparse.Namespace) -> int:
        base = find_min_redundant_base(
            args.n, args.r, args.strategy, seed=args.seed, budget=args.budget
        )
        print(format_base(base))

        bound = lower_bound_size(args.n, args.r)
        if args.r > 1:
            single = find_min_redundant_base(
                args.n, 1, args.strategy, seed=args.seed, budget=args.budget
            )
            estimate = sizing_estimate(single.size, args.r)
            print(
                f"# size {base.size}, counting bound {bound}, "
                f"R=1 size {single.size}, sqrt(R)*k estimate {estimate}"
            )
        else:
            print(f"# size {base.size}, counting bound {bound}")
        return 0

    def verify(self, args: argparse.Namespace) -> int:
        bases = load_bases_file(args.file)
        for base in bases:
            profile = difference_multiplicity(base.members, base.n)
            grid = pair_occurrences(build_quorum_set(base))
            off_diagonal = grid[~np.eye(base.n, dtype=bool)]
            oracle_min = int(off_diagonal.min()) if off_diagonal.size else 0
            agrees = "ok" if oracle_min == profile.minimum else "MISMATCH"
            print(
                f"{format_base(base)}  # min lambda {profile.minimum}, "
                f"pair oracle {oracle_min} {agrees}"
            )
        logger.info(f"Verified {len(bases)} bases")
        return 0