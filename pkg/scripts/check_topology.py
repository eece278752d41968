#!/usr/bin/env -S uv run --script
# /// script
# requires-python = ">=3.12"
# dependencies = ["networkx>=3.4"]
# ///
"""Check edge-list topology files before they are committed."""

import argparse
import sys
from pathlib import Path

import networkx as nx

TOPOLOGIES_DIR = Path(__file__).parent.parent / "data" / "topologies"


def check(path: Path) -> list[str]:
    """Return the problems found in one topology file."""
    problems = []
    lines = [
        (no, line.split())
        for no, line in enumerate(path.read_text().splitlines(), 1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines or len(lines[0][1]) != 1 or not lines[0][1][0].isdigit():
        return ["first line must hold the node count"]

    n = int(lines[0][1][0])
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for no, parts in lines[1:]:
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            problems.append(f"line {no}: expected 'u v'")
            continue
        u, v = int(parts[0]), int(parts[1])
        if u == v:
            problems.append(f"line {no}: self-loop on {u}")
        elif u >= n or v >= n:
            problems.append(f"line {no}: node index outside [0, {n})")
        elif graph.has_edge(u, v):
            problems.append(f"line {no}: duplicate edge {u}-{v}")
        else:
            graph.add_edge(u, v)

    if problems:
        return problems
    if not nx.is_connected(graph):
        problems.append("graph is not connected")
    bridges = sorted(tuple(sorted(e)) for e in nx.bridges(graph))
    if bridges:
        problems.append(f"bridges {bridges}: some quorums may not close into cycles")
    return problems


def main() -> None:
    parser = argparse.ArgumentParser(description="Validate topology edge lists.")
    parser.add_argument(
        "files",
        nargs="*",
        type=Path,
        help="Files to check (default: every shipped topology)",
    )
    args = parser.parse_args()

    files = args.files or sorted(TOPOLOGIES_DIR.glob("*.txt"))
    failed = False
    for path in files:
        for problem in check(path):
            print(f"{path}: {problem}", file=sys.stderr)
            failed = True
    if failed:
        sys.exit(1)
    print(f"Checked {len(files)} topologies")


if __name__ == "__main__":
    main()
