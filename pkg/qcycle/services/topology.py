"""Fiber network topologies: edge-list ingest, relabeling mappings, bridges."""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)

TOPOLOGIES_DIR = Path(__file__).parent.parent.parent / "data" / "topologies"

# Backbones transcribed from published figures (approximate edge lists)
SHIPPED_TOPOLOGIES = ("nsfnet", "arpanet", "american", "chinese")

Edge = tuple[int, int]


class TopologyParseError(ValueError):
    """Malformed edge-list document."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class TopologyValidationError(ValueError):
    """Well-formed document describing an invalid graph."""


class MappingError(ValueError):
    """Node mapping does not fit the topology it is applied to."""


def normalize_edge(u: int, v: int) -> Edge:
    """Return the undirected edge (u, v) with the smaller endpoint first."""
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Topology:
    """Undirected fiber network over dense node indices 0..N-1."""

    node_count: int
    edges: frozenset[Edge]
    name: str = ""

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise TopologyValidationError(
                f"node count must be positive, got {self.node_count}"
            )
        for u, v in self.edges:
            if u == v:
                raise TopologyValidationError(f"self-loop on node {u}")
            if u > v:
                raise TopologyValidationError(f"edge ({u}, {v}) is not normalized")
            if v >= self.node_count or u < 0:
                raise TopologyValidationError(
                    f"edge ({u}, {v}) outside node range [0, {self.node_count})"
                )

    @classmethod
    def from_edges(
        cls, node_count: int, edges: Iterable[Edge], name: str = ""
    ) -> "Topology":
        """Build a topology, rejecting duplicate undirected edges.

        Raises:
            TopologyValidationError: On self-loops, duplicates or bad indices.
        """
        seen: set[Edge] = set()
        for u, v in edges:
            if u == v:
                raise TopologyValidationError(f"self-loop on node {u}")
            edge = normalize_edge(u, v)
            if edge in seen:
                raise TopologyValidationError(f"duplicate edge {edge}")
            seen.add(edge)
        return cls(node_count=node_count, edges=frozenset(seen), name=name)

    @cached_property
    def graph(self) -> nx.Graph:
        """networkx view with nodes and edges inserted in ascending order."""
        g = nx.Graph(name=self.name)
        g.add_nodes_from(range(self.node_count))
        g.add_edges_from(sorted(self.edges))
        return g

    @cached_property
    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def neighbors(self, node: int) -> list[int]:
        return sorted(self.graph.neighbors(node))

    def has_edge(self, u: int, v: int) -> bool:
        return normalize_edge(u, v) in self.edges


@dataclass(frozen=True)
class NodeMapping:
    """Bijective relabeling of node indices, old index i becomes permutation[i]."""

    permutation: tuple[int, ...]
    seed: int = 0
    index: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise MappingError("permutation is not a bijection on [0, N)")

    def __len__(self) -> int:
        return len(self.permutation)

    def __getitem__(self, node: int) -> int:
        return self.permutation[node]

    @property
    def is_identity(self) -> bool:
        return all(i == p for i, p in enumerate(self.permutation))


def load_topology(text: str, name: str = "") -> Topology:
    """Parse an edge-list document.

    Line 1 holds N, every later non-empty, non-comment line holds "u v".

    Raises:
        TopologyParseError: If a line is malformed.
        TopologyValidationError: On self-loops, duplicate edges or index >= N.
    """
    node_count: int | None = None
    edges: list[Edge] = []

    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()

        if node_count is None:
            if len(parts) != 1:
                raise TopologyParseError(
                    f"expected node count header, got '{line}'", line_no
                )
            try:
                node_count = int(parts[0])
            except ValueError:
                raise TopologyParseError(
                    f"node count must be an integer, got '{parts[0]}'", line_no
                ) from None
            continue

        if len(parts) != 2:
            raise TopologyParseError(f"expected 'u v', got '{line}'", line_no)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise TopologyParseError(
                f"node indices must be integers, got '{line}'", line_no
            ) from None
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise TopologyValidationError(
                f"line {line_no}: edge ({u}, {v}) outside node range [0, {node_count})"
            )
        edges.append((u, v))

    if node_count is None:
        raise TopologyParseError("missing node count header")

    return Topology.from_edges(node_count, edges, name=name)


def load_topology_file(path: Path | str) -> Topology:
    """Load an edge-list file; the file stem becomes the topology name."""
    path = Path(path)
    topology = load_topology(path.read_text(), name=path.stem)
    logger.info(
        f"Loaded topology '{topology.name}': "
        f"{topology.node_count} nodes, {len(topology.edges)} links"
    )
    return topology


def shipped_topology(name: str) -> Topology:
    """Load one of the backbone topologies shipped in data/topologies/.

    Raises:
        FileNotFoundError: If no such topology file exists.
    """
    path = TOPOLOGIES_DIR / f"{name.lower()}.txt"
    if not path.exists():
        raise FileNotFoundError(f"Topology file not found: {path}")
    return load_topology_file(path)


def serialize_topology(topology: Topology) -> str:
    """Render as an edge-list document with LF endings and sorted edges."""
    lines = []
    if topology.name:
        lines.append(f"# {topology.name}")
    lines.append(str(topology.node_count))
    lines.extend(f"{u} {v}" for u, v in topology.sorted_edges)
    return "\n".join(lines) + "\n"


def apply_mapping(topology: Topology, mapping: NodeMapping) -> Topology:
    """Relabel every node u as mapping[u].

    Raises:
        MappingError: If the mapping length differs from the node count.
    """
    if len(mapping) != topology.node_count:
        raise MappingError(
            f"mapping covers {len(mapping)} nodes, topology has {topology.node_count}"
        )
    return Topology(
        node_count=topology.node_count,
        edges=frozenset(
            normalize_edge(mapping[u], mapping[v]) for u, v in topology.edges
        ),
        name=topology.name,
    )


def invert_mapping(mapping: NodeMapping) -> NodeMapping:
    inverse = [0] * len(mapping)
    for old, new in enumerate(mapping.permutation):
        inverse[new] = old
    return NodeMapping(tuple(inverse), seed=mapping.seed, index=mapping.index)


def generate_mappings(n: int, count: int, seed: int) -> list[NodeMapping]:
    """Generate `count` reproducible relabelings of n nodes, identity first.

    Each non-identity mapping is a Fisher-Yates shuffle (numpy
    ``Generator.permutation``) drawn from its own child of a
    ``SeedSequence(seed)``, so mapping i never depends on how many
    mappings were requested.
    """
    if count < 1:
        raise ValueError(f"mapping count must be at least 1, got {count}")

    mappings = [NodeMapping(tuple(range(n)), seed=seed, index=0)]
    children = np.random.SeedSequence(seed).spawn(count - 1)
    for index, child in enumerate(children, 1):
        rng = np.random.default_rng(child)
        permutation = tuple(int(x) for x in rng.permutation(n))
        mappings.append(NodeMapping(permutation, seed=seed, index=index))
    return mappings


def has_bridge(topology: Topology) -> tuple[bool, list[Edge]]:
    """Report whether any link's removal disconnects its component."""
    bridges = sorted(normalize_edge(u, v) for u, v in nx.bridges(topology.graph))
    return bool(bridges), bridges


def edges_of_walk(walk: Sequence[int]) -> list[Edge]:
    """Undirected edges traversed by consecutive walk entries, in order."""
    return [normalize_edge(a, b) for a, b in zip(walk, walk[1:], strict=False)]
