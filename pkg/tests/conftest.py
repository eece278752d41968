"""Shared small topologies."""

import pytest

from qcycle.services.topology import Topology


@pytest.fixture
def triangle() -> Topology:
    return Topology.from_edges(3, [(0, 1), (1, 2), (0, 2)], name="triangle")


@pytest.fixture
def ring6() -> Topology:
    return Topology.from_edges(6, [(i, (i + 1) % 6) for i in range(6)], name="ring6")


@pytest.fixture
def path4() -> Topology:
    return Topology.from_edges(4, [(0, 1), (1, 2), (2, 3)], name="path4")


@pytest.fixture
def two_triangles() -> Topology:
    """Triangles {0,1,2} and {3,4,5} joined by the bridge (2, 3)."""
    return Topology.from_edges(
        6,
        [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)],
        name="two_triangles",
    )


@pytest.fixture
def k4() -> Topology:
    edges = [(u, v) for u in range(4) for v in range(u + 1, 4)]
    return Topology.from_edges(4, edges, name="k4")
