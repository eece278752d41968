"""Tests for topology ingest, node mappings and bridge detection."""

import pytest

from qcycle.services.topology import (
    MappingError,
    NodeMapping,
    Topology,
    TopologyParseError,
    TopologyValidationError,
    apply_mapping,
    edges_of_walk,
    generate_mappings,
    has_bridge,
    invert_mapping,
    load_topology,
    serialize_topology,
)


class TestLoadTopology:
    """Test edge-list parsing and validation."""

    def test_triangle(self):
        """Header plus three edge lines gives the triangle."""
        topology = load_topology("3\n0 1\n1 2\n2 0")
        assert topology.node_count == 3
        assert topology.edges == {(0, 1), (1, 2), (0, 2)}

    def test_comments_blank_lines_and_crlf(self):
        """Comment lines, blank lines and CRLF endings are accepted."""
        text = "# ring\r\n4\r\n\r\n0 1\r\n# chord-free\r\n1 2\r\n2 3\r\n3 0\r\n"
        assert len(load_topology(text).edges) == 4

    def test_self_loop_rejected(self):
        """A self-loop is a validation error."""
        with pytest.raises(TopologyValidationError):
            load_topology("3\n0 0")

    def test_duplicate_edge_rejected(self):
        """The same link listed in both orientations is a duplicate."""
        with pytest.raises(TopologyValidationError, match="duplicate"):
            load_topology("3\n0 1\n1 0")

    def test_index_out_of_range_rejected(self):
        """Endpoints must be below N."""
        with pytest.raises(TopologyValidationError):
            load_topology("3\n0 3")

    def test_malformed_line_reports_line_number(self):
        """Parse errors carry the offending line."""
        with pytest.raises(TopologyParseError) as exc:
            load_topology("3\n0 1\n1 2 3")
        assert exc.value.line == 3

    def test_missing_header(self):
        """A document with no header is a parse error."""
        with pytest.raises(TopologyParseError):
            load_topology("# nothing here\n")

    def test_serialize_then_load(self):
        """Serializing emits sorted LF lines that load back to the same topology."""
        topology = load_topology("4\n3 2\n0 1\n2 0\n", name="net")
        text = serialize_topology(topology)
        assert text == "# net\n4\n0 1\n0 2\n2 3\n"
        assert load_topology(text, name="net") == topology


class TestTopology:
    """Test adjacency on the immutable topology value."""

    def test_adjacency_is_symmetric(self, ring6):
        """Every edge shows up from both endpoints."""
        for u, v in ring6.edges:
            assert v in ring6.neighbors(u)
            assert u in ring6.neighbors(v)
            assert ring6.has_edge(v, u)

    def test_unnormalized_edge_rejected(self):
        """Edges passed directly must already be (small, large)."""
        with pytest.raises(TopologyValidationError):
            Topology(3, frozenset({(1, 0)}))

    def test_edges_of_walk(self):
        """Walk steps become normalized undirected edges."""
        assert edges_of_walk([0, 2, 1, 0]) == [(0, 2), (1, 2), (0, 1)]


class TestMappings:
    """Test relabeling and mapping generation."""

    def test_identity_mapping(self, triangle):
        """The identity leaves the topology unchanged."""
        assert apply_mapping(triangle, NodeMapping((0, 1, 2))) == triangle

    def test_complete_graph_is_invariant(self, triangle):
        """Relabeling a complete graph gives the same edge set."""
        mapped = apply_mapping(triangle, NodeMapping((1, 2, 0)))
        assert mapped.edges == triangle.edges

    def test_path_relabel(self):
        """Edge (u, v) becomes (m[u], m[v])."""
        path = load_topology("3\n0 1\n1 2")
        mapped = apply_mapping(path, NodeMapping((2, 0, 1)))
        assert mapped.edges == {(0, 2), (0, 1)}

    def test_inverse_restores_edges(self, two_triangles):
        """Applying a mapping then its inverse is the identity on edges."""
        for mapping in generate_mappings(6, 20, seed=3):
            mapped = apply_mapping(two_triangles, mapping)
            restored = apply_mapping(mapped, invert_mapping(mapping))
            assert restored.edges == two_triangles.edges

    def test_length_mismatch(self, triangle):
        """A mapping for a different node count is rejected."""
        with pytest.raises(MappingError):
            apply_mapping(triangle, NodeMapping((0, 1, 2, 3)))

    def test_non_bijection_rejected(self):
        """Permutations must hit every index exactly once."""
        with pytest.raises(MappingError):
            NodeMapping((0, 0, 2))

    def test_single_mapping_is_identity(self):
        """The first mapping is always the identity."""
        mappings = generate_mappings(3, 1, seed=7)
        assert len(mappings) == 1
        assert mappings[0].is_identity

    def test_all_bijections(self):
        """Every generated mapping is a permutation of range(n)."""
        mappings = generate_mappings(5, 100, seed=42)
        assert len(mappings) == 100
        for mapping in mappings:
            assert sorted(mapping.permutation) == [0, 1, 2, 3, 4]

    def test_reproducible(self):
        """Same seed, same mappings."""
        assert generate_mappings(14, 100, seed=1) == generate_mappings(14, 100, seed=1)

    def test_prefix_stable(self):
        """Mapping i does not depend on how many mappings were requested."""
        assert generate_mappings(10, 5, seed=9) == generate_mappings(10, 12, seed=9)[:5]

    def test_seeds_differ(self):
        """Different seeds give different non-identity mappings."""
        a = generate_mappings(14, 3, seed=1)
        b = generate_mappings(14, 3, seed=2)
        assert a[1].permutation != b[1].permutation

    def test_zero_count_rejected(self):
        with pytest.raises(ValueError):
            generate_mappings(4, 0, seed=0)


class TestBridges:
    """Test bridge detection."""

    def test_triangle_has_none(self, triangle):
        assert has_bridge(triangle) == (False, [])

    def test_path_is_all_bridges(self):
        path = load_topology("3\n0 1\n1 2")
        assert has_bridge(path) == (True, [(0, 1), (1, 2)])

    def test_joined_triangles(self, two_triangles):
        """Only the joining link is a bridge."""
        assert has_bridge(two_triangles) == (True, [(2, 3)])
