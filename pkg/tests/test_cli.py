"""Tests for the command-line surface and its exit codes."""

import pytest

from qcycle.cli import EXIT_INFEASIBLE, EXIT_IO, EXIT_USAGE, main
from qcycle.services.quorum import QUORUMS_DIR


@pytest.fixture
def triangle_files(tmp_path):
    topology = tmp_path / "triangle.txt"
    topology.write_text("3\n0 1\n1 2\n0 2\n")
    bases = tmp_path / "bases.txt"
    bases.write_text("3 1 2 0 1\n")
    return topology, bases


class TestUsage:
    """Test argument errors."""

    def test_unknown_command(self):
        assert main(["bogus"]) == EXIT_USAGE

    def test_missing_subaction(self):
        assert main(["quorum"]) == EXIT_USAGE

    def test_bad_integer(self):
        assert main(["quorum", "find", "seven", "1"]) == EXIT_USAGE


class TestQuorumCommand:
    """Test quorum find and verify."""

    def test_find(self, capsys):
        assert main(["quorum", "find", "7", "1"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "7 1 3 0 1 3"
        assert "counting bound 3" in out[1]

    def test_find_redundant_reports_estimate(self, capsys):
        assert main(["quorum", "find", "7", "2"]) == 0
        assert "R=1 size 3" in capsys.readouterr().out

    def test_infeasible(self):
        assert main(["quorum", "find", "5", "6"]) == EXIT_INFEASIBLE

    def test_verify_shipped(self, capsys):
        assert main(["quorum", "verify", str(QUORUMS_DIR / "difference_sets.txt")]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines
        assert all(line.endswith("ok") for line in lines)

    def test_verify_bad_file(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("7 2 3 0 1 3\n")
        assert main(["quorum", "verify", str(bad)]) == EXIT_IO


class TestRouteAndDirect:
    """Test route and direct on the triangle."""

    def test_route(self, triangle_files, capsys):
        topology, bases = triangle_files
        assert main(["route", str(topology), str(bases)]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "0 0: 0 1 2 0"
        assert out[-1] == "# links used 9 (18 paired)"

    def test_route_missing_base(self, triangle_files):
        topology, bases = triangle_files
        code = main(["route", str(topology), str(bases), "--redundancy", "2"])
        assert code == EXIT_INFEASIBLE

    def test_route_missing_file(self, tmp_path, triangle_files):
        _, bases = triangle_files
        assert main(["route", str(tmp_path / "absent.txt"), str(bases)]) == EXIT_IO

    def test_route_malformed_topology(self, tmp_path, triangle_files):
        _, bases = triangle_files
        broken = tmp_path / "broken.txt"
        broken.write_text("3\n0 1 2\n")
        assert main(["route", str(broken), str(bases)]) == EXIT_IO

    @pytest.mark.parametrize("strategy", ["forward", "random", "greedy"])
    def test_direct(self, triangle_files, capsys, strategy):
        topology, bases = triangle_files
        args = ["direct", "--strategy", strategy, str(topology), str(bases)]
        assert main(args) == 0
        out = capsys.readouterr().out
        assert out.startswith("0 ")
        assert "# missing" in out

    def test_direct_greedy_covers_triangle(self, triangle_files, capsys):
        topology, bases = triangle_files
        assert main(["direct", str(topology), str(bases)]) == 0
        assert "# missing 0 pairs (0.00%)" in capsys.readouterr().out


class TestSimulateAndReport:
    """Test a small end-to-end run."""

    def test_simulate_then_report(self, triangle_files, tmp_path, capsys):
        topology, _ = triangle_files
        config = tmp_path / "tri.conf"
        config.write_text(
            f"topology={topology.name}\nredundancy=1\nstrategies=forward,greedy\n"
            "mappings=2\noutput_dir=out\n"
        )
        assert main(["simulate", str(config)]) == 0
        assert (tmp_path / "out" / "summary.csv").exists()
        first = capsys.readouterr().out

        assert main(["report", str(tmp_path / "out")]) == 0
        assert capsys.readouterr().out == first

    def test_output_dir_override(self, triangle_files, tmp_path):
        topology, _ = triangle_files
        config = tmp_path / "tri.conf"
        config.write_text(f"topology={topology}\nredundancy=1\nmappings=1\n")
        target = tmp_path / "elsewhere"
        assert main(["simulate", str(config), "--output-dir", str(target)]) == 0
        assert (target / "mappings.csv").exists()

    def test_bad_config(self, tmp_path):
        config = tmp_path / "bad.conf"
        config.write_text("topology=a.txt\nmapings=3\n")
        assert main(["simulate", str(config)]) == EXIT_USAGE

    def test_report_missing_dir(self, tmp_path):
        assert main(["report", str(tmp_path / "nothing")]) == EXIT_IO
