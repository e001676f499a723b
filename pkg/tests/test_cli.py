"""End-to-end tests for the sparse-carath command line."""

import json
from typing import Any, Dict

import numpy as np
import pytest
from typer.testing import CliRunner

from sparse_carath import __version__
from sparse_carath.cli import app

from .conftest import MATCHING_PENNIES, NO_PURE_COLUMN_B

runner = CliRunner()


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    """Run from an empty directory so no stray carath_config.json is picked up."""
    monkeypatch.chdir(tmp_path)


def payload_of(result) -> Dict[str, Any]:
    lines = [line for line in result.stdout.splitlines() if line.startswith("{")]
    assert lines, result.output
    return json.loads(lines[-1])


def mp_game() -> Dict[str, Any]:
    return {"A": MATCHING_PENNIES, "B": (-np.array(MATCHING_PENNIES)).tolist()}


class TestGlobal:
    def test_help(self):
        result = runner.invoke(app, ["--help"])
        assert result.exit_code == 0
        assert "nash" in result.output

    def test_version_header(self):
        result = runner.invoke(app, ["lowerbound", "--d", "16", "--eps", "0.25"])
        assert __version__ in result.output

    def test_missing_config_file(self):
        result = runner.invoke(app, ["--config", "nowhere.json", "lowerbound", "--d", "16", "--eps", "0.25"])
        assert result.exit_code == 1
        assert "Error:" in result.output

    def test_config_file_supplies_defaults(self, write_json):
        config = write_json("custom.json", {"eps": 0.25})
        result = runner.invoke(app, ["--config", str(config), "lowerbound", "--d", "16"])
        assert result.exit_code == 0, result.output
        assert payload_of(result)["eps"] == 0.25


class TestLowerBound:
    def test_pass(self):
        result = runner.invoke(app, ["lowerbound", "--d", "16", "--p", "2", "--eps", "0.25"])
        assert result.exit_code == 0, result.output
        payload = payload_of(result)
        assert payload["status"] == "PASS"
        assert [row["k"] for row in payload["rows"]] == [1, 2, 3]

    def test_hundred_dimensions(self):
        result = runner.invoke(app, ["lowerbound", "--d", "100", "--p", "2", "--eps", "0.1"])
        assert result.exit_code == 0, result.output
        assert len(payload_of(result)["rows"]) == 24

    def test_precondition_failure(self):
        result = runner.invoke(app, ["lowerbound", "--d", "10", "--eps", "0.1"])
        assert result.exit_code == 1
        assert "Error:" in result.output
        assert "eps" in result.output

    def test_output_file(self, tmp_path):
        target = tmp_path / "report.json"
        result = runner.invoke(app, ["lowerbound", "--d", "16", "--eps", "0.25", "--output", str(target)])
        assert result.exit_code == 0, result.output
        assert json.loads(target.read_text())["status"] == "PASS"


class TestNash:
    def test_solve(self, write_json):
        game = write_json("game.json", mp_game())
        result = runner.invoke(app, ["nash", "solve", "--game", str(game), "--eps", "0.1", "--max-multiset", "2"])
        assert result.exit_code == 0, result.output
        payload = payload_of(result)
        assert payload["status"] == "OK"
        assert max(payload["row_regret"], payload["col_regret"]) <= 0.1
        assert payload["u_used"] == [0]

    def test_exhausted_exits_two(self, write_json):
        game = write_json("game.json", {"A": MATCHING_PENNIES, "B": NO_PURE_COLUMN_B})
        result = runner.invoke(app, ["nash", "solve", "--game", str(game), "--eps", "0.1", "--max-multiset", "1"])
        assert result.exit_code == 2
        payload = payload_of(result)
        assert payload["status"] == "EXHAUSTED"
        assert payload["largest_size"] == 1

    def test_verify(self, write_json):
        game = write_json("game.json", mp_game())
        result = runner.invoke(
            app, ["nash", "verify", "--game", str(game), "--x", "[1, 0]", "--y", "[1, 0]", "--eps", "0.5"]
        )
        assert result.exit_code == 0, result.output
        payload = payload_of(result)
        assert payload["col_regret"] == pytest.approx(2.0)
        assert payload["eps_nash"] is False

    def test_verify_malformed_strategy(self, write_json):
        game = write_json("game.json", mp_game())
        result = runner.invoke(app, ["nash", "verify", "--game", str(game), "--x", "[1,", "--y", "[1, 0]"])
        assert result.exit_code == 1
        assert "malformed JSON" in result.output

    def test_verify_strategy_of_wrong_type(self, write_json):
        game = write_json("game.json", mp_game())
        result = runner.invoke(app, ["nash", "verify", "--game", str(game), "--x", "{\"a\": 1}", "--y", "[1, 0]"])
        assert result.exit_code == 1
        assert "x: must be a list of numbers" in result.output

    def test_oracle(self, write_json):
        game = write_json("game.json", mp_game())
        result = runner.invoke(app, ["nash", "oracle", "--game", str(game)])
        assert result.exit_code == 0, result.output
        [equilibrium] = payload_of(result)["equilibria"]
        assert equilibrium["x"] == pytest.approx([0.5, 0.5])

    def test_small_prob(self, write_json):
        game = write_json("game.json", mp_game())
        result = runner.invoke(
            app, ["nash", "small-prob", "--game", str(game), "--m", "2", "--max-multiset", "2"]
        )
        assert result.exit_code == 0, result.output

    def test_both_sparse(self, write_json):
        game = write_json("game.json", {"A": [[1, 0], [0, 1]], "B": [[1, 0], [0, 1]]})
        result = runner.invoke(app, ["nash", "both-sparse", "--game", str(game), "--max-multiset", "1"])
        assert result.exit_code == 0, result.output
        assert payload_of(result)["w_used"] == [0]

    def test_malformed_game_file(self, tmp_path):
        path = tmp_path / "game.json"
        path.write_text("{not json")
        result = runner.invoke(app, ["nash", "solve", "--game", str(path)])
        assert result.exit_code == 1
        assert "malformed JSON" in result.output

    def test_missing_game_file(self):
        result = runner.invoke(app, ["nash", "solve", "--game", "absent.json"])
        assert result.exit_code == 1
        assert "not found" in result.output

    def test_payoff_out_of_range(self, write_json):
        game = write_json("game.json", {"A": [[2, 0], [0, 1]], "B": [[0, 0], [0, 0]]})
        result = runner.invoke(app, ["nash", "solve", "--game", str(game)])
        assert result.exit_code == 1
        assert "A:" in result.output


class TestGraphs:
    BOWTIE = {"n": 5, "edges": [[0, 1], [0, 2], [1, 2], [2, 3], [2, 4], [3, 4]]}

    def test_ndks_brute(self, write_json):
        graph = write_json("graph.json", self.BOWTIE)
        result = runner.invoke(app, ["ndks", "brute", "--graph", str(graph), "--k", "3"])
        assert result.exit_code == 0, result.output
        payload = payload_of(result)
        assert payload["vertices"] == [0, 1, 2]
        assert payload["density"] == pytest.approx(1 / 3)

    def test_ndks_solve(self, write_json):
        graph = write_json("graph.json", self.BOWTIE)
        result = runner.invoke(
            app, ["ndks", "solve", "--graph", str(graph), "--k", "3", "--eps", "0.5", "--max-multiset", "1"]
        )
        assert result.exit_code == 0, result.output
        assert payload_of(result)["density"] == pytest.approx(1 / 3)

    def test_dkbs(self, write_json):
        graph = write_json("graph.json", {"n": 5, "edges": [[0, 2], [0, 3], [0, 4], [1, 2], [1, 3], [1, 4]]})
        brute = runner.invoke(app, ["dkbs", "brute", "--graph", str(graph), "--k", "2"])
        solved = runner.invoke(app, ["dkbs", "solve", "--graph", str(graph), "--k", "2", "--max-multiset", "1"])
        assert brute.exit_code == solved.exit_code == 0
        assert payload_of(brute)["density"] == pytest.approx(1.0)
        assert payload_of(solved)["density"] == pytest.approx(1.0)

    def test_self_loop(self, write_json):
        graph = write_json("graph.json", {"n": 3, "edges": [[1, 1]]})
        result = runner.invoke(app, ["ndks", "brute", "--graph", str(graph), "--k", "2"])
        assert result.exit_code == 1
        assert "self-loop" in result.output

    @pytest.mark.parametrize(
        "graph, field",
        [({"n": [1], "edges": 5}, "n:"), ({"n": 4, "edges": 5}, "edges:"), ({"n": 4, "edges": [["a"]]}, "edges:")],
    )
    @pytest.mark.parametrize("command", ["ndks", "dkbs"])
    def test_malformed_graph_file(self, write_json, command, graph, field):
        path = write_json("graph.json", graph)
        result = runner.invoke(app, [command, "solve", "--graph", str(path), "--k", "2", "--max-multiset", "1"])
        assert result.exit_code == 1
        assert "Error:" in result.output
        assert field in result.output
        assert "Traceback" not in result.output
        assert not isinstance(result.exception, (TypeError, KeyError))

    def test_uncapped_search_warns(self, write_json):
        graph = write_json("graph.json", {"n": 5, "edges": [[0, 1]]})
        result = runner.invoke(app, ["dkbs", "solve", "--graph", str(graph), "--k", "6"])
        assert result.exit_code == 1
        assert "--max-multiset" in result.output

    def test_capped_search_is_quiet(self, write_json):
        graph = write_json("graph.json", {"n": 5, "edges": [[0, 1]]})
        result = runner.invoke(app, ["dkbs", "solve", "--graph", str(graph), "--k", "6", "--max-multiset", "1"])
        assert result.exit_code == 1
        assert "Warning:" not in result.output


class TestGeometry:
    def test_bvn_decompose(self, write_json):
        matrix = write_json("D.json", {"D": [[0.5, 0.5], [0.5, 0.5]]})
        result = runner.invoke(app, ["bvn", "decompose", "--matrix", str(matrix)])
        assert result.exit_code == 0, result.output
        payload = payload_of(result)
        assert sum(payload["weights"]) == pytest.approx(1.0)
        assert payload["reconstruction_error"] <= 1e-9

    def test_bvn_approx(self, write_json):
        matrix = write_json("D.json", [[0.25] * 4] * 4)
        result = runner.invoke(app, ["bvn", "approx", "--matrix", str(matrix), "--eps", "0.25"])
        assert result.exit_code == 0, result.output
        payload = payload_of(result)
        assert payload["k"] == 512
        assert payload["error"] <= 0.25

    def test_bvn_not_doubly_stochastic(self, write_json):
        matrix = write_json("D.json", [[1.0, 0.0], [1.0, 0.0]])
        result = runner.invoke(app, ["bvn", "decompose", "--matrix", str(matrix)])
        assert result.exit_code == 1

    def test_rainbow(self, write_json):
        data = {
            "classes": [[[1, 0], [-1, 0]], [[0, 1], [0, -1]], [[1, 1], [-1, -1]]],
            "mu": [0, 0],
        }
        result = runner.invoke(app, ["rainbow", "--input", str(write_json("rainbow.json", data)), "--eps", "0.1"])
        assert result.exit_code == 0, result.output
        payload = payload_of(result)
        assert payload["rainbow"] == [0, 0, 1]
        assert payload["weights"] == pytest.approx([1 / 3] * 3, abs=1e-9)

    def test_rainbow_not_found(self, write_json):
        data = {"classes": [[[5, 5]], [[6, 6]], [[7, 7]]], "mu": [0, 0]}
        result = runner.invoke(app, ["rainbow", "--input", str(write_json("rainbow.json", data)), "--eps", "0.1"])
        assert result.exit_code == 2
        assert payload_of(result)["status"] == "NOT_FOUND"

    def test_rainbow_classes_not_a_list(self, write_json):
        data = {"classes": 5, "mu": [0, 0]}
        result = runner.invoke(app, ["rainbow", "--input", str(write_json("rainbow.json", data)), "--eps", "0.1"])
        assert result.exit_code == 1
        assert "classes:" in result.output

    def test_tverberg(self, write_json):
        points = write_json("points.json", {"points": [[0], [1], [2]]})
        result = runner.invoke(app, ["tverberg", "--points", str(points), "--r", "2", "--p", "inf"])
        assert result.exit_code == 0, result.output
        assert payload_of(result)["parts"] == [[0, 2], [1]]


class TestSparsify:
    def test_sparsify(self, write_json):
        rng = np.random.default_rng(0)
        points = rng.uniform(-1.0, 1.0, size=(8, 3))
        points /= np.linalg.norm(points, axis=1, keepdims=True)
        weights = rng.dirichlet(np.ones(8))
        data = {"points": points.tolist(), "target": (weights @ points).tolist(), "weights": weights.tolist()}
        result = runner.invoke(
            app, ["sparsify", "--input", str(write_json("input.json", data)), "--eps", "0.3", "--seed", "5"]
        )
        assert result.exit_code == 0, result.output
        payload = payload_of(result)
        assert payload["achieved_distance"] <= 0.6
        assert len(payload["multiset"]) == payload["sample_count_m"]

    def test_sparsify_without_weights(self, write_json):
        data = {"points": [[0.0], [1.0]], "target": [0.5]}
        result = runner.invoke(app, ["sparsify", "--input", str(write_json("input.json", data))])
        assert result.exit_code == 1
        assert "weights" in result.output

    def test_khintchine(self, write_json):
        vectors = write_json("vectors.json", [[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
        result = runner.invoke(app, ["khintchine", "--vectors", str(vectors), "--trials", "500"])
        assert result.exit_code == 0, result.output
        assert payload_of(result)["holds"] is True
