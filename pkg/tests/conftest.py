"""Shared fixtures: small games, a graph corpus and JSON input files."""

import json
from pathlib import Path
from typing import Any, Callable

import networkx as nx
import numpy as np
import pytest

from sparse_carath.nash import BimatrixGame, SolveConfig
from sparse_carath.subgraph import Graph

MATCHING_PENNIES = [[1.0, -1.0], [-1.0, 1.0]]

# No single column of C is within eps/2 of C y for any eps-equilibrium y.
NO_PURE_COLUMN_B = [[-1.0, 0.5], [0.5, -1.0]]


def bowtie() -> nx.Graph:
    """Two triangles sharing vertex 2."""
    return nx.Graph([(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)])


GRAPH_CORPUS = {
    "K4": nx.complete_graph(4),
    "empty5": nx.empty_graph(5),
    "path6": nx.path_graph(6),
    "star4": nx.star_graph(4),
    "petersen": nx.petersen_graph(),
    "cycle6": nx.cycle_graph(6),
    "K23": nx.complete_bipartite_graph(2, 3),
    "bowtie": bowtie(),
    "K5": nx.complete_graph(5),
}


@pytest.fixture
def matching_pennies() -> BimatrixGame:
    A = np.array(MATCHING_PENNIES)
    return BimatrixGame(A, -A)


@pytest.fixture
def coordination() -> BimatrixGame:
    return BimatrixGame(np.eye(2), np.eye(2))


@pytest.fixture
def no_pure_column_game() -> BimatrixGame:
    return BimatrixGame(np.array(MATCHING_PENNIES), np.array(NO_PURE_COLUMN_B))


@pytest.fixture
def small_config() -> SolveConfig:
    return SolveConfig(eps=0.1, max_multiset_size=2, workers=1)


@pytest.fixture(params=sorted(GRAPH_CORPUS))
def corpus_graph(request: Any) -> Graph:
    return Graph.from_networkx(GRAPH_CORPUS[request.param])


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[str, Any], Path]:
    """Write ``payload`` to ``tmp_path / name`` and return the path."""

    def write(name: str, payload: Any) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return path

    return write
