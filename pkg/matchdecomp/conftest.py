"""conftest.py
Configuração compartilhada do pytest: coloca a raiz do pacote no sys.path,
registra o marcador ``slow`` e expõe o exemplo de seis nós como fixture.
"""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from backend.graph_core import Decomposition, DemandMatrix, Matching, WeightedGraph  # noqa: E402

SIX_NODE_EDGES = [
    (0, 3, 0.4), (0, 4, 0.6), (1, 2, 0.1), (1, 3, 0.3), (1, 4, 0.4),
    (1, 5, 0.2), (2, 3, 0.2), (2, 5, 0.7), (3, 5, 0.1),
]
SIX_NODE_MATCHINGS = [
    [(0, 4), (1, 2), (3, 5)],
    [(0, 4), (1, 5), (2, 3)],
    [(0, 4), (1, 3), (2, 5)],
    [(0, 3), (1, 4), (2, 5)],
]
SIX_NODE_ALPHAS = [0.1, 0.2, 0.3, 0.4]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: verificações em nível de corpus (demoradas)")


@pytest.fixture
def six_node_graph() -> WeightedGraph:
    return WeightedGraph.from_edges(6, SIX_NODE_EDGES)


@pytest.fixture
def six_node_demand(six_node_graph) -> DemandMatrix:
    return DemandMatrix(six_node_graph)


@pytest.fixture
def six_node_decomposition() -> Decomposition:
    return Decomposition(tuple(
        (Matching.of(edges), alpha) for edges, alpha in zip(SIX_NODE_MATCHINGS, SIX_NODE_ALPHAS)
    ))


@pytest.fixture
def triangle() -> WeightedGraph:
    return WeightedGraph.from_edges(3, [(0, 1, 0.3), (1, 2, 0.5), (0, 2, 0.2)])


@pytest.fixture
def k4() -> WeightedGraph:
    return WeightedGraph.from_edges(4, [(u, v, 0.1 * (u + v + 1)) for u in range(4) for v in range(u + 1, 4)])
