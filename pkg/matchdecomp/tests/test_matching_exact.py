import numpy as np
import pytest

from backend.graph_core import Matching, WeightedGraph, is_matching, matching_weight
from backend.matching_exact import enumerate_matchings, max_weight_matching


def _random_graph(rng, rational=False):
    n = int(rng.integers(2, 11))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    keep = rng.random(len(pairs)) < 0.5
    chosen = [p for p, k in zip(pairs, keep) if k][:24]
    if rational:
        weights = rng.integers(-8, 9, size=len(chosen)) / 8.0
    else:
        weights = rng.uniform(-1.0, 1.0, size=len(chosen))
    return WeightedGraph.from_edges(n, [(u, v, w) for (u, v), w in zip(chosen, weights)])


def test_single_edge():
    sol = max_weight_matching(WeightedGraph.from_edges(2, [(0, 1, 0.7)]))
    assert sol.matching == Matching.of([(0, 1)])
    assert sol.weight == pytest.approx(0.7)


def test_all_negative_gives_empty():
    sol = max_weight_matching(WeightedGraph.from_edges(3, [(0, 1, -0.2), (1, 2, -0.1)]))
    assert len(sol.matching) == 0
    assert sol.weight == 0.0


def test_six_node_example(six_node_graph):
    sol = max_weight_matching(six_node_graph)
    assert sol.matching == Matching.of([(0, 4), (1, 3), (2, 5)])
    assert sol.weight == pytest.approx(1.6, abs=1e-12)


def test_tie_break_prefers_smallest_edge_sequence():
    # dois matchings perfeitos de mesmo peso no ciclo de 4 nós
    g = WeightedGraph.from_edges(4, [(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5), (0, 3, 0.5)])
    assert max_weight_matching(g).matching.key == ((0, 1), (2, 3))


@pytest.mark.parametrize("rational", [True, False])
def test_oracle_equivalence(rational):
    rng = np.random.default_rng(2024 if rational else 7)
    for _ in range(100):
        g = _random_graph(rng, rational)
        sol = max_weight_matching(g)
        best = max(matching_weight(m, g) for m in enumerate_matchings(g))
        assert is_matching(sol.matching.edges, g)
        assert sol.weight == pytest.approx(best, abs=1e-12)
        assert all(w > 0 for e, w in g.weight_map.items() if e in sol.matching.edges)


def test_scaling_leaves_argmax_unchanged():
    rng = np.random.default_rng(11)
    for _ in range(20):
        g = _random_graph(rng)
        scaled = WeightedGraph(g.n, tuple((u, v, 3.5 * w) for u, v, w in g.edges))
        assert max_weight_matching(g).matching == max_weight_matching(scaled).matching


def test_enumeration_counts(triangle, k4):
    assert len(enumerate_matchings(triangle)) == 4
    path = WeightedGraph.from_edges(3, [(0, 1, 0.1), (1, 2, 0.1)])
    assert len(enumerate_matchings(path)) == 3
    assert len(enumerate_matchings(k4)) == 10


def test_enumeration_cap():
    g = WeightedGraph.from_edges(8, [(u, v, 0.1) for u in range(8) for v in range(u + 1, 8)])
    with pytest.raises(RuntimeError):
        enumerate_matchings(g, cap=24)
