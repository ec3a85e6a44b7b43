import numpy as np
import pytest

from backend.graph_core import (
    Decomposition,
    DemandMatrix,
    Matching,
    WeightedGraph,
    approximation_error,
    bitstring_to_subgraph,
    build_edge_indexing,
    is_matching,
    matching_weight,
    residual_graph,
)


def test_edge_indexing_is_lexicographic(triangle):
    idx = build_edge_indexing(triangle)
    assert idx.edges == ((0, 1), (0, 2), (1, 2))
    assert idx.index_of((2, 0)) == 1


def test_edge_indexing_empty_and_six_node(six_node_graph):
    empty = WeightedGraph.from_edges(3, [])
    assert build_edge_indexing(empty).size == 0
    assert build_edge_indexing(six_node_graph).size == 9


def test_bitstring_to_subgraph():
    g = WeightedGraph.from_edges(5, [(0, 1, 0.1), (1, 2, 0.1), (2, 3, 0.1), (3, 4, 0.1)])
    idx = build_edge_indexing(g)
    assert bitstring_to_subgraph("0101", idx) == {idx.edges[1], idx.edges[3]}
    assert bitstring_to_subgraph("0000", idx) == frozenset()
    with pytest.raises(ValueError):
        bitstring_to_subgraph("010", idx)


def test_all_ones_on_triangle_is_not_a_matching(triangle):
    idx = build_edge_indexing(triangle)
    edges = bitstring_to_subgraph("111", idx)
    assert len(edges) == 3
    assert not is_matching(edges, triangle)


def test_is_matching():
    assert is_matching({(0, 1), (2, 3)})
    assert not is_matching({(0, 1), (1, 2)})
    assert is_matching(set())


def test_graph_rejects_duplicates_and_self_loops():
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 1, 0.1), (1, 0, 0.2)])
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(1, 1, 0.1)])


def test_demand_matrix_rejects_overloaded_node():
    g = WeightedGraph.from_edges(3, [(0, 1, 0.6), (0, 2, 0.6)])
    with pytest.raises(ValueError):
        DemandMatrix(g)


def test_error_of_empty_decomposition(six_node_demand):
    expected = 2 * (0.4**2 + 0.6**2 + 0.1**2 + 0.3**2 + 0.4**2 + 0.2**2 + 0.2**2 + 0.7**2 + 0.1**2) / 36
    assert approximation_error(six_node_demand, Decomposition()) == pytest.approx(expected, abs=1e-15)


def test_worked_example_reconstructs_exactly(six_node_demand, six_node_decomposition):
    assert approximation_error(six_node_demand, six_node_decomposition) <= 1e-15


def test_error_dimension_mismatch(six_node_demand):
    far = Decomposition(((Matching.of([(6, 7)]), 0.5),))
    with pytest.raises(ValueError):
        approximation_error(six_node_demand, far)


def test_residual_graph(six_node_demand, six_node_decomposition):
    assert residual_graph(six_node_demand, Decomposition()).weight_map == six_node_demand.graph.weight_map
    exact = residual_graph(six_node_demand, six_node_decomposition)
    assert all(abs(w) <= 1e-12 for *_, w in exact.edges)

    single = DemandMatrix(WeightedGraph.from_edges(2, [(0, 1, 0.4)]))
    res = residual_graph(single, Decomposition(((Matching.of([(0, 1)]), 1.0),)))
    assert res.weight(1, 0) == pytest.approx(-0.6)


def test_residual_graph_is_symmetric_as_matrix(six_node_demand, six_node_decomposition):
    half = Decomposition(tuple((m, a / 2) for m, a in six_node_decomposition.entries))
    mat = residual_graph(six_node_demand, half).to_dense()
    assert np.array_equal(mat, mat.T)


def test_matching_weight(six_node_graph):
    assert matching_weight(Matching.of([]), six_node_graph) == 0.0
    assert matching_weight(Matching.of([(0, 4), (2, 5), (1, 3)]), six_node_graph) == pytest.approx(1.6)
    # arestas fora do grafo não contam
    assert matching_weight(Matching.of([(0, 1)]), six_node_graph) == 0.0


def test_decomposition_invariants():
    m = Matching.of([(0, 1)])
    with pytest.raises(ValueError):
        Decomposition(((m, -0.1),))
    with pytest.raises(ValueError):
        Decomposition(((m, 0.7), (Matching.of([(2, 3)]), 0.7)))
    decomp = Decomposition(((m, 0.5), (Matching.of([(2, 3)]), 0.0)))
    assert decomp.length == 1


def test_matching_rejects_shared_node():
    with pytest.raises(ValueError):
        Matching.of([(0, 1), (1, 2)])
