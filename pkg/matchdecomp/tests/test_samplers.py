import numpy as np
import pytest

from backend.graph_core import Matching, WeightedGraph, build_edge_indexing, is_matching, matching_weight
from backend.qaoa_sim import QubitCapError
from backend.qubo import build_qubo
from backend.samplers import (
    AnnealSchedule,
    SamplerConfig,
    anneal_runs,
    iteration_rng,
    run_seed,
    sample_bitstrings,
    sample_matchings,
    select_top_d,
    valid_rows,
)

SIX_NODE_ROWS = [
    [(0, 4), (1, 2), (3, 5)],
    [(0, 4), (1, 5), (2, 3)],
    [(0, 4), (1, 3), (2, 5)],
    [(0, 3), (1, 4), (2, 5)],
]


def _rows(graph, matchings):
    idx = build_edge_indexing(graph)
    return np.array([Matching.of(m).to_bits(idx) for m in matchings], dtype=np.uint8)


def test_valid_rows(six_node_graph):
    rows = _rows(six_node_graph, SIX_NODE_ROWS)
    invalid = rows[0] | rows[3]
    mask = valid_rows(np.vstack([rows, invalid]), six_node_graph)
    assert mask.tolist() == [True, True, True, True, False]


def test_select_top_d_orders_by_weight(six_node_graph):
    rows = _rows(six_node_graph, SIX_NODE_ROWS)
    bits = np.vstack([rows, rows[2], rows[0] | rows[3]])
    top = select_top_d(bits, six_node_graph, 2)
    assert top == [Matching.of(SIX_NODE_ROWS[2]), Matching.of(SIX_NODE_ROWS[3])]
    assert len(select_top_d(bits, six_node_graph, 10)) == 4


def test_select_top_d_without_edges():
    g = WeightedGraph.from_edges(2, [])
    assert select_top_d(np.zeros((3, 0), dtype=np.uint8), g, 2) == [Matching(frozenset())]


def test_sampler_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(method="tabu")
    with pytest.raises(ValueError):
        SamplerConfig(method="random", shots=3, d=5)
    with pytest.raises(ValueError):
        SamplerConfig(method="random", d=0)


def test_sampler_config_from_config():
    config = {'sampler': {'shots': {'anneal': 77}, 'd': 4, 'seed': 3}, 'qubo': {'penalty_factor': 0.3}}
    cfg = SamplerConfig.from_config(config, "anneal", d=2)
    assert (cfg.shots, cfg.d, cfg.seed, cfg.penalty_factor) == (77, 2, 3, 0.3)


def test_anneal_schedule():
    schedule = AnnealSchedule(t0=3.0, t1=3e-3, sweeps=50)
    temps = schedule.temperatures()
    assert temps[0] == pytest.approx(3.0)
    assert temps[-1] == pytest.approx(3e-3)
    assert np.all(np.diff(temps) < 0)
    with pytest.raises(ValueError):
        AnnealSchedule(t0=1.0, t1=2.0)


def test_anneal_finds_optimum_on_small_graph(six_node_graph):
    model = build_qubo(six_node_graph)
    best = anneal_runs(model, AnnealSchedule.default_for(model), 20, np.random.default_rng(0))
    assert best.shape == (20, 9)
    weights = [matching_weight(Matching.from_bits(row, model.indexing), six_node_graph)
               for row in best if valid_rows(row[None, :], six_node_graph)[0]]
    assert max(weights) == pytest.approx(1.6)


@pytest.mark.parametrize("method,shots", [("random", 500), ("anneal", 30), ("qaoa", 300)])
def test_sample_matchings_returns_distinct_valid_sorted(six_node_graph, method, shots):
    cfg = SamplerConfig(method=method, shots=shots, d=3, qaoa={'maxiter': 30})
    matchings, stats = sample_matchings(cfg, six_node_graph, iteration_rng(0, 0))
    assert len(matchings) <= 3
    assert len(set(matchings)) == len(matchings)
    assert all(is_matching(m.edges, six_node_graph) for m in matchings)
    weights = [matching_weight(m, six_node_graph) for m in matchings]
    assert weights == sorted(weights, reverse=True)
    assert 0.0 <= stats['valid_fraction'] <= 1.0
    if method == "qaoa":
        assert stats['qubits'] == 9
        assert 'gamma' in stats and 'beta' in stats


def test_sampling_is_reproducible(six_node_graph):
    cfg = SamplerConfig(method="anneal", shots=20, d=3)
    a, _ = sample_matchings(cfg, six_node_graph, iteration_rng(4, 2))
    b, _ = sample_matchings(cfg, six_node_graph, iteration_rng(4, 2))
    assert a == b


def test_qaoa_sampler_respects_qubit_cap(six_node_graph):
    cfg = SamplerConfig(method="qaoa", shots=10, d=1, qaoa={'qubit_cap': 4})
    with pytest.raises(QubitCapError):
        sample_matchings(cfg, six_node_graph, iteration_rng(0, 0))


def test_select_top_d_all_invalid(six_node_graph):
    rows = _rows(six_node_graph, SIX_NODE_ROWS)
    invalid = np.vstack([rows[0] | rows[3], rows[1] | rows[3]])
    assert not valid_rows(invalid, six_node_graph).any()
    assert select_top_d(invalid, six_node_graph, 5) == []


def test_random_bits_are_fair():
    path = WeightedGraph.from_edges(4, [(0, 1, 0.3), (1, 2, 0.3), (2, 3, 0.3)])
    cfg = SamplerConfig(method="random", shots=80_000, d=1)
    bits = sample_bitstrings(cfg, path, np.random.default_rng(5))
    assert bits.shape == (80_000, 3)
    codes = bits.astype(np.int64) @ np.array([1, 2, 4])
    freqs = np.bincount(codes, minlength=8) / len(codes)
    assert np.all(np.abs(freqs - 1 / 8) <= 0.01)


def test_anneal_takes_the_single_edge():
    edge = WeightedGraph.from_edges(2, [(0, 1, 0.5)])
    cfg = SamplerConfig(method="anneal", shots=1000, d=1)
    bits = sample_bitstrings(cfg, edge, np.random.default_rng(1))
    assert bits[:, 0].mean() >= 0.99


def test_anneal_on_two_edge_path():
    # λ = 0.2 · (1 + 0.1) = 0.22; custo(10) = −1 é o mínimo entre os 4 estados
    path = WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 0.1)])
    model = build_qubo(path, 0.2)
    assert model.lam == pytest.approx(0.22)
    cfg = SamplerConfig(method="anneal", shots=1000, d=1, penalty_factor=0.2)
    bits = sample_bitstrings(cfg, path, np.random.default_rng(2))
    hits = np.all(bits == np.array([1, 0], dtype=np.uint8), axis=1)
    assert hits.mean() >= 0.99


def test_run_seed_is_stable_and_distinct():
    seed = run_seed(0, "complete_n6_id0", "efcfw+anneal")
    assert seed == run_seed(0, "complete_n6_id0", "efcfw+anneal")
    assert 0 <= seed < 2 ** 63
    others = {run_seed(0, "complete_n6_id1", "efcfw+anneal"),
              run_seed(0, "complete_n6_id0", "efcfw+qaoa"),
              run_seed(1, "complete_n6_id0", "efcfw+anneal")}
    assert seed not in others and len(others) == 3
