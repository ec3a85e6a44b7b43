import math
from functools import reduce

import numpy as np
import pytest
from scipy.stats import chisquare

from backend.qaoa_sim import (
    QubitCapError,
    check_cap,
    circuit_stats,
    cost_spectrum,
    dump_probabilities,
    expectation,
    fixed_params,
    indices_to_bits,
    memory_need,
    most_likely,
    optimize_params,
    sample_state,
    simulate,
)
from backend.graph_core import WeightedGraph
from backend.qubo import build_qubo, qubo_cost


def _dense_state(model, gamma, beta):
    n = model.n_vars
    c = np.array([qubo_cost(model, row) for row in indices_to_bits(np.arange(1 << n), n)])
    rx = np.array([[math.cos(beta), -1j * math.sin(beta)], [-1j * math.sin(beta), math.cos(beta)]])
    mixer = reduce(np.kron, [rx] * n)
    return mixer @ (np.exp(-1j * gamma * c) / math.sqrt(1 << n))


def test_spectrum_bit_convention(k4):
    model = build_qubo(k4)
    spectrum = cost_spectrum(model)
    bits = indices_to_bits(np.arange(1 << model.n_vars), model.n_vars)
    assert np.allclose(spectrum.c, [qubo_cost(model, row) for row in bits], atol=1e-12)
    # inteiro 0b1010 = arestas 1 e 3
    assert list(indices_to_bits(np.array([0b1010]), 4)[0]) == [0, 1, 0, 1]


@pytest.mark.parametrize("gamma,beta", [(0.0, 0.0), (0.7, 0.3), (2.1, -1.2), (5.9, 3.0)])
def test_statevector_matches_dense_oracle(k4, gamma, beta):
    model = build_qubo(k4)
    state = simulate(model, gamma, beta)
    assert np.max(np.abs(state.amplitudes - _dense_state(model, gamma, beta))) <= 1e-10
    assert state.norm() == pytest.approx(1.0, abs=1e-12)


def test_expectation_at_origin_is_mean_cost(six_node_graph):
    model = build_qubo(six_node_graph)
    assert expectation(model, 0.0, 0.0) == pytest.approx(cost_spectrum(model).c.mean(), abs=1e-12)


def test_qubit_cap():
    check_cap(26, 26)
    with pytest.raises(QubitCapError) as info:
        check_cap(27, 26)
    assert "27" in str(info.value) and "26" in str(info.value)
    assert memory_need(3) == 128


def test_fixed_params_order():
    gamma, beta = fixed_params({'fixed_params': [-0.5, 0.5], 'param_order': 'beta_gamma'})
    assert gamma == pytest.approx(0.5)
    assert beta == pytest.approx(math.pi - 0.5)
    gamma, beta = fixed_params({'fixed_params': [-0.5, 0.5], 'param_order': 'gamma_beta'})
    assert gamma == pytest.approx(2 * math.pi - 0.5)
    assert beta == pytest.approx(0.5)


def test_optimizer_never_worse_than_start(triangle):
    model = build_qubo(triangle)
    search = optimize_params(model, {'maxiter': 60})
    assert search.trace
    assert search.best_value <= search.trace[0][2]
    assert expectation(model, search.gamma, search.beta) == pytest.approx(search.best_value, abs=1e-12)
    assert 0.0 <= search.gamma <= 2 * math.pi and 0.0 <= search.beta <= math.pi


def test_optimizer_disabled_returns_fixed(triangle):
    search = optimize_params(build_qubo(triangle), {'optimize': False})
    assert search.trace == []
    assert (search.gamma, search.beta) == pytest.approx((0.5, math.pi - 0.5))


def test_sampling_goodness_of_fit(k4):
    model = build_qubo(k4)
    state = simulate(model, 0.8, 0.4)
    shots = 1_000_000
    bits = sample_state(state, shots, np.random.default_rng(123))
    indices = bits.astype(np.int64) @ (1 << np.arange(model.n_vars))
    observed = np.bincount(indices, minlength=1 << model.n_vars)
    expected = state.probabilities / state.probabilities.sum() * shots
    big = expected >= 5
    f_obs = np.append(observed[big], observed[~big].sum())
    f_exp = np.append(expected[big], expected[~big].sum())
    if f_exp[-1] == 0:
        f_obs, f_exp = f_obs[:-1], f_exp[:-1]
    assert chisquare(f_obs, f_exp).pvalue > 1e-3


def test_sampling_is_seeded(triangle):
    state = simulate(build_qubo(triangle), 0.3, 0.2)
    a = sample_state(state, 100, np.random.default_rng(1))
    b = sample_state(state, 100, np.random.default_rng(1))
    assert np.array_equal(a, b)
    assert a.shape == (100, 3)


def test_most_likely_sorted(triangle):
    top = most_likely(build_qubo(triangle), 0.9, 0.35, top=3)
    assert len(top) == 3
    probs = [p for _, p in top]
    assert probs == sorted(probs, reverse=True)
    assert all(len(s) == 3 for s, _ in top)


def test_circuit_stats(triangle):
    stats = circuit_stats(build_qubo(triangle))
    assert stats['qubits'] == 3
    assert stats['zz_terms'] == 3
    assert stats['memory_bytes'] == 128


def test_dump_probabilities(tmp_path, triangle):
    state = simulate(build_qubo(triangle), 0.2, 0.1)
    lines = dump_probabilities(state, tmp_path / "probs.txt").read_text().splitlines()
    assert len(lines) == 8
    total = sum(float(line.split()[1]) for line in lines)
    assert total == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("gamma,beta", [(0.4, 0.9), (3.3, 2.2)])
def test_dense_oracle_on_eight_qubits(gamma, beta):
    edges = [(0, 1, 0.3), (0, 2, 0.1), (1, 2, 0.2), (1, 3, 0.25), (2, 4, 0.15),
             (3, 4, 0.35), (3, 5, 0.05), (4, 5, 0.2)]
    model = build_qubo(WeightedGraph.from_edges(6, edges))
    assert model.n_vars == 8
    state = simulate(model, gamma, beta)
    assert np.max(np.abs(state.amplitudes - _dense_state(model, gamma, beta))) <= 1e-10


def test_two_edge_path_matches_dense_oracle():
    # pesos (1, 1), fator 0.2 -> λ = 0.4
    model = build_qubo(WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]), 0.2)
    assert model.lam == pytest.approx(0.4)
    state = simulate(model, 0.5, -0.5)
    assert np.max(np.abs(state.amplitudes - _dense_state(model, 0.5, -0.5))) <= 1e-10


def test_origin_gives_uniform_shots():
    model = build_qubo(WeightedGraph.from_edges(3, [(0, 1, 0.6), (1, 2, 0.4)]))
    state = simulate(model, 0.0, 0.0)
    assert np.allclose(state.amplitudes, 0.5, atol=1e-12)
    bits = sample_state(state, 100_000, np.random.default_rng(11))
    freqs = np.bincount(bits.astype(np.int64) @ np.array([1, 2]), minlength=4) / 100_000
    assert np.all(np.abs(freqs - 0.25) <= 0.01)


def test_half_pi_mixer_on_one_qubit():
    model = build_qubo(WeightedGraph.from_edges(2, [(0, 1, 0.5)]))
    state = simulate(model, 0.0, math.pi / 2)
    assert state.probabilities == pytest.approx([0.5, 0.5], abs=1e-12)
    # RX(π)|+> = −i|+>
    assert np.allclose(state.amplitudes, -1j / math.sqrt(2), atol=1e-12)
    assert np.allclose(state.amplitudes, _dense_state(model, 0.0, math.pi / 2), atol=1e-12)


def test_fixed_pair_mapping_keeps_probabilities(triangle):
    model = build_qubo(triangle)
    fixed = optimize_params(model, {'optimize': False})
    gamma, beta = fixed.gamma, fixed.beta
    # β fora de [0, π] volta por π: só muda a fase global
    literal = simulate(model, 0.5, -0.5).probabilities
    assert simulate(model, gamma, beta).probabilities == pytest.approx(literal, abs=1e-12)

    search = optimize_params(model, {'optimize': False, 'param_order': 'gamma_beta'})
    assert (search.gamma, search.beta) == pytest.approx((2 * math.pi - 0.5, 0.5))
