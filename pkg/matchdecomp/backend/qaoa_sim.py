"""qaoa_sim.py
Simulação exata (statevector) do QAOA de uma camada sobre o Hamiltoniano
diagonal do QUBO de matchings.

Convenção de base: o bit j do inteiro x corresponde à aresta j, e na forma
textual a posição j da string é a aresta j ("0101" = arestas 1 e 3).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import Bounds, minimize

from .graph_core import bits_to_str
from .qubo import QuboModel, ising_coefficients

logger = logging.getLogger("matchdecomp.qaoa")

QUBIT_CAP = 26
DUMP_CAP = 16
BYTES_PER_AMPLITUDE = 16
GAMMA_PERIOD = 2.0 * math.pi
BETA_PERIOD = math.pi

DEFAULT_OPTIMIZER: Dict[str, Any] = {
    'qubit_cap': QUBIT_CAP,
    'optimize': True,
    'start': [0.5, -0.5],
    'fixed_params': [-0.5, 0.5],
    'param_order': 'beta_gamma',
    'maxiter': 200,
    'rhobeg': 0.5,
    'tol': 1e-4,
}


class QubitCapError(ValueError):
    """Número de qubits acima do limite do statevector."""

    def __init__(self, n_qubits: int, cap: int):
        self.n_qubits = n_qubits
        self.cap = cap
        super().__init__(
            f"Instância com {n_qubits} arestas (qubits) excede o limite de {cap} qubits "
            f"do simulador statevector. Use instâncias menores; simulação MPS não é suportada."
        )


@dataclass(frozen=True, eq=False)
class CostSpectrum:
    """Diagonal de H_C: c[x] = qubo_cost(model, x)."""

    c: np.ndarray

    @property
    def n_qubits(self) -> int:
        return int(self.c.size).bit_length() - 1


@dataclass(frozen=True, eq=False)
class QaoaState:
    amplitudes: np.ndarray
    gamma: float
    beta: float

    @property
    def n_qubits(self) -> int:
        return int(self.amplitudes.size).bit_length() - 1

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


class ParamSearch(NamedTuple):
    """Resultado da busca de parâmetros: (gamma*, beta*, traço de avaliações)."""

    gamma: float
    beta: float
    trace: List[Tuple[float, float, float]]

    @property
    def best_value(self) -> Optional[float]:
        if not self.trace:
            return None
        return min(value for _, _, value in self.trace)


def check_cap(n_qubits: int, cap: int = QUBIT_CAP) -> None:
    if n_qubits > cap:
        raise QubitCapError(n_qubits, cap)


def memory_need(n_qubits: int) -> int:
    """Bytes do vetor de amplitudes complexas (complex128)."""
    return BYTES_PER_AMPLITUDE * (1 << n_qubits)


def wrap_params(gamma: float, beta: float) -> Tuple[float, float]:
    return float(gamma) % GAMMA_PERIOD, float(beta) % BETA_PERIOD


def cost_spectrum(model: QuboModel, qubit_cap: int = QUBIT_CAP) -> CostSpectrum:
    """Constrói c(x) por duplicação: ligar o bit j soma −w_j + 2λ·(vizinhos anteriores ligados)."""
    n = model.n_vars
    check_cap(n, qubit_cap)
    c = np.zeros(1 << n, dtype=float)
    for j in range(n):
        half = 1 << j
        low = np.arange(half, dtype=np.uint32)
        conflicts = np.zeros(half, dtype=float)
        for k in model.adjacency.neighbors[j]:
            if k < j:
                conflicts += (low >> np.uint32(k)) & np.uint32(1)
        c[half:2 * half] = c[:half] - model.weights[j] + model.lambda_eff * conflicts
    return CostSpectrum(c)


def _apply_mixer(psi: np.ndarray, n_qubits: int, beta: float) -> None:
    """Aplica RX(2β) em cada qubit, in-place, por pares de amplitudes com passo 2^j."""
    cos_b, sin_b = math.cos(beta), math.sin(beta)
    for j in range(n_qubits):
        view = psi.reshape(-1, 2, 1 << j)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = cos_b * a - 1j * sin_b * b
        view[:, 1, :] = -1j * sin_b * a + cos_b * b


def _evolve(spectrum: CostSpectrum, gamma: float, beta: float) -> np.ndarray:
    n = spectrum.n_qubits
    psi = np.exp(-1j * gamma * spectrum.c) / math.sqrt(1 << n)
    _apply_mixer(psi, n, beta)
    return psi


def simulate(model: QuboModel, gamma: float, beta: float, qubit_cap: int = QUBIT_CAP) -> QaoaState:
    spectrum = cost_spectrum(model, qubit_cap)
    return QaoaState(_evolve(spectrum, gamma, beta), float(gamma), float(beta))


def expectation(model: QuboModel, gamma: float, beta: float, qubit_cap: int = QUBIT_CAP) -> float:
    spectrum = cost_spectrum(model, qubit_cap)
    return _expectation(spectrum, gamma, beta)


def _expectation(spectrum: CostSpectrum, gamma: float, beta: float) -> float:
    probs = np.abs(_evolve(spectrum, gamma, beta)) ** 2
    return float(probs @ spectrum.c)


def fixed_params(cfg: Mapping[str, Any]) -> Tuple[float, float]:
    """Interpreta cfg['fixed_params'] conforme cfg['param_order'] e devolve (gamma, beta) nos limites.

    Com o padrão 'beta_gamma' o par [-0.5, 0.5] vira gamma = 0.5 e
    beta = -0.5 mod π = π - 0.5; a volta por π em beta só troca a fase global,
    então as probabilidades são as do par literal. Com 'gamma_beta' o mesmo par
    vira (2π - 0.5, 0.5), que em geral é outro estado (c(x) não é inteiro).
    A ordem usada vai para as estatísticas do amostrador.
    """
    first, second = cfg['fixed_params']
    order = cfg.get('param_order', 'beta_gamma')
    if order == 'beta_gamma':
        beta, gamma = first, second
    elif order == 'gamma_beta':
        gamma, beta = first, second
    else:
        raise ValueError(f"param_order inválido: {order!r} (use 'beta_gamma' ou 'gamma_beta').")
    return wrap_params(gamma, beta)


def optimize_params(model: QuboModel, optimizer_cfg: Optional[Mapping[str, Any]] = None) -> ParamSearch:
    """Minimiza a expectativa com COBYLA em γ ∈ [0, 2π], β ∈ [0, π].

    Sempre devolve o melhor ponto avaliado. Com ``optimize: false`` devolve os
    parâmetros fixos sem avaliar nada.
    """
    cfg = {**DEFAULT_OPTIMIZER, **(optimizer_cfg or {})}
    if not cfg['optimize']:
        gamma, beta = fixed_params(cfg)
        return ParamSearch(gamma, beta, [])

    spectrum = cost_spectrum(model, int(cfg['qubit_cap']))
    gamma0, beta0 = wrap_params(*cfg['start'])
    if model.n_vars == 0:
        return ParamSearch(gamma0, beta0, [(gamma0, beta0, 0.0)])

    trace: List[Tuple[float, float, float]] = []

    def _objective(p: np.ndarray) -> float:
        gamma = min(max(float(p[0]), 0.0), GAMMA_PERIOD)
        beta = min(max(float(p[1]), 0.0), BETA_PERIOD)
        value = _expectation(spectrum, gamma, beta)
        trace.append((gamma, beta, value))
        return value

    _objective(np.array([gamma0, beta0]))
    minimize(
        _objective,
        x0=np.array([gamma0, beta0]),
        method="COBYLA",
        bounds=Bounds([0.0, 0.0], [GAMMA_PERIOD, BETA_PERIOD]),
        options={'rhobeg': float(cfg['rhobeg']), 'tol': float(cfg['tol']), 'maxiter': int(cfg['maxiter'])},
    )

    best = trace[0]
    for point in trace[1:]:
        if point[2] < best[2]:
            best = point
    logger.debug(
        f"COBYLA: {len(trace)} avaliações, <C> {trace[0][2]:.6g} -> {best[2]:.6g} "
        f"em (gamma={best[0]:.4f}, beta={best[1]:.4f})"
    )
    return ParamSearch(best[0], best[1], trace)


def indices_to_bits(indices: np.ndarray, n_qubits: int) -> np.ndarray:
    shifts = np.arange(n_qubits, dtype=np.int64)
    return ((np.asarray(indices, dtype=np.int64)[:, None] >> shifts) & 1).astype(np.uint8)


def sample_state(state: QaoaState, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Amostragem por CDF inversa; devolve matriz uint8 (shots, N)."""
    if shots <= 0:
        raise ValueError(f"shots deve ser positivo (recebido {shots}).")
    cdf = np.cumsum(state.probabilities)
    draws = rng.random(shots) * cdf[-1]
    indices = np.minimum(np.searchsorted(cdf, draws, side="right"), cdf.size - 1)
    return indices_to_bits(indices, state.n_qubits)


def sample(model: QuboModel, gamma: float, beta: float, shots: int,
           rng: np.random.Generator, qubit_cap: int = QUBIT_CAP) -> np.ndarray:
    return sample_state(simulate(model, gamma, beta, qubit_cap), shots, rng)


def most_likely(model: QuboModel, gamma: float, beta: float, top: int = 5,
                qubit_cap: int = QUBIT_CAP) -> List[Tuple[str, float]]:
    """Bitstrings de maior probabilidade; empates pelo menor índice."""
    state = simulate(model, gamma, beta, qubit_cap)
    probs = state.probabilities
    order = np.argsort(-probs, kind="stable")[:top]
    bits = indices_to_bits(order, state.n_qubits)
    return [(bits_to_str(row), float(probs[x])) for row, x in zip(bits, order)]


def circuit_stats(model: QuboModel) -> Dict[str, int]:
    _, h, couplings = ising_coefficients(model)
    return {
        'qubits': model.n_vars,
        'zz_terms': len(couplings),
        'z_terms': int(np.count_nonzero(h)),
        'memory_bytes': memory_need(model.n_vars),
    }


def dump_probabilities(state: QaoaState, path: str | Path) -> Path:
    """Escreve linhas "bitstring probabilidade" (apenas N <= 16)."""
    n = state.n_qubits
    if n > DUMP_CAP:
        raise ValueError(f"Dump de probabilidades limitado a {DUMP_CAP} qubits (recebido {n}).")
    path = Path(path)
    probs = state.probabilities
    bits = indices_to_bits(np.arange(probs.size), n)
    lines = [f"{bits_to_str(row) or '-'} {float(p)!r}" for row, p in zip(bits, probs)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
