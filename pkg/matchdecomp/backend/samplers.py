"""samplers.py
Interface única de amostragem de matchings (passo 1 do subprocedimento de
matchings do E-FCFW) com três backends: bits aleatórios, simulated annealing
sobre o QUBO e QAOA. Inclui a pós-seleção dos d matchings válidos de maior peso.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from . import qaoa_sim
from .graph_core import Matching, WeightedGraph, build_edge_indexing
from .qubo import QuboModel, build_qubo

logger = logging.getLogger("matchdecomp.samplers")

METHODS = ("random", "anneal", "qaoa")
DEFAULT_SHOTS = {'random': 10000, 'qaoa': 10000, 'anneal': 1000}
DEFAULT_SWEEPS = 100
DEFAULT_T1_RATIO = 1e-3


@dataclass(frozen=True)
class AnnealSchedule:
    """Resfriamento geométrico de t0 até t1 ao longo de *sweeps* varreduras."""

    t0: float
    t1: float
    sweeps: int = DEFAULT_SWEEPS

    def __post_init__(self):
        if not (self.t0 > self.t1 > 0):
            raise ValueError(f"Temperaturas inválidas: exige t0 > t1 > 0 (t0={self.t0}, t1={self.t1}).")
        if self.sweeps < 1:
            raise ValueError(f"sweeps deve ser >= 1 (recebido {self.sweeps}).")

    @property
    def factor(self) -> float:
        steps = max(self.sweeps - 1, 1)
        return (self.t1 / self.t0) ** (1.0 / steps)

    def temperatures(self) -> np.ndarray:
        return self.t0 * self.factor ** np.arange(self.sweeps)

    @classmethod
    def default_for(cls, model: QuboModel, sweeps: int = DEFAULT_SWEEPS,
                    t1_ratio: float = DEFAULT_T1_RATIO, t0: Optional[float] = None) -> "AnnealSchedule":
        """T0 = Σ max(w, 0) (1.0 se nulo), T1 = t1_ratio · T0."""
        if t0 is None:
            t0 = float(np.maximum(model.weights, 0.0).sum()) or 1.0
        return cls(t0=float(t0), t1=float(t0) * t1_ratio, sweeps=int(sweeps))


@dataclass(frozen=True)
class SamplerConfig:
    method: str = "qaoa"
    shots: int = DEFAULT_SHOTS['qaoa']
    d: int = 5
    seed: int = 0
    penalty_factor: float = 0.2
    anneal: Mapping[str, Any] = field(default_factory=dict)
    qaoa: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"Método de amostragem desconhecido: {self.method!r} (use {', '.join(METHODS)}).")
        if self.d < 1:
            raise ValueError(f"d deve ser >= 1 (recebido {self.d}).")
        if self.shots < self.d:
            raise ValueError(f"shots ({self.shots}) deve ser >= d ({self.d}).")

    @classmethod
    def from_config(cls, config: Mapping[str, Any], method: Optional[str] = None,
                    **overrides) -> "SamplerConfig":
        """Monta a configuração a partir do dicionário de get_config()."""
        sampler = config.get('sampler', {})
        method = method or sampler.get('method', 'qaoa')
        shots = sampler.get('shots', {}).get(method, DEFAULT_SHOTS.get(method, 1000))
        values = dict(
            method=method,
            shots=int(shots),
            d=int(sampler.get('d', 5)),
            seed=int(sampler.get('seed', 0)),
            penalty_factor=float(config.get('qubo', {}).get('penalty_factor', 0.2)),
            anneal=dict(config.get('anneal', {})),
            qaoa=dict(config.get('qaoa', {})),
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


# ---------------------------------------------------------------------------
# Simulated annealing
# ---------------------------------------------------------------------------
def anneal_runs(model: QuboModel, schedule: AnnealSchedule, runs: int,
                rng: np.random.Generator) -> np.ndarray:
    """Executa *runs* cadeias de Metropolis independentes em paralelo (vetorizadas).

    Cada cadeia parte de zeros; cada varredura propõe N flips de bit único.
    Devolve a melhor configuração vista por cadeia, matriz uint8 (runs, N).
    """
    n = model.n_vars
    if n == 0 or runs == 0:
        return np.zeros((runs, n), dtype=np.uint8)

    # coluna extra n fica sempre em 0 e absorve o preenchimento de padded_neighbors
    x = np.zeros((runs, n + 1), dtype=np.int64)
    rows = np.arange(runs)
    cost = np.zeros(runs)
    best_cost = np.zeros(runs)
    best_x = np.zeros((runs, n), dtype=np.uint8)
    neighbors = model.padded_neighbors

    for temp in schedule.temperatures():
        for _ in range(n):
            j = rng.integers(0, n, size=runs)
            conflicts = x[rows[:, None], neighbors[j]].sum(axis=1)
            current = x[rows, j]
            delta = (1 - 2 * current) * (-model.weights[j] + model.lambda_eff * conflicts)
            uniform = rng.random(runs)
            with np.errstate(over="ignore"):
                accept = (delta <= 0) | (uniform < np.exp(-delta / temp))
            x[rows[accept], j[accept]] = 1 - current[accept]
            cost = cost + np.where(accept, delta, 0.0)
            improved = cost < best_cost
            if improved.any():
                best_cost[improved] = cost[improved]
                best_x[improved] = x[improved, :n]
    return best_x


def anneal_run(model: QuboModel, schedule: AnnealSchedule, rng: np.random.Generator) -> np.ndarray:
    return anneal_runs(model, schedule, 1, rng)[0]


# ---------------------------------------------------------------------------
# Amostragem e pós-seleção
# ---------------------------------------------------------------------------
def sample_bitstrings(cfg: SamplerConfig, graph: WeightedGraph,
                      rng: Optional[np.random.Generator] = None,
                      stats: Optional[Dict[str, Any]] = None) -> np.ndarray:
    """Gera cfg.shots bitstrings sobre a indexação de arestas de *graph*.

    Se *stats* for passado, recebe os parâmetros usados (temperaturas, γ/β, etc.).
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    stats = stats if stats is not None else {}
    n_edges = len(graph.edges)

    if cfg.method == "random":
        return rng.integers(0, 2, size=(cfg.shots, n_edges), dtype=np.uint8)

    model = build_qubo(graph, cfg.penalty_factor)
    stats['lambda'] = model.lam

    if cfg.method == "anneal":
        schedule = AnnealSchedule.default_for(
            model,
            sweeps=int(cfg.anneal.get('sweeps', DEFAULT_SWEEPS)),
            t1_ratio=float(cfg.anneal.get('t1_ratio', DEFAULT_T1_RATIO)),
            t0=cfg.anneal.get('t0'),
        )
        stats.update({'t0': schedule.t0, 't1': schedule.t1, 'sweeps': schedule.sweeps})
        return anneal_runs(model, schedule, cfg.shots, rng)

    qcfg = {**qaoa_sim.DEFAULT_OPTIMIZER, **cfg.qaoa}
    cap = int(qcfg['qubit_cap'])
    qaoa_sim.check_cap(model.n_vars, cap)
    search = qaoa_sim.optimize_params(model, qcfg)
    stats.update({
        'gamma': search.gamma,
        'beta': search.beta,
        'evaluations': len(search.trace),
        'optimized': bool(qcfg['optimize']),
        'param_order': qcfg['param_order'],
        **qaoa_sim.circuit_stats(model),
    })
    return qaoa_sim.sample(model, search.gamma, search.beta, cfg.shots, rng, cap)


def valid_rows(bitstrings: np.ndarray, graph: WeightedGraph) -> np.ndarray:
    """Máscara das linhas que são matchings (nenhum nó coberto duas vezes)."""
    idx = build_edge_indexing(graph)
    if idx.size == 0:
        return np.ones(len(bitstrings), dtype=bool)
    bits = np.asarray(bitstrings, dtype=np.int64).reshape(-1, idx.size)
    incidence = np.zeros((idx.size, graph.n), dtype=np.int64)
    for j, (u, v) in enumerate(idx.edges):
        incidence[j, u] = 1
        incidence[j, v] = 1
    if bits.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    return (bits @ incidence).max(axis=1, initial=0) <= 1


def select_top_d(bitstrings: np.ndarray, graph: WeightedGraph, d: int) -> List[Matching]:
    """Descarta inválidos, remove duplicatas e devolve até d matchings por peso decrescente."""
    idx = build_edge_indexing(graph)
    if idx.size == 0:
        return [Matching(frozenset())][:d] if len(bitstrings) else []
    bits = np.asarray(bitstrings, dtype=np.uint8).reshape(-1, idx.size)
    if bits.shape[0] == 0:
        return []
    unique = np.unique(bits, axis=0)
    unique = unique[valid_rows(unique, graph)]
    wmap = graph.weight_map
    weights = np.array([wmap[e] for e in idx.edges], dtype=float)

    ranked: List[Tuple[float, Tuple, Matching]] = []
    for row in unique:
        m = Matching.from_bits(row, idx)
        weight = float(weights @ row.astype(float))
        ranked.append((-weight, m.key, m))
    ranked.sort(key=lambda item: (item[0], item[1]))
    return [m for _, _, m in ranked[:d]]


def sample_matchings(cfg: SamplerConfig, graph: WeightedGraph,
                     rng: Optional[np.random.Generator] = None) -> Tuple[List[Matching], Dict[str, Any]]:
    """Amostra e pós-seleciona; devolve (matchings, estatísticas do amostrador)."""
    stats: Dict[str, Any] = {'method': cfg.method, 'shots': cfg.shots}
    bits = sample_bitstrings(cfg, graph, rng, stats)
    valid = valid_rows(bits, graph)
    stats['valid_fraction'] = float(valid.mean()) if valid.size else 0.0
    matchings = select_top_d(bits[valid], graph, cfg.d)
    stats['selected'] = len(matchings)
    logger.debug(
        f"Amostrador {cfg.method}: {stats['valid_fraction']:.4f} válidos, "
        f"{len(matchings)} matchings selecionados"
    )
    return matchings, stats


def iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    """Gerador derivado deterministicamente de (seed, iteração)."""
    return np.random.default_rng([int(seed), int(iteration)])


def run_seed(seed: int, instance_id: str, method: str) -> int:
    """Semente própria de uma execução (instância, método), derivada de *seed*.

    Cabe em 63 bits; a mesma tripla sempre gera a mesma semente.
    """
    digest = hashlib.sha256(f"{instance_id}|{method}".encode("utf-8")).digest()
    entropy = [int(seed), int.from_bytes(digest[:8], "little")]
    state = np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0]
    return int(state >> np.uint64(1))


def exhaustive_minimum(model: QuboModel) -> Tuple[float, np.ndarray]:
    """Mínimo exato de qubo_cost por enumeração (uso em diagnóstico, N pequeno)."""
    spectrum = qaoa_sim.cost_spectrum(model)
    best = int(np.argmin(spectrum.c))
    return float(spectrum.c[best]), qaoa_sim.indices_to_bits(np.array([best]), model.n_vars)[0]

