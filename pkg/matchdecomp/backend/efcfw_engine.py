"""efcfw_engine.py
Motor do Frank-Wolfe totalmente corretivo estendido (E-FCFW).

A cada iteração k o subprocedimento de matchings devolve até d+1 matchings
novos: d amostrados do resíduo D* − X_k e o matching de Frank-Wolfe da
trajetória FCFW "pura", mantida em paralelo. Os pesos são então recalculados
com no máximo k+1 matchings ativos. Com d = 0 o motor é o FCFW clássico.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from .graph_core import (
    Decomposition,
    DemandMatrix,
    Matching,
    WeightedGraph,
    approximation_error,
    matching_weight,
    residual_graph,
)
from .matching_exact import max_weight_matching
from .samplers import SamplerConfig, iteration_rng, sample_matchings
from .weights_solver import (
    WeightProblem,
    solve_cardinality_ls,
    solve_simplex_ls,
)

logger = logging.getLogger("matchdecomp.engine")

CONVERGED = "converged"
ITERATION_CAP = "iteration-cap"
STALLED = "stalled"


@dataclass(frozen=True)
class EngineConfig:
    epsilon: float = 1e-6
    d: int = 5
    max_iterations: Optional[int] = None
    max_iterations_factor: int = 4
    sampler: Optional[SamplerConfig] = None
    sum_mode: str = "le"
    nonzero_threshold: float = 1e-9
    cardinality_budget: int = 1_000_000
    greedy_screen: int = 8
    stall_tol: float = 1e-15
    seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon deve ser positivo (recebido {self.epsilon}).")
        if self.d < 0:
            raise ValueError(f"d deve ser >= 0 (recebido {self.d}).")
        if self.d > 0 and self.sampler is None:
            raise ValueError("d > 0 exige uma configuração de amostrador.")

    @property
    def method(self) -> str:
        if self.d == 0 or self.sampler is None:
            return "fcfw"
        return f"efcfw+{self.sampler.method}"

    def iteration_cap(self, n: int) -> int:
        return self.max_iterations if self.max_iterations is not None else self.max_iterations_factor * n

    @classmethod
    def from_config(cls, config: Mapping[str, Any], method: str = "efcfw+qaoa", **overrides) -> "EngineConfig":
        """Monta o EngineConfig para um método ('fcfw' ou 'efcfw+<amostrador>')."""
        engine = config.get('engine', {})
        seed = overrides.pop('seed', None)
        seed = int(config.get('sampler', {}).get('seed', 0)) if seed is None else int(seed)
        d = overrides.pop('d', None)
        d = int(engine.get('d', 5)) if d is None else int(d)
        shots = overrides.pop('shots', None)
        if method == "fcfw":
            d, sampler = 0, None
        elif method.startswith("efcfw+"):
            sampler = SamplerConfig.from_config(config, method.split("+", 1)[1], d=d, seed=seed, shots=shots) if d > 0 else None
        else:
            raise ValueError(f"Método desconhecido: {method!r} (use fcfw, efcfw+random, efcfw+anneal ou efcfw+qaoa).")
        values = dict(
            epsilon=float(engine.get('epsilon', 1e-6)),
            d=d,
            max_iterations_factor=int(engine.get('max_iterations_factor', 4)),
            sampler=sampler,
            sum_mode=engine.get('sum_mode', 'le'),
            nonzero_threshold=float(engine.get('nonzero_threshold', 1e-9)),
            cardinality_budget=int(engine.get('cardinality_budget', 1_000_000)),
            greedy_screen=int(engine.get('greedy_screen', 8)),
            stall_tol=float(engine.get('stall_tol', 1e-15)),
            seed=seed,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        sampler = None
        if self.sampler is not None:
            sampler = {
                'method': self.sampler.method,
                'shots': self.sampler.shots,
                'd': self.sampler.d,
                'seed': self.sampler.seed,
                'penalty_factor': self.sampler.penalty_factor,
                'anneal': dict(self.sampler.anneal),
                'qaoa': dict(self.sampler.qaoa),
            }
        return {
            'method': self.method,
            'epsilon': self.epsilon,
            'd': self.d,
            'max_iterations': self.max_iterations,
            'max_iterations_factor': self.max_iterations_factor,
            'sum_mode': self.sum_mode,
            'nonzero_threshold': self.nonzero_threshold,
            'cardinality_budget': self.cardinality_budget,
            'greedy_screen': self.greedy_screen,
            'seed': self.seed,
            'sampler': sampler,
        }


@dataclass
class EngineState:
    matchings: List[Matching] = field(default_factory=list)
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fw_matchings: List[Matching] = field(default_factory=list)
    fw_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    k: int = 0

    def decomposition(self) -> Decomposition:
        return Decomposition(tuple((m, float(a)) for m, a in zip(self.matchings, self.weights)))

    def index(self) -> Dict[Matching, int]:
        return {m: i for i, m in enumerate(self.matchings)}


@dataclass(frozen=True)
class IterationRecord:
    k: int
    length: int
    error: float
    added: Tuple[Matching, ...]
    sampler_stats: Mapping[str, Any]
    exact_weights: bool
    fw_error: float


@dataclass(frozen=True)
class DecompositionResult:
    decomposition: Decomposition
    terminated: str
    records: Tuple[IterationRecord, ...]
    provenance: Mapping[str, Any]

    @property
    def error(self) -> float:
        return self.decomposition.error_trace[-1][2]

    @property
    def length(self) -> int:
        return self.decomposition.length

    @property
    def converged(self) -> bool:
        return self.terminated == CONVERGED

    @property
    def iterations(self) -> int:
        return len(self.records)


def _fw_step(state: EngineState, target: DemandMatrix, config: EngineConfig) -> Matching:
    """Passo 2 do subprocedimento: pesos FCFW sobre 𝕄_FW e matching de peso máximo no resíduo.

    Usa o mesmo sum_mode do passo de cardinalidade, de modo que os pesos FW
    também são candidatos viáveis lá (ver _fw_incumbent).
    """
    if state.fw_matchings:
        problem = WeightProblem(target, tuple(state.fw_matchings), config.sum_mode)
        state.fw_weights = solve_simplex_ls(problem, config.nonzero_threshold).weights
    fw_decomp = Decomposition(tuple(zip(state.fw_matchings, (float(a) for a in state.fw_weights))))
    return max_weight_matching(residual_graph(target, fw_decomp)).matching


def matching_subroutine(state: EngineState, target: DemandMatrix, config: EngineConfig,
                        rng: Optional[np.random.Generator] = None) -> Tuple[List[Matching], Dict[str, Any]]:
    """Subprocedimento de matchings; devolve (matchings novos, estatísticas do amostrador)."""
    stats: Dict[str, Any] = {}
    sampled: List[Matching] = []
    if config.d > 0:
        residual = residual_graph(target, state.decomposition())
        sampler = replace(config.sampler, d=config.d)
        started = time.perf_counter()
        sampled, stats = sample_matchings(sampler, residual, rng)
        stats["elapsed"] = time.perf_counter() - started

    fw = _fw_step(state, target, config)
    state.fw_matchings.append(fw)

    # poda: 𝕄_FW sem duplicatas nem matching vazio; amostras fora de 𝕄_FW
    unique_fw: List[Matching] = []
    for m in state.fw_matchings:
        if len(m) and m not in unique_fw:
            unique_fw.append(m)
    state.fw_matchings = unique_fw
    fw_set = set(unique_fw)
    unique_sampled: List[Matching] = []
    for m in sampled:
        if len(m) and m not in fw_set and m not in unique_sampled:
            unique_sampled.append(m)

    known = set(state.matchings)
    new = [m for m in unique_fw + unique_sampled if m not in known]
    return new, stats


def _fw_incumbent(state: EngineState, target: DemandMatrix, config: EngineConfig) -> Tuple[np.ndarray, float]:
    """Pesos da trajetória FCFW alinhados a 𝕄 (candidato inicial do passo de cardinalidade)."""
    if not state.fw_matchings:
        return np.zeros(len(state.matchings)), approximation_error(target, Decomposition())
    problem = WeightProblem(target, tuple(state.fw_matchings), config.sum_mode)
    solution = solve_simplex_ls(problem, config.nonzero_threshold)
    aligned = np.zeros(len(state.matchings))
    position = state.index()
    for m, alpha in zip(state.fw_matchings, solution.weights):
        aligned[position[m]] = alpha
    return aligned, solution.objective / target.n ** 2


def run(instance, config: EngineConfig, instance_id: Optional[str] = None) -> DecompositionResult:
    """Executa o E-FCFW (ou FCFW com d = 0) sobre uma Instance ou DemandMatrix."""
    target: DemandMatrix = instance.demand if hasattr(instance, 'demand') else instance
    instance_id = instance_id or getattr(instance, 'id', None)
    n = target.n
    cap = config.iteration_cap(n)

    state = EngineState()
    timings = {'sampler': 0.0, 'fw': 0.0, 'weights': 0.0}
    wall0, cpu0 = time.perf_counter(), time.process_time()

    error = approximation_error(target, Decomposition())
    trace: List[Tuple[int, int, float]] = [(0, 0, error)]
    records: List[IterationRecord] = []
    terminated = CONVERGED if error <= config.epsilon else None

    while terminated is None:
        k = state.k
        rng = iteration_rng(config.seed, k)
        t0 = time.perf_counter()
        new, stats = matching_subroutine(state, target, config, rng)
        sampler_time = float(stats.get("elapsed", 0.0))
        timings["sampler"] += sampler_time
        timings["fw"] += time.perf_counter() - t0 - sampler_time

        state.matchings.extend(new)
        previous = np.concatenate([state.weights, np.zeros(len(new))])

        t0 = time.perf_counter()
        fw_weights, fw_error = _fw_incumbent(state, target, config)
        if state.matchings:
            problem = WeightProblem(
                target,
                tuple(state.matchings),
                config.sum_mode,
                max_support=min(k + 1, len(state.matchings)),
            )
            solution = solve_cardinality_ls(
                problem,
                incumbents=(previous, fw_weights),
                budget=config.cardinality_budget,
                screen=config.greedy_screen,
                threshold=config.nonzero_threshold,
            )
            state.weights = solution.weights
            exact = solution.exact
        else:
            exact = True
        timings['weights'] += time.perf_counter() - t0

        decomposition = state.decomposition()
        new_error = approximation_error(target, decomposition)
        state.k += 1
        trace.append((state.k, decomposition.length, new_error))
        records.append(IterationRecord(k, decomposition.length, new_error, tuple(new), stats, exact, fw_error))
        logger.info(
            f"[{instance_id or 'instância'}] k={k} comprimento={decomposition.length} "
            f"erro={new_error:.3e} novos={len(new)} |M|={len(state.matchings)}"
        )

        if new_error <= config.epsilon:
            terminated = CONVERGED
        elif not new and new_error >= error - config.stall_tol:
            terminated = STALLED
        elif state.k >= cap:
            terminated = ITERATION_CAP
        error = new_error

    # matchings com peso nulo saem da decomposição final
    entries = tuple(
        (m, float(a)) for m, a in zip(state.matchings, state.weights) if a > config.nonzero_threshold
    )
    timings['total'] = time.perf_counter() - wall0
    timings['cpu'] = time.process_time() - cpu0
    final = Decomposition(entries, tuple(trace), timings)
    provenance = {
        'instance_id': instance_id,
        'n': n,
        'edges': len(target.graph.edges),
        'method': config.method,
        'seed': config.seed,
        'config': config.to_dict(),
        'iteration_cap': cap,
        'timings': dict(timings),
    }
    logger.info(
        f"[{instance_id or 'instância'}] {config.method}: {terminated} após {state.k} iterações, "
        f"comprimento {final.length}, erro {error:.3e}"
    )
    return DecompositionResult(final, terminated, tuple(records), provenance)


def overlap_matrix(matchings) -> np.ndarray:
    """Entrada (i, j) = número de arestas em comum; diagonal = tamanho de cada matching."""
    matchings = list(matchings)
    size = len(matchings)
    mat = np.zeros((size, size), dtype=np.int64)
    for i, a in enumerate(matchings):
        for j in range(i, size):
            shared = len(a.edges & matchings[j].edges)
            mat[i, j] = mat[j, i] = shared
    return mat


def weight_distribution(decomposition: Decomposition, graph: WeightedGraph) -> List[float]:
    return [matching_weight(m, graph) for m in decomposition.matchings]
