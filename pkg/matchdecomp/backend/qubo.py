"""qubo.py
Formulação QUBO do matching de peso máximo com arestas como variáveis:

    C(x) = −Σ_j w_j x_j + λ Σ_j Σ_{k∈Γ(j)} x_j x_k

A soma dupla percorre pares ordenados, então cada par adjacente violado
custa 2λ (λ_eff). λ = penalty_factor · Σ_j max(w_j, 0).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from .graph_core import EdgeIndexing, WeightedGraph, as_bits, build_edge_indexing

PENALTY_FACTOR = 0.2


@dataclass(frozen=True)
class EdgeAdjacency:
    """Γ(j): índices das arestas que compartilham um nó com a aresta j."""

    neighbors: Tuple[Tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.neighbors)

    def pairs(self) -> List[Tuple[int, int]]:
        """Pares adjacentes não-ordenados (j < k)."""
        return [(j, k) for j, nbrs in enumerate(self.neighbors) for k in nbrs if j < k]

    def max_degree(self) -> int:
        return max((len(nbrs) for nbrs in self.neighbors), default=0)


def edge_adjacency(idx: EdgeIndexing) -> EdgeAdjacency:
    by_node: Dict[int, List[int]] = {}
    for j, (u, v) in enumerate(idx.edges):
        by_node.setdefault(u, []).append(j)
        by_node.setdefault(v, []).append(j)
    neighbors = []
    for j, (u, v) in enumerate(idx.edges):
        nbrs = set(by_node[u]) | set(by_node[v])
        nbrs.discard(j)
        neighbors.append(tuple(sorted(nbrs)))
    return EdgeAdjacency(tuple(neighbors))


@dataclass(frozen=True, eq=False)
class QuboModel:
    indexing: EdgeIndexing
    weights: np.ndarray
    adjacency: EdgeAdjacency
    lam: float
    penalty_factor: float

    @property
    def n_vars(self) -> int:
        return self.indexing.size

    @property
    def linear(self) -> np.ndarray:
        return -self.weights

    @property
    def lambda_eff(self) -> float:
        """Penalidade efetiva por par violado (a soma dupla conta 2 vezes)."""
        return 2.0 * self.lam

    @cached_property
    def quadratic(self) -> Dict[Tuple[int, int], float]:
        return {(j, k): self.lam for j, nbrs in enumerate(self.adjacency.neighbors) for k in nbrs}

    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        mat = np.zeros((self.n_vars, self.n_vars), dtype=np.int64)
        for j, nbrs in enumerate(self.adjacency.neighbors):
            mat[j, list(nbrs)] = 1
        return mat

    @cached_property
    def padded_neighbors(self) -> np.ndarray:
        """Vizinhos de cada variável em matriz (N, grau_max), completada com o índice N."""
        width = max(self.adjacency.max_degree(), 1)
        pad = np.full((self.n_vars, width), self.n_vars, dtype=np.int64)
        for j, nbrs in enumerate(self.adjacency.neighbors):
            pad[j, :len(nbrs)] = nbrs
        return pad


def build_qubo(graph: WeightedGraph, penalty_factor: float = PENALTY_FACTOR) -> QuboModel:
    if penalty_factor <= 0:
        raise ValueError(f"penalty_factor deve ser positivo (recebido {penalty_factor}).")
    idx = build_edge_indexing(graph)
    wmap = graph.weight_map
    weights = np.array([wmap[e] for e in idx.edges], dtype=float)
    lam = penalty_factor * float(np.maximum(weights, 0.0).sum())
    return QuboModel(
        indexing=idx,
        weights=weights,
        adjacency=edge_adjacency(idx),
        lam=lam,
        penalty_factor=penalty_factor,
    )


def qubo_cost(model: QuboModel, x) -> float:
    bits = as_bits(x, model.n_vars).astype(np.int64)
    conflicts = int(bits @ model.adjacency_matrix @ bits)
    return float(-(model.weights @ bits) + model.lam * conflicts)


def qubo_costs(model: QuboModel, bitstrings: np.ndarray) -> np.ndarray:
    """Versão vetorizada: uma linha por bitstring."""
    bits = np.asarray(bitstrings, dtype=np.int64).reshape(-1, model.n_vars)
    conflicts = np.einsum("ij,ij->i", bits @ model.adjacency_matrix, bits)
    return -(bits @ model.weights) + model.lam * conflicts


def violates(model: QuboModel, x) -> bool:
    bits = as_bits(x, model.n_vars).astype(np.int64)
    return bool(bits @ model.adjacency_matrix @ bits > 0)


def violation_mask(model: QuboModel, bitstrings: np.ndarray) -> np.ndarray:
    bits = np.asarray(bitstrings, dtype=np.int64).reshape(-1, model.n_vars)
    return np.einsum("ij,ij->i", bits @ model.adjacency_matrix, bits) > 0


def ising_coefficients(model: QuboModel) -> Tuple[float, np.ndarray, Dict[Tuple[int, int], float]]:
    """Expansão de C(x) com x = (1 − z)/2: C = const + Σ h_j z_j + Σ_{j<k} J_jk z_j z_k."""
    n = model.n_vars
    h = model.weights / 2.0
    const = -float(model.weights.sum()) / 2.0
    couplings: Dict[Tuple[int, int], float] = {}
    # cada par não-ordenado aparece 2 vezes na soma dupla: 2λ·x_j x_k
    q = model.lambda_eff / 4.0
    for j, k in model.adjacency.pairs():
        const += q
        h[j] -= q
        h[k] -= q
        couplings[(j, k)] = q
    return const, h if n else np.zeros(0), couplings


def export_coefficients(model: QuboModel, path: str | Path) -> Path:
    """Exporta linhas "i j valor" (i == j para termos lineares) para solvers externos."""
    path = Path(path)
    lines = [f"# N={model.n_vars} lambda={model.lam!r} penalty_factor={model.penalty_factor!r}"]
    for j, coeff in enumerate(model.linear):
        lines.append(f"{j} {j} {float(coeff)!r}")
    for (j, k), coeff in sorted(model.quadratic.items()):
        lines.append(f"{j} {k} {float(coeff)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
