"""graph_core.py
Tipos fundamentais do matchdecomp: grafos ponderados, matrizes de demanda,
indexação de arestas, matchings e decomposições, além da métrica de erro
de aproximação (1/n²)·‖D* − Σ α M‖_F².

Grafos e matchings são listas de arestas indexadas; matrizes densas só
aparecem dentro da métrica de erro.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

Edge = Tuple[int, int]

SUBSTOCHASTIC_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-9


def canonical_edge(u: int, v: int) -> Edge:
    """Ordena o par (u, v) para que u < v."""
    u, v = int(u), int(v)
    if u == v:
        raise ValueError(f"Auto-laço não permitido no nó {u}.")
    return (u, v) if u < v else (v, u)


# ---------------------------------------------------------------------------
# Grafos
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class WeightedGraph:
    """Grafo não-direcionado com pesos reais, equivalente a uma matriz simétrica."""

    n: int
    edges: Tuple[Tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError(f"Número de nós deve ser positivo (recebido {self.n}).")
        seen = set()
        for u, v, _ in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"Aresta ({u}, {v}) fora da forma canônica 0 <= u < v < {self.n}.")
            if (u, v) in seen:
                raise ValueError(f"Aresta duplicada ({u}, {v}).")
            seen.add((u, v))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence]) -> "WeightedGraph":
        """Cria o grafo a partir de triplas (u, v, w) em qualquer orientação."""
        canon = []
        for u, v, w in edges:
            a, b = canonical_edge(u, v)
            canon.append((a, b, float(w)))
        canon.sort(key=lambda e: (e[0], e[1]))
        return cls(n=int(n), edges=tuple(canon))

    @cached_property
    def weight_map(self) -> Dict[Edge, float]:
        return {(u, v): w for u, v, w in self.edges}

    @cached_property
    def adjacency(self) -> Dict[int, List[Tuple[int, float]]]:
        """Lista de adjacência por nó: node -> [(vizinho, peso), ...]."""
        adj: Dict[int, List[Tuple[int, float]]] = {i: [] for i in range(self.n)}
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    def weight(self, u: int, v: int) -> float:
        if u == v:
            return 0.0
        return self.weight_map.get(canonical_edge(u, v), 0.0)

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def to_dense(self) -> np.ndarray:
        mat = np.zeros((self.n, self.n))
        for u, v, w in self.edges:
            mat[u, v] = w
            mat[v, u] = w
        return mat

    def positive_weight_sum(self) -> float:
        return float(sum(max(w, 0.0) for _, _, w in self.edges))


@dataclass(frozen=True)
class DemandMatrix:
    """Matriz de demanda D*: simétrica, duplamente subestocástica, diagonal nula."""

    graph: WeightedGraph
    tol: float = field(default=SUBSTOCHASTIC_TOL, compare=False)

    def __post_init__(self):
        sums = np.zeros(self.graph.n)
        for u, v, w in self.graph.edges:
            if not (0.0 <= w <= 1.0 + self.tol):
                raise ValueError(f"Peso da aresta ({u}, {v}) = {w!r} fora de [0, 1].")
            sums[u] += w
            sums[v] += w
        for node, total in enumerate(sums):
            if total > 1.0 + self.tol:
                raise ValueError(
                    f"Nó {node}: soma das demandas incidentes {total!r} excede 1 "
                    f"(matriz não é duplamente subestocástica)."
                )

    @property
    def n(self) -> int:
        return self.graph.n

    def to_dense(self) -> np.ndarray:
        return self.graph.to_dense()


# ---------------------------------------------------------------------------
# Indexação de arestas e bitstrings
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class EdgeIndexing:
    """Bijeção determinística aresta <-> índice (ordem lexicográfica por (u, v))."""

    edges: Tuple[Edge, ...]

    @cached_property
    def index(self) -> Dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    @property
    def size(self) -> int:
        return len(self.edges)

    def edge_of(self, j: int) -> Edge:
        return self.edges[j]

    def index_of(self, edge: Edge) -> int:
        return self.index[canonical_edge(*edge)]


def build_edge_indexing(graph: WeightedGraph) -> EdgeIndexing:
    return EdgeIndexing(edges=tuple(sorted((u, v) for u, v, _ in graph.edges)))


def as_bits(x, length: Optional[int] = None) -> np.ndarray:
    """Converte "0101", lista ou array em vetor uint8; posição j = aresta j."""
    if isinstance(x, str):
        if any(ch not in "01" for ch in x):
            raise ValueError(f"Bitstring inválida: {x!r}")
        bits = np.fromiter((ch == "1" for ch in x), dtype=np.uint8, count=len(x))
    else:
        bits = np.asarray(x, dtype=np.uint8).ravel()
    if length is not None and bits.size != length:
        raise ValueError(f"Bitstring com {bits.size} bits, esperado {length}.")
    return bits


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def bitstring_to_subgraph(x, idx: EdgeIndexing) -> FrozenSet[Edge]:
    bits = as_bits(x, idx.size)
    return frozenset(idx.edges[j] for j in np.flatnonzero(bits))


def subgraph_to_bitstring(edges: Iterable[Edge], idx: EdgeIndexing) -> np.ndarray:
    bits = np.zeros(idx.size, dtype=np.uint8)
    for e in edges:
        bits[idx.index_of(e)] = 1
    return bits


def is_matching(edges: Iterable[Edge], graph: Optional[WeightedGraph] = None) -> bool:
    """Verdadeiro se nenhum nó aparece em duas arestas; o conjunto vazio é válido."""
    used = set()
    for u, v in edges:
        if graph is not None and not (0 <= u < graph.n and 0 <= v < graph.n):
            return False
        if u in used or v in used:
            return False
        used.add(u)
        used.add(v)
    return True


# ---------------------------------------------------------------------------
# Matchings e decomposições
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Matching:
    """Conjunto de arestas disjuntas; como matriz, binária, simétrica e subestocástica."""

    edges: FrozenSet[Edge]

    def __post_init__(self):
        if not is_matching(self.edges):
            raise ValueError(f"Arestas {sorted(self.edges)} não formam um matching.")

    @classmethod
    def of(cls, edges: Iterable[Sequence[int]]) -> "Matching":
        return cls(frozenset(canonical_edge(u, v) for u, v in edges))

    @classmethod
    def from_bits(cls, x, idx: EdgeIndexing) -> "Matching":
        return cls(bitstring_to_subgraph(x, idx))

    @cached_property
    def key(self) -> Tuple[Edge, ...]:
        """Chave de desempate: sequência ordenada de arestas (= índices lexicográficos)."""
        return tuple(sorted(self.edges))

    def __len__(self) -> int:
        return len(self.edges)

    def max_node(self) -> int:
        return max((v for _, v in self.edges), default=-1)

    def to_bits(self, idx: EdgeIndexing) -> np.ndarray:
        return subgraph_to_bitstring(self.edges, idx)

    def to_list(self) -> List[List[int]]:
        return [[u, v] for u, v in self.key]


@dataclass(frozen=True)
class Decomposition:
    """Lista ordenada de (Matching, peso) com o traço de erro por iteração."""

    entries: Tuple[Tuple[Matching, float], ...] = ()
    error_trace: Tuple[Tuple[int, int, float], ...] = ()
    timings: Mapping[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for _, alpha in self.entries:
            if alpha < 0:
                raise ValueError(f"Peso negativo {alpha!r} na decomposição.")
        total = sum(alpha for _, alpha in self.entries)
        if total > 1.0 + WEIGHT_SUM_TOL:
            raise ValueError(f"Soma dos pesos {total!r} excede 1.")

    @property
    def length(self) -> int:
        return sum(1 for _, alpha in self.entries if alpha > 0)

    @property
    def matchings(self) -> List[Matching]:
        return [m for m, _ in self.entries]

    @property
    def weights(self) -> List[float]:
        return [alpha for _, alpha in self.entries]

    def to_dense(self, n: int) -> np.ndarray:
        mat = np.zeros((n, n))
        for m, alpha in self.entries:
            if m.max_node() >= n:
                raise ValueError(f"Matching com nó {m.max_node()} incompatível com n = {n}.")
            for u, v in m.edges:
                mat[u, v] += alpha
                mat[v, u] += alpha
        return mat


def approximation_error(target: DemandMatrix, decomp: Decomposition) -> float:
    """(1/n²)·‖D* − Σ α M‖_F² sobre a matriz simétrica completa."""
    n = target.n
    diff = target.to_dense() - decomp.to_dense(n)
    return float(np.sum(diff * diff) / (n * n))


def residual_graph(target: DemandMatrix, decomp: Decomposition) -> WeightedGraph:
    """Grafo D* − X nas arestas da união dos suportes; pesos podem ser negativos."""
    weights: Dict[Edge, float] = dict(target.graph.weight_map)
    for m, alpha in decomp.entries:
        for e in m.edges:
            weights[e] = weights.get(e, 0.0) - alpha
    return WeightedGraph.from_edges(target.n, ((u, v, w) for (u, v), w in weights.items()))


def matching_weight(m: Matching, graph: WeightedGraph) -> float:
    wmap = graph.weight_map
    return float(sum(wmap.get(e, 0.0) for e in m.key))
