"""instances.py
Geração de matrizes de demanda sobre topologias completas, bipartidas e
heavy-hex: cada instância é uma combinação convexa de n matchings
aleatórios da topologia, com pesos uniformes no simplex.

A persistência em arquivo fica em ``store.py``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple

import networkx as nx
import numpy as np

from .graph_core import DemandMatrix, Edge, Matching, WeightedGraph, canonical_edge

logger = logging.getLogger("matchdecomp.instances")

KINDS = ("complete", "bipartite", "heavy-hex")
MATCHING_PROCEDURE = "permutation-coin-flip"
WEIGHT_PROCEDURE = "exponential-spacings"


@dataclass(frozen=True)
class Topology:
    kind: str
    n: int
    edges: Tuple[Edge, ...]
    params: Mapping[str, Any] = field(default_factory=dict)

    @cached_property
    def graph(self) -> WeightedGraph:
        """Grafo da topologia com peso unitário em cada aresta."""
        return WeightedGraph(self.n, tuple((u, v, 1.0) for u, v in self.edges))

    def max_degree(self) -> int:
        return max((self.graph.degree(v) for v in range(self.n)), default=0)

    def is_connected(self) -> bool:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return nx.is_connected(g)


@dataclass(frozen=True)
class GeneratorRecord:
    """Proveniência da instância: matchings e pesos que a geraram."""

    matchings: Tuple[Matching, ...] = ()
    weights: Tuple[float, ...] = ()
    seed: Optional[int] = None
    procedure: str = MATCHING_PROCEDURE

    @property
    def empty(self) -> bool:
        return not self.matchings


@dataclass(frozen=True)
class Instance:
    id: str
    topology: Topology
    demand: DemandMatrix
    generator: GeneratorRecord = field(default_factory=GeneratorRecord)

    @property
    def n(self) -> int:
        return self.demand.n

    @property
    def graph(self) -> WeightedGraph:
        return self.demand.graph


# ---------------------------------------------------------------------------
# Topologias
# ---------------------------------------------------------------------------
def _heavy_hex_lattice(rows: int, cols: int) -> nx.Graph:
    """Rede hexagonal com um nó de grau 2 ("flag") inserido em cada aresta."""
    hexagonal = nx.convert_node_labels_to_integers(
        nx.hexagonal_lattice_graph(rows, cols), ordering="sorted"
    )
    heavy = nx.Graph()
    heavy.add_nodes_from(sorted(hexagonal.nodes))
    next_id = hexagonal.number_of_nodes()
    for a, b in sorted(canonical_edge(a, b) for a, b in hexagonal.edges):
        heavy.add_edge(a, next_id)
        heavy.add_edge(next_id, b)
        next_id += 1
    return heavy


def heavy_hex_size(rows: int, cols: int) -> int:
    return _heavy_hex_lattice(rows, cols).number_of_nodes()


def _smallest_heavy_hex(n: int) -> Tuple[int, int]:
    side = 1
    while heavy_hex_size(side, side) < n:
        side += 1
    return side, side


def _heavy_hex_edges(n: int, rows: int, cols: int) -> Tuple[Edge, ...]:
    lattice = _heavy_hex_lattice(rows, cols)
    if lattice.number_of_nodes() < n:
        raise ValueError(
            f"Rede heavy-hex {rows}x{cols} tem {lattice.number_of_nodes()} nós, menos que n = {n}."
        )
    order = [0] + [v for _, v in nx.bfs_edges(lattice, 0, sort_neighbors=sorted)]
    relabel = {node: i for i, node in enumerate(order[:n])}
    sub = lattice.subgraph(relabel)
    return tuple(sorted(canonical_edge(relabel[a], relabel[b]) for a, b in sub.edges))


def make_topology(kind: str, n: int, params: Optional[Mapping[str, Any]] = None) -> Topology:
    params = dict(params or {})
    if n < 2:
        raise ValueError(f"Topologia exige n >= 2 (recebido {n}).")
    if kind == "complete":
        edges = tuple((u, v) for u in range(n) for v in range(u + 1, n))
    elif kind == "bipartite":
        if n % 2:
            raise ValueError(f"Topologia bipartida exige n par (recebido {n}).")
        half = n // 2
        params.setdefault('parts', [half, half])
        edges = tuple(sorted((u, v) for u in range(half) for v in range(half, n)))
    elif kind == "heavy-hex":
        if 'rows' not in params or 'cols' not in params:
            params['rows'], params['cols'] = _smallest_heavy_hex(n)
        edges = _heavy_hex_edges(n, int(params['rows']), int(params['cols']))
    else:
        raise ValueError(f"Tipo de topologia desconhecido: {kind!r} (use {', '.join(KINDS)}).")
    return Topology(kind=kind, n=n, edges=edges, params=params)


# ---------------------------------------------------------------------------
# Amostragem
# ---------------------------------------------------------------------------
def sample_random_matching(topology: Topology, rng: np.random.Generator) -> Matching:
    """Permutação aleatória das arestas; cada aresta compatível entra com probabilidade 1/2."""
    used = set()
    chosen: List[Edge] = []
    for j in rng.permutation(len(topology.edges)):
        u, v = topology.edges[j]
        if u in used or v in used:
            continue
        if rng.random() < 0.5:
            chosen.append((u, v))
            used.update((u, v))
    return Matching(frozenset(chosen))


def sample_simplex_weights(count: int, rng: np.random.Generator) -> np.ndarray:
    draws = rng.exponential(size=count)
    return draws / draws.sum()


def generate_instance(topology: Topology, rng: np.random.Generator,
                      instance_id: Optional[str] = None, seed: Optional[int] = None,
                      count: Optional[int] = None) -> Instance:
    """D* = Σ α_i M_i com *count* (padrão n) matchings aleatórios, duplicatas permitidas."""
    count = topology.n if count is None else count
    matchings = tuple(sample_random_matching(topology, rng) for _ in range(count))
    alphas = sample_simplex_weights(count, rng)

    demand: Dict[Edge, float] = {}
    for m, alpha in zip(matchings, alphas):
        for e in m.key:
            demand[e] = demand.get(e, 0.0) + float(alpha)
    graph = WeightedGraph.from_edges(topology.n, ((u, v, w) for (u, v), w in demand.items() if w > 0))

    instance_id = instance_id or f"{topology.kind}_n{topology.n}"
    return Instance(
        id=instance_id,
        topology=topology,
        demand=DemandMatrix(graph),
        generator=GeneratorRecord(matchings, tuple(float(a) for a in alphas), seed),
    )


def instance_file_name(kind: str, n: int, k: int) -> str:
    return f"{kind}_n{n}_id{k}.instance"


def instance_id(kind: str, n: int, k: int) -> str:
    return f"{kind}_n{n}_id{k}"


def generate_family(kind: str, n: int, count: int = 10, base_seed: int = 0,
                    params: Optional[Mapping[str, Any]] = None) -> Iterator[Instance]:
    """Instâncias k = 0..count-1 com semente base_seed + k."""
    topology = make_topology(kind, n, params)
    for k in range(count):
        seed = base_seed + k
        yield generate_instance(topology, np.random.default_rng(seed), instance_id(kind, n, k), seed)
