"""matching_exact.py
Matching de peso máximo em grafos gerais (oráculo de minimização linear do
Frank-Wolfe) e enumeração exaustiva de matchings, usada como oráculo em testes.

O blossom de Edmonds vem do NetworkX; aqui só tratamos o pré-processamento
(arestas não positivas nunca entram) e o desempate determinístico.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Sequence, Set, Tuple

import networkx as nx

from .graph_core import Edge, Matching, WeightedGraph, matching_weight

logger = logging.getLogger("matchdecomp.matching")

ENUMERATION_CAP = 24
EQUAL_TOL = 1e-12


@dataclass(frozen=True)
class MatchingSolution:
    matching: Matching
    weight: float


def _blossom(edges: Sequence[Tuple[int, int, float]]) -> Tuple[Set[Edge], float]:
    """Executa o blossom do NetworkX e devolve (arestas canônicas, peso total)."""
    if not edges:
        return set(), 0.0
    g = nx.Graph()
    g.add_weighted_edges_from(edges)
    mate = nx.max_weight_matching(g, maxcardinality=False, weight="weight")
    chosen = {(u, v) if u < v else (v, u) for u, v in mate}
    wmap = {(u, v): w for u, v, w in edges}
    return chosen, sum(wmap[e] for e in sorted(chosen))


def max_weight_matching(graph: WeightedGraph, tol: float = EQUAL_TOL) -> MatchingSolution:
    """Matching de peso máximo com desempate pela menor sequência de índices de arestas.

    Percorre as arestas em ordem lexicográfica e fixa cada uma que ainda admite
    uma solução ótima; o resultado é a menor sequência ordenada entre os ótimos.
    """
    positive = [(u, v, w) for u, v, w in graph.edges if w > 0]
    current, best = _blossom(positive)
    if not current:
        return MatchingSolution(Matching(frozenset()), 0.0)

    slack = tol * max(1.0, abs(best))
    fixed: List[Edge] = []
    fixed_weight = 0.0
    covered: Set[int] = set()

    for pos, (u, v, w) in enumerate(positive):
        if u in covered or v in covered:
            continue
        if (u, v) in current:
            fixed.append((u, v))
            fixed_weight += w
            covered.update((u, v))
            continue
        blocked = covered | {u, v}
        rest = [e for e in positive[pos + 1:] if e[0] not in blocked and e[1] not in blocked]
        sub, sub_weight = _blossom(rest)
        if fixed_weight + w + sub_weight >= best - slack:
            fixed.append((u, v))
            fixed_weight += w
            covered.update((u, v))
            current = set(fixed) | sub

    matching = Matching(frozenset(fixed))
    return MatchingSolution(matching, matching_weight(matching, graph))


def enumerate_matchings(graph: WeightedGraph, cap: int = ENUMERATION_CAP) -> List[Matching]:
    """Todos os subconjuntos de arestas que são matchings, incluindo o vazio."""
    edges = [(u, v) for u, v, _ in graph.edges]
    if len(edges) > cap:
        raise RuntimeError(
            f"Enumeração de matchings limitada a {cap} arestas (grafo tem {len(edges)})."
        )

    found: List[Matching] = []

    def _extend(start: int, chosen: List[Edge], used: Set[int]):
        found.append(Matching(frozenset(chosen)))
        for j in range(start, len(edges)):
            u, v = edges[j]
            if u in used or v in used:
                continue
            chosen.append((u, v))
            used.update((u, v))
            _extend(j + 1, chosen, used)
            chosen.pop()
            used.difference_update((u, v))

    _extend(0, [], set())
    return found
