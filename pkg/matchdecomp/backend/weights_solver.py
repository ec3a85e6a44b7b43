"""weights_solver.py
Recalcula os pesos das decomposições:

* ``solve_simplex_ls``: mínimos quadrados sobre {u >= 0, Σu <= 1} (ou Σu = 1),
  o passo totalmente corretivo do Frank-Wolfe;
* ``solve_cardinality_ls``: a mesma função objetivo com no máximo m pesos
  positivos (branch-and-bound exato dentro de um orçamento, guloso fora dele).

Tudo é formulado sobre as arestas: a coluna i da matriz de projeto A é o
indicador das arestas do matching i, e ‖D* − Σ u_i M_i‖_F² = 2‖d − A u‖².
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .graph_core import DemandMatrix, Edge, Matching

logger = logging.getLogger("matchdecomp.weights")

SUM_MODES = ("le", "eq")
NONZERO_THRESHOLD = 1e-9
CARDINALITY_BUDGET = 1_000_000
GREEDY_SCREEN = 8
KKT_TOL = 1e-12
IMPROVE_TOL = 1e-15


@dataclass(frozen=True)
class WeightProblem:
    target: DemandMatrix
    matchings: Tuple[Matching, ...]
    sum_mode: str = "le"
    max_support: Optional[int] = None

    def __post_init__(self):
        if self.sum_mode not in SUM_MODES:
            raise ValueError(f"sum_mode inválido: {self.sum_mode!r} (use 'le' ou 'eq').")
        if len(set(self.matchings)) != len(self.matchings):
            raise ValueError("Os matchings de um WeightProblem devem ser distintos.")
        if self.max_support is not None:
            if self.max_support < 1:
                raise ValueError(f"max_support deve ser >= 1 (recebido {self.max_support}).")
            if self.max_support > len(self.matchings):
                raise ValueError(
                    f"max_support ({self.max_support}) maior que o número de matchings ({len(self.matchings)})."
                )


@dataclass(frozen=True, eq=False)
class WeightSolution:
    weights: np.ndarray
    objective: float
    exact: bool = True
    nodes: int = 0

    @property
    def support(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.weights > 0)]


@dataclass(eq=False)
class _Design:
    """Matriz de projeto sobre a união das arestas de D* e dos matchings."""

    A: np.ndarray
    d: np.ndarray
    G: np.ndarray = field(init=False)
    b: np.ndarray = field(init=False)

    def __post_init__(self):
        self.G = self.A.T @ self.A
        self.b = self.A.T @ self.d

    def objective(self, u: np.ndarray) -> float:
        r = self.d - self.A @ u
        return float(2.0 * (r @ r))


def _design(problem: WeightProblem) -> _Design:
    edges: Dict[Edge, int] = {}
    for u, v, _ in problem.target.graph.edges:
        edges.setdefault((u, v), len(edges))
    for m in problem.matchings:
        for e in m.key:
            edges.setdefault(e, len(edges))
    A = np.zeros((len(edges), len(problem.matchings)))
    for i, m in enumerate(problem.matchings):
        for e in m.edges:
            A[edges[e], i] = 1.0
    d = np.zeros(len(edges))
    for u, v, w in problem.target.graph.edges:
        d[edges[(u, v)]] = w
    return _Design(A, d)


# ---------------------------------------------------------------------------
# QP sobre o simplex
# ---------------------------------------------------------------------------
def _face_minimize(G: np.ndarray, b: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Minimiza na face definida pelo suporte de u, com passos até a fronteira."""
    u = u.copy()
    for _ in range(u.size + 1):
        P = np.flatnonzero(u > 0)
        k = P.size
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = G[np.ix_(P, P)]
        kkt[:k, k] = 1.0
        kkt[k, :k] = 1.0
        rhs = np.concatenate([b[P], [1.0]])
        z = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]
        blocking = z <= 0
        if not blocking.any():
            u[:] = 0.0
            u[P] = z
            return u
        ratios = u[P][blocking] / (u[P][blocking] - z[blocking])
        alpha = float(ratios.min())
        u[P] = u[P] + alpha * (z - u[P])
        hit = P[blocking][ratios <= alpha + IMPROVE_TOL]
        u[hit] = 0.0
        u[u < 0] = 0.0
    return u


def _simplex_qp(G: np.ndarray, b: np.ndarray, u0: np.ndarray,
                tol: float = KKT_TOL, max_iter: Optional[int] = None) -> np.ndarray:
    """min ½ uᵀGu − bᵀu sujeito a u >= 0, Σu = 1 (conjunto ativo primal)."""
    u = u0.astype(float).copy()
    max_iter = max_iter or 50 * u.size + 100
    for _ in range(max_iter):
        u = _face_minimize(G, b, u)
        g = G @ u - b
        P = np.flatnonzero(u > 0)
        mu = -float(g[P].mean())
        nu = g + mu
        nu[P] = np.inf
        j = int(np.argmin(nu))
        if not nu[j] < -tol:
            return u
        # passo par-a-par: j entra com peso positivo tirando massa do maior peso
        i = int(P[np.argmax(u[P])])
        slope = g[j] - g[i]
        curv = G[j, j] + G[i, i] - 2.0 * G[i, j]
        t = u[i] if curv <= 0 else min(u[i], -slope / curv)
        u[j] += t
        u[i] -= t
        if u[i] <= IMPROVE_TOL:
            u[i] = 0.0
    logger.warning(f"Conjunto ativo atingiu {max_iter} iterações sem certificar KKT.")
    return u


def _solve_restricted(design: _Design, subset: Sequence[int], sum_mode: str,
                      threshold: float) -> Tuple[np.ndarray, float]:
    """Resolve o QP do simplex só com as colunas em *subset*; devolve (u completo, objetivo)."""
    m = design.A.shape[1]
    u_full = np.zeros(m)
    S = np.asarray(sorted(subset), dtype=np.int64)
    if S.size == 0:
        if sum_mode == "eq":
            raise ValueError("Σu = 1 exige pelo menos um matching.")
        return u_full, design.objective(u_full)

    G = design.G[np.ix_(S, S)]
    b = design.b[S]
    if sum_mode == "le":
        # variável de folga com coluna nula transforma Σu <= 1 em Σu = 1
        G = np.pad(G, ((0, 1), (0, 1)))
        b = np.append(b, 0.0)
        u0 = np.zeros(S.size + 1)
        u0[-1] = 1.0
    else:
        u0 = np.zeros(S.size)
        u0[int(np.argmin(0.5 * np.diag(G) - b))] = 1.0
    u = _simplex_qp(G, b, u0)[:S.size]
    u_full[S] = u
    u_full = _apply_threshold(u_full, sum_mode, threshold)
    return u_full, design.objective(u_full)


def _apply_threshold(u: np.ndarray, sum_mode: str, threshold: float) -> np.ndarray:
    u = np.where(u > threshold, u, 0.0)
    total = u.sum()
    if sum_mode == "eq" and total > 0:
        u[int(np.argmax(u))] += 1.0 - total
    elif total > 1.0:
        u /= total
    return u


def solve_simplex_ls(problem: WeightProblem, threshold: float = NONZERO_THRESHOLD) -> WeightSolution:
    design = _design(problem)
    m = len(problem.matchings)
    u, obj = _solve_restricted(design, range(m), problem.sum_mode, threshold)
    return WeightSolution(u, obj, exact=True)


# ---------------------------------------------------------------------------
# Variante com cardinalidade
# ---------------------------------------------------------------------------
class _SupportCache:
    def __init__(self, design: _Design, sum_mode: str, threshold: float):
        self.design = design
        self.sum_mode = sum_mode
        self.threshold = threshold
        self._cache: Dict[FrozenSet[int], Tuple[np.ndarray, float]] = {}
        self.solves = 0

    def __call__(self, subset: Iterable[int]) -> Tuple[np.ndarray, float]:
        key = frozenset(int(i) for i in subset)
        if not key and self.sum_mode == "eq":
            return np.zeros(self.design.A.shape[1]), float("inf")
        if key not in self._cache:
            self.solves += 1
            self._cache[key] = _solve_restricted(self.design, key, self.sum_mode, self.threshold)
        return self._cache[key]


def _better(candidate: Tuple[np.ndarray, float], best: Optional[Tuple[np.ndarray, float]]) -> bool:
    return best is None or candidate[1] < best[1] - IMPROVE_TOL * max(1.0, abs(best[1]))


def _branch_and_bound(solve: _SupportCache, m_items: int, max_support: int,
                      best: Optional[Tuple[np.ndarray, float]], budget: int):
    """Busca exata em profundidade; inclui antes de excluir. Devolve (melhor, nós, completo)."""
    nodes = 0
    complete = True
    stack: List[Tuple[Tuple[int, ...], int]] = [((), 0)]
    while stack:
        included, nxt = stack.pop()
        nodes += 1
        if nodes > budget:
            complete = False
            break
        remaining = () if len(included) == max_support else tuple(range(nxt, m_items))
        relaxed = solve(included + remaining)
        if best is not None and relaxed[1] >= best[1] - IMPROVE_TOL * max(1.0, abs(best[1])):
            continue
        if np.count_nonzero(relaxed[0]) <= max_support:
            # a relaxação já respeita a cardinalidade: ótimo deste ramo
            if _better(relaxed, best):
                best = relaxed
            continue
        if nxt >= m_items:
            continue
        # empilhar exclusão primeiro para que a inclusão seja explorada antes
        stack.append((included, nxt + 1))
        if len(included) < max_support:
            stack.append((included + (nxt,), nxt + 1))
    return best, nodes, complete


def _greedy(solve: _SupportCache, design: _Design, max_support: int, screen: int):
    """Seleção progressiva com triagem por gradiente e uma rodada de trocas."""
    m_items = design.A.shape[1]
    support: List[int] = []
    current = solve(support) if solve.sum_mode == "le" else None
    for _ in range(max_support):
        u = current[0] if current is not None else np.zeros(m_items)
        grad = design.G @ u - design.b
        pool = [i for i in np.argsort(grad, kind="stable") if int(i) not in support][:screen]
        step = None
        step_item = None
        for i in pool:
            trial = solve(support + [int(i)])
            if _better(trial, step):
                step, step_item = trial, int(i)
        if step is None or (current is not None and not _better(step, current)):
            break
        support.append(step_item)
        current = step

    if current is None:
        return None
    grad = design.G @ current[0] - design.b
    pool = [int(i) for i in np.argsort(grad, kind="stable") if int(i) not in support][:screen]
    for out in sorted(support):
        for cand in pool:
            if cand in support:
                continue
            swapped = [i for i in support if i != out] + [cand]
            trial = solve(swapped)
            if _better(trial, current):
                support, current = swapped, trial
                break
    return current


def solve_cardinality_ls(problem: WeightProblem,
                         incumbents: Sequence[np.ndarray] = (),
                         budget: int = CARDINALITY_BUDGET,
                         screen: int = GREEDY_SCREEN,
                         threshold: float = NONZERO_THRESHOLD) -> WeightSolution:
    """Mínimos quadrados com no máximo ``max_support`` pesos positivos.

    Os *incumbents* (por exemplo os pesos da iteração anterior) inicializam a
    busca: o objetivo devolvido nunca é pior que o de nenhum deles.
    """
    m_items = len(problem.matchings)
    max_support = problem.max_support if problem.max_support is not None else m_items
    if max_support >= m_items:
        return solve_simplex_ls(problem, threshold)

    design = _design(problem)
    solve = _SupportCache(design, problem.sum_mode, threshold)

    best: Optional[Tuple[np.ndarray, float]] = None
    for inc in incumbents:
        inc = _apply_threshold(np.asarray(inc, dtype=float), problem.sum_mode, threshold)
        if inc.size != m_items or np.count_nonzero(inc) > max_support:
            continue
        if problem.sum_mode == "eq" and abs(inc.sum() - 1.0) > 1e-9:
            continue
        if not inc.any():
            cand = (inc, design.objective(inc))
            if _better(cand, best):
                best = cand
            continue
        for cand in ((inc, design.objective(inc)), solve(np.flatnonzero(inc))):
            if _better(cand, best):
                best = cand

    exact = False
    nodes = 0
    if comb(m_items, max_support) <= budget:
        best, nodes, exact = _branch_and_bound(solve, m_items, max_support, best, budget)
    else:
        greedy = _greedy(solve, design, max_support, screen)
        if greedy is not None and _better(greedy, best):
            best = greedy

    if best is None:
        # só ocorre em modo Σu = 1 sem incumbente: melhor vértice isolado
        best = min((solve([i]) for i in range(m_items)), key=lambda c: c[1])
    logger.debug(
        f"Cardinalidade m={max_support} sobre {m_items} matchings: objetivo {best[1]:.3e}, "
        f"{'exato' if exact else 'heurístico'}, {nodes} nós, {solve.solves} subproblemas"
    )
    return WeightSolution(best[0].copy(), best[1], exact=exact, nodes=nodes)
