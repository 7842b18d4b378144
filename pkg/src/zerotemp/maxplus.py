"""Zero-temperature engine: maximum cycle mean, calibrated sub-actions as
max-plus eigenvectors, the Mane kernel and the Aubry (critical) subgraph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .graph import ContextGraph
from .shift import simple_cycles

ZERO_TOL = 1e-9


class MaxPlusError(RuntimeError):
    pass


class NoConvergence(MaxPlusError):
    pass


class PositiveCycleDetected(MaxPlusError):
    pass


@dataclass(frozen=True, eq=False)
class ManeKernel:
    """phi[c, d]: sup over paths c -> d (>= 1 edge) of sum(f - m_f)."""

    phi: np.ndarray
    m_f: float

    def __call__(self, c: int, d: int) -> float:
        return float(self.phi[c, d])


@dataclass(frozen=True, eq=False)
class MaxPlusSolution:
    m_f: float
    V: np.ndarray
    r: np.ndarray
    critical_edges: tuple[int, ...]
    aubry_contexts: tuple[int, ...]
    max_measure: np.ndarray
    max_cycle: tuple[int, ...]
    unique: bool

    def to_dict(self, graph: ContextGraph) -> dict:
        return {
            "m_f": self.m_f,
            "V": {graph.label(c): float(v) for c, v in enumerate(self.V)},
            "critical_edges": [graph.label(int(graph.src[e])) + "->" + graph.label(int(graph.dst[e]))
                               for e in self.critical_edges],
            "aubry_contexts": [graph.label(c) for c in self.aubry_contexts],
            "max_cycle": [graph.label(c) for c in self.max_cycle],
            "unique": self.unique,
        }


def max_mean_cycle(graph: ContextGraph) -> float:
    m, _ = kernels.karp(graph.n, graph.src, graph.dst, graph.weight)
    return float(m)


def brute_force_max_mean(graph: ContextGraph, max_len: int | None = None) -> float:
    """Maximum mean over all simple cycles (oracle for Karp)."""
    cycles = simple_cycles(graph.n, graph.successors, max_len or graph.n)
    best = -math.inf
    for cyc in cycles:
        edges = [graph.edge_index[(a, b)] for a, b in zip(cyc, cyc[1:] + cyc[:1])]
        best = max(best, math.fsum(graph.weight[edges]) / len(cyc))
    return best


def lax_operator(graph: ContextGraph, m_f: float, x: np.ndarray) -> np.ndarray:
    """(T x)(d) = max over in-edges c -> d of [f(c, d) + x(c)] - m_f."""
    return kernels.maxplus_apply(graph.n, graph.src, graph.dst, graph.weight, x) - m_f


def calibrated_subaction(graph: ContextGraph, m_f: float, tol: float = 1e-12,
                         init=None, max_iter: int | None = None) -> np.ndarray:
    """Max-plus eigenvector of the Lax operator, normalized to min V = 0.

    Plain value iteration x <- T x.  The orbit becomes periodic (period the
    cyclicity of the critical graph) after a finite transient; once
    x_t - x_{t-p} is constant to ``tol`` the max-plus sum of the last p
    iterates is a fixed point of T.

    The transient from x = 0 grows like 1/gap between the best and the
    second best cycle mean, so without ``init`` the iteration starts from
    max over critical c of phi(c, .), which is already a fixed point up to
    rounding.
    """
    n = graph.n
    x = _critical_rows(graph, m_f) if init is None else np.array(init, dtype=np.float64)
    cap = max_iter if max_iter is not None else n * n + 1000
    history = [x]
    for _ in range(cap):
        x = lax_operator(graph, m_f, x)
        history.append(x)
        if len(history) > n + 1:
            history.pop(0)
        for p in range(1, len(history)):
            diff = x - history[-1 - p]
            if diff.max() - diff.min() > tol:
                continue
            v = np.max(history[-p:], axis=0)
            if np.max(np.abs(lax_operator(graph, m_f, v) - v)) <= max(tol, 1e-12) * 10:
                return v - v.min()
    raise NoConvergence(f"value iteration did not become periodic within {cap} steps")


def _critical_rows(graph: ContextGraph, m_f: float) -> np.ndarray:
    phi = kernels.maxplus_closure(graph.n, graph.src, graph.dst, graph.weight - m_f)
    diag = np.diag(phi)
    critical = np.flatnonzero(diag >= diag.max() - ZERO_TOL)
    x = np.max(phi[critical], axis=0)
    x[critical] = np.maximum(x[critical], 0.0)
    if not np.all(np.isfinite(x)):
        return np.zeros(graph.n)
    return x - x.min()


def normalized_weights(graph: ContextGraph, m_f: float, V: np.ndarray) -> np.ndarray:
    """r(e) = m_f + V(target) - V(source) - f(e); >= 0 for a sub-action."""
    return m_f + V[graph.dst] - V[graph.src] - graph.weight


def mane_kernel(graph: ContextGraph, m_f: float) -> ManeKernel:
    phi = kernels.maxplus_closure(graph.n, graph.src, graph.dst, graph.weight - m_f)
    worst = float(np.max(np.diag(phi)))
    if worst > ZERO_TOL:
        raise PositiveCycleDetected(f"cycle with normalized weight {worst:.3e} > 0; m_f is too small")
    return ManeKernel(phi, m_f)


def mane_reconstruction(kernel: ManeKernel, anchor: int, value_at_anchor: float = 0.0) -> np.ndarray:
    """V(d) = V(a) + phi(a, d) for an Aubry context a (unique case)."""
    return value_at_anchor + kernel.phi[anchor]


def _smallest_cycle_through(start: int, succ: list[list[int]]) -> tuple[int, ...]:
    path = [start]
    on_path = {start}

    def search(node):
        nexts = succ[node]
        if start in nexts:
            return True
        for nxt in nexts:
            if nxt in on_path:
                continue
            path.append(nxt)
            on_path.add(nxt)
            if search(nxt):
                return True
            path.pop()
            on_path.discard(nxt)
        return False

    if not search(start):
        raise MaxPlusError(f"context {start} lies on no critical cycle")
    return tuple(path)


def aubry_and_measure(graph: ContextGraph, m_f: float, V: np.ndarray,
                      threshold: float = ZERO_TOL):
    """Critical edges, Aubry contexts, one maximizing cycle measure and the
    uniqueness flag (single critical component that is a single cycle)."""
    r = normalized_weights(graph, m_f, V)
    zero = np.flatnonzero(r <= threshold)
    n = graph.n
    adj = csr_matrix((np.ones(len(zero)), (graph.src[zero], graph.dst[zero])), shape=(n, n))
    _, labels = connected_components(adj, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=labels.max() + 1)
    critical = []
    for e in zero:
        s, d = int(graph.src[e]), int(graph.dst[e])
        if labels[s] == labels[d] and (sizes[labels[s]] > 1 or s == d):
            critical.append(int(e))
    aubry = sorted({int(graph.src[e]) for e in critical})
    comps = sorted({int(labels[c]) for c in aubry})
    unique = False
    if len(comps) == 1:
        unique = len(critical) == int(sizes[comps[0]])
    succ: list[list[int]] = [[] for _ in range(n)]
    for e in critical:
        succ[int(graph.src[e])].append(int(graph.dst[e]))
    for lst in succ:
        lst.sort()
    cycle = _smallest_cycle_through(aubry[0], succ)
    measure = np.zeros(graph.n_edges)
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        measure[graph.edge_index[(a, b)]] += 1.0 / len(cycle)
    return tuple(critical), tuple(aubry), measure, cycle, unique


def solve_maxplus(graph: ContextGraph, tol: float = 1e-12) -> MaxPlusSolution:
    m_f = max_mean_cycle(graph)
    V = calibrated_subaction(graph, m_f, tol)
    critical, aubry, measure, cycle, unique = aubry_and_measure(graph, m_f, V)
    # Karp's quotient can sit an ulp away from the mean of the cycle it found;
    # beta * (f - m_f) would carry that ulp times beta into every pressure
    m_cycle = math.fsum(measure * graph.weight)
    if m_cycle != m_f and abs(m_cycle - m_f) <= ZERO_TOL:
        m_f = m_cycle
        V = calibrated_subaction(graph, m_f, tol, init=V)
        critical, aubry, measure, cycle, unique = aubry_and_measure(graph, m_f, V)
    r = normalized_weights(graph, m_f, V)
    return MaxPlusSolution(m_f, V, r, critical, aubry, measure, cycle, unique)
