"""Deviation function I = sum_j R_+ o sigma^j and its infimum over cylinders.

Why inf over a cylinder is a shortest-path problem: R_+ = r >= 0 is a
function of the context edge, so I(x) is the r-length of the infinite context
path of x.  If I(x) < inf, all but finitely many steps have r below any
threshold; on a finite graph the tail therefore eventually runs inside the
zero-r subgraph, and an infinite walk there ends in one of its cycles, i.e.
in the critical (Aubry) subgraph.  So for x in [w],

    I(x) >= i_prefix(w) + dist(last context of w, Aubry contexts),

and the bound is attained by following a shortest path to an Aubry context
and then circling a critical cycle forever (all later r are zero).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import ContextGraph
from .maxplus import ZERO_TOL, MaxPlusSolution, ManeKernel, normalized_weights
from .potential import InadmissibleWord
from .shift import format_word, simple_cycles


class DeviationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RPlusWeights:
    """Per-edge r(e) = m_f + V(target) - V(source) - f(e), clamped at 0."""

    graph: ContextGraph
    r: np.ndarray
    m_f: float
    V: np.ndarray

    def __call__(self, edge: int) -> float:
        return float(self.r[edge])


@dataclass(frozen=True)
class DeviationResult:
    word: tuple[int, ...]
    inf_I: float
    witness: tuple[int, ...]
    prefix_cost: float

    def to_dict(self, graph: ContextGraph | None = None) -> dict:
        witness = [graph.label(c) for c in self.witness] if graph else list(self.witness)
        return {
            "word": format_word(self.word),
            "inf_I": _encode(self.inf_I),
            "witness_path": witness,
            "prefix_cost": _encode(self.prefix_cost),
        }


def _encode(x: float):
    # JSON has no infinity; +inf is spelled out rather than replaced by a number
    return "+inf" if x == math.inf else x


def r_plus_weights(graph: ContextGraph, m_f: float, V: np.ndarray,
                   tol: float = 1e-12) -> RPlusWeights:
    V = np.asarray(V, dtype=np.float64)
    # pin min V = 0 so that V and V + c give the same bits whenever V + c is exact
    V = V - V.min()
    r = normalized_weights(graph, m_f, V)
    if r.min() < -tol:
        e = int(np.argmin(r))
        raise DeviationError(f"V is not a sub-action: r = {r[e]:.3e} on edge {graph.words[e]}")
    return RPlusWeights(graph, np.maximum(r, 0.0), m_f, V)


def weights_from_solution(graph: ContextGraph, sol: MaxPlusSolution) -> RPlusWeights:
    return r_plus_weights(graph, sol.m_f, sol.V)


def r_plus(weights: RPlusWeights, edge: int) -> float:
    return weights(edge)


def i_prefix(weights: RPlusWeights, word: Sequence[int]) -> float:
    """R_+^n along the context path of ``word``."""
    if not weights.graph.shift.is_admissible(word):
        raise InadmissibleWord(format_word(word))
    if len(word) < weights.graph.potential.range:
        raise DeviationError(f"word shorter than the range {weights.graph.potential.range}")
    return math.fsum(weights.r[weights.graph.edge_path(word)])


def i_of_eventually_periodic(weights: RPlusWeights, preperiod: Sequence[int],
                             cycle: Sequence[int], threshold: float = ZERO_TOL) -> float:
    """I(x) for x = preperiod + cycle repeated forever; +inf unless every
    step of the periodic tail has r = 0."""
    graph = weights.graph
    p = len(cycle)
    if p == 0:
        raise DeviationError("empty cycle")
    m = graph.context_len
    reps = 2 + (m + 1) // p
    word = tuple(preperiod) + tuple(cycle) * reps
    if not graph.shift.is_admissible(word):
        raise InadmissibleWord(format_word(word))
    path = graph.edge_path(word)
    pre = len(preperiod)
    tail = weights.r[path[pre:pre + p]]
    if np.any(tail > threshold):
        return math.inf
    return math.fsum(weights.r[path[:pre]])


def distances_to_aubry(weights: RPlusWeights, aubry: Sequence[int]):
    """Dijkstra on reversed edges from all Aubry contexts.

    Returns ``(dist, nxt)``: r-distance to the nearest Aubry context and the
    next context on a shortest path (ties go to the smaller context).
    """
    graph = weights.graph
    n = graph.n
    dist = np.full(n, math.inf)
    nxt = np.full(n, -1, dtype=np.int64)
    heap = []
    for a in aubry:
        dist[a] = 0.0
        heap.append((0.0, a))
    heapq.heapify(heap)
    done = np.zeros(n, dtype=bool)
    while heap:
        d, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for e in graph.in_edges[v]:
            u = int(graph.src[e])
            if done[u]:
                continue
            cand = d + weights.r[e]
            if cand < dist[u] or (cand == dist[u] and v < nxt[u]):
                dist[u] = cand
                nxt[u] = v
                heapq.heappush(heap, (cand, u))
    return dist, nxt


def inf_deviation_on_cylinder(weights: RPlusWeights, aubry_contexts: Sequence[int],
                              word: Sequence[int], _cache=None) -> DeviationResult:
    """inf over x in [word] of I(x) = i_prefix(word) + dist(last context, Aubry)."""
    graph = weights.graph
    word = tuple(word)
    if not graph.shift.is_admissible(word):
        return DeviationResult(word, math.inf, (), math.inf)
    dist, nxt = _cache if _cache is not None else distances_to_aubry(weights, aubry_contexts)
    m = graph.context_len
    if len(word) < m:
        # the cylinder is a union of context cylinders; take the best one
        candidates = graph.contexts_with_prefix(word)
        start = min(candidates, key=lambda c: (dist[c], c))
        prefix = 0.0
    else:
        start = graph.index[word[-m:]]
        prefix = math.fsum(weights.r[graph.edge_path(word)])
    witness = [start]
    while witness[-1] not in aubry_contexts and nxt[witness[-1]] >= 0:
        witness.append(int(nxt[witness[-1]]))
    return DeviationResult(word, prefix + float(dist[start]), tuple(witness), prefix)


def witness_cost(weights: RPlusWeights, witness: Sequence[int]) -> float:
    graph = weights.graph
    return math.fsum(weights.r[graph.edge_index[(a, b)]] for a, b in zip(witness, witness[1:]))


def deviation_report(weights: RPlusWeights, aubry_contexts: Sequence[int],
                     words: Sequence[Sequence[int]]) -> list[DeviationResult]:
    cache = distances_to_aubry(weights, aubry_contexts)
    return [inf_deviation_on_cylinder(weights, aubry_contexts, w, cache) for w in words]


def zero_level_check(weights: RPlusWeights, kernel: ManeKernel, unique: bool,
                     max_period: int, threshold: float = ZERO_TOL) -> dict:
    """Scan simple context cycles of period <= max_period and check

        mean f = m_f  <=>  r = 0 on every step  <=>  S_f(p, p) = 0 on the orbit,

    where p runs over the periodic orbit.  The Mane value of a periodic point
    is zero exactly when each of its steps c -> d closes a zero-weight loop,
    f(c, d) - m_f + phi(d, c) = 0; phi(c, c) = 0 alone is not enough, since a
    context on the critical cycle also carries non-critical loops.
    """
    if not unique:
        return {"skipped": True, "reason": "maximizing measure not unique", "checked": 0,
                "violations": []}
    graph = weights.graph
    violations = []
    cycles = simple_cycles(graph.n, graph.successors, max_period)
    for cyc in cycles:
        steps = list(zip(cyc, cyc[1:] + cyc[:1]))
        edges = [graph.edge_index[st] for st in steps]
        mean_is_max = abs(math.fsum(graph.weight[edges]) / len(cyc) - weights.m_f) <= threshold
        r_zero = bool(np.all(weights.r[edges] <= threshold))
        mane_zero = all(
            abs(graph.weight[e] - kernel.m_f + kernel.phi[d, c]) <= threshold
            and abs(kernel.phi[c, c]) <= threshold
            for e, (c, d) in zip(edges, steps))
        if not (mean_is_max == r_zero == mane_zero):
            violations.append({"cycle": [graph.label(c) for c in cyc], "mean_is_max": mean_is_max,
                               "r_zero": r_zero, "mane_zero": mane_zero})
    return {"skipped": False, "checked": len(cycles), "violations": violations}
