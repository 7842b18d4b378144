"""Positive-temperature engine: log-domain Ruelle operator, RPF data,
Gurevich pressure, Gibbs cylinder measures and equilibrium diagnostics.

All Boltzmann weights are handled as logarithms.  The dense backend
conjugates the transfer matrix by exp(beta * sub-action) before the
eigensolve, so that at large beta every entry is <= 1 and the Perron vector
components are O(1) instead of spanning hundreds of orders of magnitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .graph import ContextGraph, build_context_graph
from .maxplus import MaxPlusSolution, calibrated_subaction, max_mean_cycle, solve_maxplus
from .potential import Potential, WordTooShort, birkhoff_sum
from .shift import MarkovShift, is_topologically_mixing

DENSE_LIMIT = 2048


class TransferError(RuntimeError):
    pass


class NoConvergence(TransferError):
    pass


class NotMixing(TransferError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RpfSolution:
    beta: float
    log_lambda: float
    log_h: np.ndarray
    nu: np.ndarray
    log_nu: np.ndarray
    residual: float
    iterations: int
    backend: str = "dense"
    graph: ContextGraph | None = field(default=None, repr=False)
    m_f: float = math.nan
    pressure_defect: float = math.nan  # P(beta f) - beta m_f, free of cancellation

    @property
    def pressure(self) -> float:
        return self.log_lambda

    @property
    def v_beta(self) -> np.ndarray:
        return self.log_h / self.beta

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "log_lambda": self.log_lambda,
            "log_h": [float(v) for v in self.log_h],
            "nu": [float(v) for v in self.nu],
            "log_nu": [float(v) for v in self.log_nu],
            "residual": self.residual,
            "iterations": self.iterations,
            "m_f": self.m_f,
            "pressure_defect": self.pressure_defect,
        }

    @classmethod
    def from_dict(cls, data: dict, graph: ContextGraph | None = None) -> "RpfSolution":
        log_nu = np.array(data.get("log_nu") or np.log(data["nu"]), dtype=np.float64)
        return cls(float(data["beta"]), float(data["log_lambda"]),
                   np.array(data["log_h"], dtype=np.float64), np.exp(log_nu), log_nu,
                   float(data["residual"]), int(data["iterations"]), graph=graph,
                   m_f=float(data.get("m_f", math.nan)),
                   pressure_defect=float(data.get("pressure_defect", math.nan)))


@dataclass(frozen=True, eq=False)
class GibbsChain:
    """Stationary Markov chain on contexts realizing mu_beta."""

    graph: ContextGraph
    rpf: RpfSolution
    log_pi: np.ndarray
    log_P: np.ndarray

    @property
    def pi(self) -> np.ndarray:
        return np.exp(self.log_pi)

    @property
    def P(self) -> np.ndarray:
        return np.exp(self.log_P)

    def transition_matrix(self) -> np.ndarray:
        mat = np.zeros((self.graph.n, self.graph.n))
        mat[self.graph.src, self.graph.dst] = self.P
        return mat


def _require_mixing(shift: MarkovShift) -> None:
    if not is_topologically_mixing(shift):
        raise NotMixing("the transfer engine needs a topologically mixing shift")


def apply_ruelle(shift: MarkovShift, potential: Potential, beta: float, log_g,
                 graph: ContextGraph | None = None) -> np.ndarray:
    """log(L_{beta f} exp(log_g)) on contexts."""
    graph = graph or build_context_graph(shift, potential)
    return kernels.logsumexp_in(graph.n, graph.src, graph.dst, beta * graph.weight,
                                np.asarray(log_g, dtype=np.float64))


def _eigen_residual(graph: ContextGraph, logw: np.ndarray, log_lambda: float, u: np.ndarray) -> float:
    """max_d |log sum_{c->d} exp(logw + u(c) - u(d)) - log_lambda|."""
    terms = logw + (u[graph.src] - u[graph.dst]) - log_lambda
    out = kernels.logsumexp_in(graph.n, graph.src, graph.dst, terms, np.zeros(graph.n))
    return float(np.max(np.abs(out)))


def _perron_log(graph: ContextGraph, logw: np.ndarray, u: np.ndarray, shift_const: float):
    """One conjugated dense eigensolve.

    Builds A[d, c] = exp(logw(c->d) + u(c) - u(d) - shift_const), takes its
    Perron root and returns the improved log eigenvector u + log(x) and
    shift_const + log(lambda_A).  The eigenvector is the null vector of
    A - lambda I from an SVD: LAPACK's balanced eigenvector routine loses
    it outright when entries span dozens of orders of magnitude.
    """
    n = graph.n
    a = np.zeros((n, n))
    expo = logw + u[graph.src] - u[graph.dst] - shift_const
    a[graph.dst, graph.src] = np.exp(np.minimum(expo, 700.0))
    vals = np.linalg.eigvals(a)
    lam = float(vals[np.argmax(vals.real)].real)
    if not lam > 0:
        raise NoConvergence("dense eigensolve lost the Perron root")
    _, _, vt = np.linalg.svd(a - lam * np.eye(n))
    x = np.abs(vt[-1])
    x /= x.max()
    with np.errstate(divide="ignore"):
        new_u = u + np.log(x)
    return new_u, shift_const + math.log(lam)


def _repair(graph: ContextGraph, logw: np.ndarray, u: np.ndarray, log_lambda: float) -> np.ndarray:
    """Fill components lost to underflow by normalized Ruelle steps."""
    for _ in range(graph.n):
        if np.all(np.isfinite(u)):
            break
        nxt = kernels.logsumexp_in(graph.n, graph.src, graph.dst, logw, u) - log_lambda
        u = np.where(np.isfinite(u), u, nxt)
    return u


def _dense_side(graph: ContextGraph, rel_w: np.ndarray, scale: np.ndarray, tol: float,
                rounds: int = 8) -> tuple[np.ndarray, float]:
    """Perron data of the operator with log-weights ``rel_w`` = beta (f - m_f).

    Each round re-centres the conjugation on the previous vector; stops
    once the log residual no longer improves.  Returns (log vector, log root).
    """
    u = scale
    excess = 0.0
    best = (math.inf, u, excess)
    for _ in range(rounds):
        u, excess = _perron_log(graph, rel_w, u, excess)
        u = _repair(graph, rel_w, u, excess)
        u -= u.max()
        res = _eigen_residual(graph, rel_w, excess, u) if np.all(np.isfinite(u)) else math.inf
        if res < best[0]:
            best = (res, u, excess)
        elif best[0] <= tol:
            break
    return best[1], best[2]


def rpf_solve(shift: MarkovShift, potential: Potential, beta: float, tol: float = 1e-12,
              max_iter: int = 100_000, backend: str = "auto",
              graph: ContextGraph | None = None,
              maxplus: MaxPlusSolution | None = None) -> RpfSolution:
    """RPF triple of L_{beta f}: log lambda = P(beta f), log h, nu.

    ``backend`` is ``"dense"`` (conjugated eigensolve, the default up to
    2048 contexts), ``"power"`` (log-domain power iteration) or ``"auto"``.
    nu is normalized to a probability on contexts and h so that
    sum_c nu(c) h(c) = 1.
    """
    _require_mixing(shift)
    graph = graph or build_context_graph(shift, potential)
    if backend == "auto":
        backend = "dense" if graph.n <= DENSE_LIMIT else "power"
    rev = graph.reversed()
    if backend == "dense":
        mp = maxplus or solve_maxplus(graph)
        m_f = mp.m_f
    elif backend == "power":
        m_f = maxplus.m_f if maxplus is not None else max_mean_cycle(graph)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    # work with beta (f - m_f): the Perron root is then the pressure defect
    rel_w = beta * (graph.weight - m_f)
    rev_rel_w = beta * (rev.weight - m_f)

    if backend == "dense":
        w_out = calibrated_subaction(rev, m_f)
        log_h, excess = _dense_side(graph, rel_w, beta * mp.V, tol)
        log_nu, _ = _dense_side(rev, rev_rel_w, beta * w_out, tol)
        iterations = 2
    else:
        log_h, excess, it_h, ok_h = kernels.log_power_iteration(
            graph.n, graph.src, graph.dst, rel_w, np.zeros(graph.n), tol, max_iter)
        log_nu, _, it_nu, ok_nu = kernels.log_power_iteration(
            rev.n, rev.src, rev.dst, rev_rel_w, np.zeros(graph.n), tol, max_iter)
        if not (ok_h and ok_nu):
            raise NoConvergence(f"power iteration stalled after {max_iter} steps at beta={beta}")
        iterations = max(it_h, it_nu)

    log_nu = log_nu - logsumexp(log_nu)
    log_h = log_h - logsumexp(log_nu + log_h)
    residual = max(_eigen_residual(graph, rel_w, excess, log_h),
                   _eigen_residual(rev, rev_rel_w, excess, log_nu))
    if not residual <= tol:
        raise NoConvergence(f"{backend} backend residual {residual:.3e} exceeds tol {tol:.1e} at beta={beta}")
    return RpfSolution(float(beta), float(beta * m_f + excess), log_h, np.exp(log_nu), log_nu,
                       residual, int(iterations), backend, graph, float(m_f), float(excess))


def gurevich_pressure_periodic(shift: MarkovShift, potential: Potential, beta: float,
                               base_symbol: int, n_max: int,
                               graph: ContextGraph | None = None) -> list[tuple[int, float]]:
    """(n, (1/n) log Z_n) for n = 1..n_max, Z_n the weighted sum over
    periodic points of period n in [base_symbol].

    Periodic points of period n through [a] are the closed n-step walks of
    the context graph from contexts starting with a.
    """
    _require_mixing(shift)
    graph = graph or build_context_graph(shift, potential)
    logw = beta * graph.weight
    starts = [i for i, c in enumerate(graph.contexts) if c[0] == base_symbol]
    if not starts:
        raise ValueError(f"symbol {base_symbol} is not admissible")
    per_start = np.full((len(starts), n_max), -np.inf)
    for j, c in enumerate(starts):
        x = np.full(graph.n, -np.inf)
        x[c] = 0.0
        for step in range(n_max):
            x = kernels.logsumexp_in(graph.n, graph.src, graph.dst, logw, x)
            per_start[j, step] = x[c]
    log_z = logsumexp(per_start, axis=0)
    return [(n, float(log_z[n - 1]) / n) for n in range(1, n_max + 1)]


def gibbs_chain(rpf: RpfSolution, graph: ContextGraph | None = None) -> GibbsChain:
    """Stochasticize the weighted adjacency by nu and lambda.

    P(c -> d) = exp(beta f) nu(d) / (lambda nu(c)), pi = h nu; then
    mu[w] = pi(c_0) * prod P along the context path of w.
    """
    graph = graph or rpf.graph
    if graph is None:
        raise ValueError("gibbs_chain needs the context graph")
    log_nu = rpf.log_nu
    if math.isfinite(rpf.pressure_defect):
        step = rpf.beta * (graph.weight - rpf.m_f) - rpf.pressure_defect
    else:
        step = rpf.beta * graph.weight - rpf.log_lambda
    log_P = step + log_nu[graph.dst] - log_nu[graph.src]
    row = kernels.logsumexp_in(graph.n, graph.dst, graph.src, log_P, np.zeros(graph.n))
    log_P = log_P - row[graph.src]
    log_pi = rpf.log_h + log_nu
    log_pi = log_pi - logsumexp(log_pi)
    return GibbsChain(graph, rpf, log_pi, log_P)


def cylinder_log_measure(chain: GibbsChain, word: Sequence[int]) -> float:
    """log mu_beta[word]; -inf for an empty (inadmissible) cylinder."""
    graph = chain.graph
    if not graph.shift.is_admissible(word):
        return -math.inf
    m = graph.context_len
    if len(word) < m:
        idx = graph.contexts_with_prefix(word)
        return float(logsumexp(chain.log_pi[idx])) if idx else -math.inf
    path = graph.edge_path(word)
    return float(chain.log_pi[graph.context_of(word)] + math.fsum(chain.log_P[path]))


def edge_frequencies(chain: GibbsChain) -> np.ndarray:
    return np.exp(chain.log_pi[chain.graph.src] + chain.log_P)


def equilibrium_diagnostics(rpf: RpfSolution, chain: GibbsChain) -> dict:
    """Integral of f against mu_beta, its entropy and the defect of the
    variational identity h(mu_beta) = P(beta f) - beta mu_beta(f).

    The entropy is the Markov-chain entropy -sum pi P log P, which avoids
    the cancellation in P(beta f) - beta mu_beta(f) at large beta.
    """
    freq = edge_frequencies(chain)
    integral_f = math.fsum(freq * chain.graph.weight)
    live = freq > 0
    entropy = -math.fsum(freq[live] * chain.log_P[live])
    identity = rpf.log_lambda - rpf.beta * integral_f
    return {"integral_f": integral_f, "entropy": entropy,
            "variational_defect": abs(identity - entropy)}


def gibbs_sandwich_gap(rpf: RpfSolution, chain: GibbsChain, words: Iterable[Sequence[int]]) -> float:
    """max_w |(1/beta)(log mu[w] - beta S_n f(x) + n P(beta f))|, n = |w|,
    x the lexicographically minimal point of [w]."""
    graph = chain.graph
    k = graph.potential.range
    gap = 0.0
    for w in words:
        n = len(w)
        x = graph.shift.min_extension(w, n + k - 1)
        s = birkhoff_sum(graph.potential, x, n)
        val = (cylinder_log_measure(chain, w) - rpf.beta * s + n * rpf.log_lambda) / rpf.beta
        gap = max(gap, abs(val))
    return gap


def g_beta_edge(rpf: RpfSolution, edge: int, graph: ContextGraph | None = None) -> float:
    """g_beta = beta f + log h - log h o sigma - P(beta f) on one edge."""
    graph = graph or rpf.graph
    s, d = graph.src[edge], graph.dst[edge]
    return float(rpf.beta * graph.weight[edge] + rpf.log_h[s] - rpf.log_h[d] - rpf.log_lambda)


def integral_identity_defect(rpf: RpfSolution, chain: GibbsChain, word: Sequence[int]) -> float:
    """|log mu[x_1..x_n] - log integral over [x_0..x_n] of exp(-g_beta) dmu|.

    The integrand is constant on cylinders of length context_len + 1, so the
    integral is a finite sum over admissible refinements of ``word``.
    """
    if len(word) < 2:
        raise WordTooShort("the identity needs a word of length >= 2")
    graph = chain.graph
    lhs = cylinder_log_measure(chain, word[1:])
    need = graph.context_len + 1
    if len(word) >= need:
        refinements = [tuple(word)]
    else:
        refinements = [tuple(word) + tail for tail in _tails(graph.shift, word[-1], need - len(word))]
    terms = []
    for ref in refinements:
        e = graph.edge_path(ref[:need])[0]
        terms.append(-g_beta_edge(rpf, e, graph) + cylinder_log_measure(chain, ref))
    rhs = float(logsumexp(terms)) if terms else -math.inf
    if lhs == rhs:
        return 0.0
    return abs(lhs - rhs)


def _tails(shift: MarkovShift, last: int, length: int) -> list[tuple[int, ...]]:
    out = [()]
    for _ in range(length):
        out = [t + (b,) for t in out for b in shift.successors(t[-1] if t else last)]
    return out


def v_beta_variation(rpf: RpfSolution, j: int, graph: ContextGraph | None = None) -> float:
    """Var_j of (1/beta) log h_beta over contexts sharing their first j symbols."""
    graph = graph or rpf.graph
    groups: dict[tuple[int, ...], list[float]] = {}
    for c, v in zip(graph.contexts, rpf.v_beta):
        groups.setdefault(c[:j], []).append(float(v))
    return max(max(vs) - min(vs) for vs in groups.values())
