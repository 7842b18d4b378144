"""Pure-Python/numpy fallback for the hot kernels.

Every function here has a twin of the same name and signature in
``_kernels.pyx``.  Graphs are passed as parallel edge arrays ``src``, ``dst``
(int64) and ``w`` (float64) over ``n`` nodes.
"""
import math

import numpy as np

NEG_INF = -math.inf


def logsumexp_in(n, src, dst, w, x):
    """out[d] = log sum_{e: dst[e]=d} exp(w[e] + x[src[e]])."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    terms = np.asarray(w, dtype=np.float64) + np.asarray(x, dtype=np.float64)[src]
    top = np.full(n, NEG_INF)
    np.maximum.at(top, dst, terms)
    safe = np.where(np.isfinite(top), top, 0.0)
    acc = np.zeros(n)
    with np.errstate(invalid="ignore"):
        np.add.at(acc, dst, np.exp(terms - safe[dst]))
    with np.errstate(divide="ignore"):
        out = safe + np.log(acc)
    out[~np.isfinite(top)] = NEG_INF
    return out


def maxplus_apply(n, src, dst, w, x):
    """out[d] = max_{e: dst[e]=d} (w[e] + x[src[e]])."""
    terms = np.asarray(w, dtype=np.float64) + np.asarray(x, dtype=np.float64)[src]
    out = np.full(n, NEG_INF)
    np.maximum.at(out, np.asarray(dst, dtype=np.int64), terms)
    return out


def log_power_iteration(n, src, dst, w, x0, tol, max_iter):
    """Normalized log-domain power iteration of ``logsumexp_in``.

    Returns ``(x, log_lambda, iterations, converged)`` with ``max(x) == 0``.
    Convergence: the spread of ``x_new - x_old`` drops to ``tol``.
    """
    x = np.array(x0, dtype=np.float64)
    x -= x.max()
    log_lam = NEG_INF
    for it in range(1, max_iter + 1):
        y = logsumexp_in(n, src, dst, w, x)
        diff = y - x
        log_lam = float(y.max())
        spread = float(diff.max() - diff.min())
        x = y - log_lam
        if spread <= tol:
            return x, float(diff.max()), it, True
    return x, log_lam, max_iter, False


def karp(n, src, dst, w):
    """Maximum cycle mean by Karp's recurrence.

    Walks start anywhere (virtual source).  Returns ``(m, node)`` where
    ``node`` is the smallest node attaining the outer maximum.
    """
    table = np.full((n + 1, n), NEG_INF)
    table[0, :] = 0.0
    for k in range(1, n + 1):
        table[k] = maxplus_apply(n, src, dst, w, table[k - 1])
    best = NEG_INF
    best_node = -1
    for v in range(n):
        dn = table[n, v]
        if dn == NEG_INF:
            continue
        worst = math.inf
        for k in range(n):
            dk = table[k, v]
            if dk == NEG_INF:
                continue
            val = (dn - dk) / (n - k)
            if val < worst:
                worst = val
        if worst > best:
            best = worst
            best_node = v
    return best, best_node


def maxplus_closure(n, src, dst, w):
    """All-pairs maximum path weight over paths with at least one edge.

    Floyd-Warshall in the (max, +) semiring; unreachable pairs are -inf.
    """
    phi = np.full((n, n), NEG_INF)
    for s, d, x in zip(src, dst, w):
        if x > phi[s, d]:
            phi[s, d] = x
    for k in range(n):
        col = phi[:, k][:, None]
        row = phi[k, :][None, :]
        np.maximum(phi, col + row, out=phi)
    return phi
