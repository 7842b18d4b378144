# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Same names and signatures as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()


cdef void _logsumexp_in(Py_ssize_t n, const cnp.int64_t[:] src,
                        const cnp.int64_t[:] dst, const double[:] w,
                        const double[:] x, double[:] top, double[:] acc,
                        double[:] out) noexcept nogil:
    cdef Py_ssize_t e, d, m = src.shape[0]
    cdef double t
    for d in range(n):
        top[d] = -INFINITY
        acc[d] = 0.0
    for e in range(m):
        t = w[e] + x[src[e]]
        if t > top[dst[e]]:
            top[dst[e]] = t
    for e in range(m):
        d = dst[e]
        if top[d] != -INFINITY:
            acc[d] += exp(w[e] + x[src[e]] - top[d])
    for d in range(n):
        if top[d] == -INFINITY:
            out[d] = -INFINITY
        else:
            out[d] = top[d] + log(acc[d])


def logsumexp_in(Py_ssize_t n, src, dst, w, x):
    cdef cnp.int64_t[:] s = np.ascontiguousarray(src, dtype=np.int64)
    cdef cnp.int64_t[:] t = np.ascontiguousarray(dst, dtype=np.int64)
    cdef double[:] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:] xx = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(n)
    cdef double[:] o = out
    cdef double[:] top = np.empty(n)
    cdef double[:] acc = np.empty(n)
    _logsumexp_in(n, s, t, ww, xx, top, acc, o)
    return out


def maxplus_apply(Py_ssize_t n, src, dst, w, x):
    cdef cnp.int64_t[:] s = np.ascontiguousarray(src, dtype=np.int64)
    cdef cnp.int64_t[:] t = np.ascontiguousarray(dst, dtype=np.int64)
    cdef double[:] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:] xx = np.ascontiguousarray(x, dtype=np.float64)
    out = np.full(n, -np.inf)
    cdef double[:] o = out
    cdef Py_ssize_t e
    cdef double v
    with nogil:
        for e in range(s.shape[0]):
            v = ww[e] + xx[s[e]]
            if v > o[t[e]]:
                o[t[e]] = v
    return out


def log_power_iteration(Py_ssize_t n, src, dst, w, x0, double tol,
                        Py_ssize_t max_iter):
    cdef cnp.int64_t[:] s = np.ascontiguousarray(src, dtype=np.int64)
    cdef cnp.int64_t[:] t = np.ascontiguousarray(dst, dtype=np.int64)
    cdef double[:] ww = np.ascontiguousarray(w, dtype=np.float64)
    x_arr = np.array(x0, dtype=np.float64)
    x_arr -= x_arr.max()
    y_arr = np.empty(n)
    cdef double[:] x = x_arr
    cdef double[:] y = y_arr
    cdef double[:] top = np.empty(n)
    cdef double[:] acc = np.empty(n)
    cdef Py_ssize_t it, d
    cdef double dmax, dmin, diff, ymax
    cdef bint converged = False
    with nogil:
        for it in range(1, max_iter + 1):
            _logsumexp_in(n, s, t, ww, x, top, acc, y)
            dmax = -INFINITY
            dmin = INFINITY
            ymax = -INFINITY
            for d in range(n):
                diff = y[d] - x[d]
                if diff > dmax:
                    dmax = diff
                if diff < dmin:
                    dmin = diff
                if y[d] > ymax:
                    ymax = y[d]
            for d in range(n):
                x[d] = y[d] - ymax
            if dmax - dmin <= tol:
                converged = True
                break
    if converged:
        return x_arr, dmax, it, True
    return x_arr, ymax, max_iter, False


def karp(Py_ssize_t n, src, dst, w):
    cdef cnp.int64_t[:] s = np.ascontiguousarray(src, dtype=np.int64)
    cdef cnp.int64_t[:] t = np.ascontiguousarray(dst, dtype=np.int64)
    cdef double[:] ww = np.ascontiguousarray(w, dtype=np.float64)
    table_arr = np.full((n + 1, n), -np.inf)
    cdef double[:, :] table = table_arr
    cdef Py_ssize_t k, e, v
    cdef double val, worst, best = -INFINITY, dn, dk
    cdef Py_ssize_t best_node = -1
    with nogil:
        for v in range(n):
            table[0, v] = 0.0
        for k in range(1, n + 1):
            for e in range(s.shape[0]):
                val = ww[e] + table[k - 1, s[e]]
                if val > table[k, t[e]]:
                    table[k, t[e]] = val
        for v in range(n):
            dn = table[n, v]
            if dn == -INFINITY:
                continue
            worst = INFINITY
            for k in range(n):
                dk = table[k, v]
                if dk == -INFINITY:
                    continue
                val = (dn - dk) / (n - k)
                if val < worst:
                    worst = val
            if worst > best:
                best = worst
                best_node = v
    return best, best_node


def maxplus_closure(Py_ssize_t n, src, dst, w):
    cdef cnp.int64_t[:] s = np.ascontiguousarray(src, dtype=np.int64)
    cdef cnp.int64_t[:] t = np.ascontiguousarray(dst, dtype=np.int64)
    cdef double[:] ww = np.ascontiguousarray(w, dtype=np.float64)
    phi_arr = np.full((n, n), -np.inf)
    cdef double[:, :] phi = phi_arr
    cdef Py_ssize_t e, i, j, k
    cdef double pik, v
    with nogil:
        for e in range(s.shape[0]):
            if ww[e] > phi[s[e], t[e]]:
                phi[s[e], t[e]] = ww[e]
        for k in range(n):
            for i in range(n):
                pik = phi[i, k]
                if pik == -INFINITY:
                    continue
                for j in range(n):
                    v = pik + phi[k, j]
                    if v > phi[i, j]:
                        phi[i, j] = v
    return phi_arr
