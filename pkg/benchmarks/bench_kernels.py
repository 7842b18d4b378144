"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 64 256 1024] [--repeat 5]

Graphs are random with a fixed seed and ``degree`` out-edges per node, the
shape of a context graph on a shift with ``degree`` successors per symbol.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from zerotemp import _kernels_py as py

try:
    from zerotemp import _kernels as cy
except ImportError:  # extension not built
    cy = None


def random_graph(n: int, degree: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    src = np.repeat(np.arange(n, dtype=np.int64), degree)
    dst = rng.integers(0, n, size=n * degree).astype(np.int64)
    dst[::degree] = (np.arange(n) + 1) % n  # keep it strongly connected
    w = rng.uniform(-5.0, 0.0, n * degree)
    return n, src, dst, w


def cases(n, src, dst, w):
    x = np.linspace(-1.0, 0.0, n)
    yield "logsumexp_in", lambda m: m.logsumexp_in(n, src, dst, 4.0 * w, x)
    yield "maxplus_apply", lambda m: m.maxplus_apply(n, src, dst, w, x)
    yield "log_power_iteration", lambda m: m.log_power_iteration(n, src, dst, w, x, 1e-12, 200)
    if n <= 256:
        yield "karp", lambda m: m.karp(n, src, dst, w)
        yield "maxplus_closure", lambda m: m.maxplus_closure(n, src, dst, w - 1.0)


def best_of(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 10_000:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024])
    ap.add_argument("--degree", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':<22}{'n':>6}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for n in args.sizes:
        graph = random_graph(n, args.degree)
        for name, call in cases(*graph):
            t_py = best_of(lambda: call(py), args.repeat) * 1e3
            if cy is None:
                print(f"{name:<22}{n:>6}{t_py:>14.3f}{'-':>14}{'-':>10}")
                continue
            t_cy = best_of(lambda: call(cy), args.repeat) * 1e3
            print(f"{name:<22}{n:>6}{t_py:>14.3f}{t_cy:>14.3f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
