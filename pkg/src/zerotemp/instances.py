"""The shipped instances used by the docs, the tests and the acceptance run."""
from __future__ import annotations

import numpy as np

from .potential import Potential, linear_symbol_penalty, make_potential, truncate
from .shift import MarkovShift, build_shift, full_shift

# Range-2 table on the 3-symbol shift without the loop at 2.  The 2-cycle
# 0<->1 is the unique maximizing orbit (mean 0); every other simple cycle
# has a strictly negative mean.
GOLDEN3_VALUES = {
    (0, 0): -1.0, (0, 1): 0.0, (0, 2): -2.0,
    (1, 0): 0.0, (1, 1): -1.5, (1, 2): -1.0,
    (2, 0): -0.5, (2, 1): -3.0,
}


def bernoulli2() -> tuple[MarkovShift, Potential]:
    """Full 2-shift, f|[0] = 0, f|[1] = -1."""
    shift = full_shift(2)
    return shift, make_potential(shift, 1, {(0,): 0.0, (1,): -1.0})


def golden3() -> tuple[MarkovShift, Potential]:
    table = np.ones((3, 3), dtype=bool)
    table[2, 2] = False
    shift = build_shift(table)
    return shift, make_potential(shift, 2, GOLDEN3_VALUES)


def flat2(value: float = 0.0) -> tuple[MarkovShift, Potential]:
    """Full 2-shift with a constant potential: every measure maximizes."""
    shift = full_shift(2)
    return shift, make_potential(shift, 1, {(0,): value, (1,): value})


def period2() -> MarkovShift:
    return build_shift([[False, True], [True, False]])


def countable_linear(n: int, slope: float = 1.0) -> tuple[MarkovShift, Potential]:
    """Truncation at n of the countable full shift with f(x) = -slope*x_0."""
    return truncate(linear_symbol_penalty(slope), n)


SHIPPED = {"bernoulli2": bernoulli2, "golden3": golden3}
