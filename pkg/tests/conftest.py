"""Shared fixtures and random-instance generators."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from zerotemp.instances import bernoulli2, golden3
from zerotemp.potential import make_potential
from zerotemp.shift import build_shift, enumerate_words
from zerotemp.sweep import Instance


def random_mixing_table(rng: np.random.Generator, n: int, density: float = 0.5) -> np.ndarray:
    """Random table made irreducible by a Hamiltonian cycle and aperiodic
    by a loop at 0."""
    table = rng.random((n, n)) < density
    for a in range(n):
        table[a, (a + 1) % n] = True
    table[0, 0] = True
    return table


def random_instance(seed: int, max_symbols: int = 8, max_range: int = 2,
                    low: float = -5.0, high: float = 0.0) -> Instance:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_symbols + 1))
    shift = build_shift(random_mixing_table(rng, n))
    k = int(rng.integers(1, max_range + 1))
    values = {w: float(rng.uniform(low, high)) for w in enumerate_words(shift, k)}
    return Instance(shift, make_potential(shift, k, values), f"random{seed}")


@st.composite
def instances(draw, max_symbols: int = 5, max_range: int = 2):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_instance(seed, max_symbols, max_range)


@pytest.fixture(scope="session")
def bern():
    return Instance(*bernoulli2(), name="bernoulli2")


@pytest.fixture(scope="session")
def gold():
    return Instance(*golden3(), name="golden3")


# acceptance criterion number -> (title, passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {title}: {detail}")
