"""Finite (truncated) Markov shifts: adjacency, words, cycles, mixing."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


class ShiftError(ValueError):
    pass


class NonSquare(ShiftError):
    pass


class EmptyRowOrColumn(ShiftError):
    def __init__(self, symbol: int):
        super().__init__(f"symbol {symbol} has no outgoing or no incoming edge")
        self.symbol = symbol


@dataclass(frozen=True, eq=False)
class MarkovShift:
    """Sigma_A over the symbols ``0..N-1``; build with :func:`build_shift`."""

    adjacency: np.ndarray
    metric_base: float = 0.5

    @property
    def alphabet_size(self) -> int:
        return self.adjacency.shape[0]

    def allows(self, a: int, b: int) -> bool:
        return bool(self.adjacency[a, b])

    def successors(self, a: int) -> list[int]:
        return [int(b) for b in np.flatnonzero(self.adjacency[a])]

    def predecessors(self, b: int) -> list[int]:
        return [int(a) for a in np.flatnonzero(self.adjacency[:, b])]

    def is_admissible(self, word: Sequence[int]) -> bool:
        n = self.alphabet_size
        if any(not (0 <= s < n) for s in word):
            return False
        return all(self.adjacency[a, b] for a, b in zip(word, word[1:]))

    def word(self, symbols: Sequence[int]) -> "Word":
        return Word(tuple(int(s) for s in symbols), self.is_admissible(symbols))

    def distance(self, x: Sequence[int], y: Sequence[int]) -> float:
        """r**t(x, y), t the first disagreement; 0 for equal sequences."""
        for t, (a, b) in enumerate(zip(x, y)):
            if a != b:
                return self.metric_base**t
        return 0.0 if len(x) == len(y) else self.metric_base ** min(len(x), len(y))

    def min_extension(self, word: Sequence[int], length: int) -> tuple[int, ...]:
        """Lexicographically smallest admissible continuation to ``length``."""
        out = list(word) or [0]
        while len(out) < length:
            out.append(self.successors(out[-1])[0])
        return tuple(out)

    @cached_property
    def _scc_labels(self) -> tuple[int, np.ndarray]:
        return connected_components(csr_matrix(self.adjacency), directed=True, connection="strong")


@dataclass(frozen=True)
class Word:
    """A finite word; ``admissible`` records whether its cylinder is nonempty."""

    symbols: tuple[int, ...]
    admissible: bool = field(default=True)

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return format_word(self.symbols)


@dataclass(frozen=True)
class PrimitivityWitness:
    K0: int
    F: frozenset[int]


def build_shift(adjacency, metric_base: float = 0.5) -> MarkovShift:
    table = np.array(adjacency, dtype=bool)
    if table.ndim != 2 or table.shape[0] != table.shape[1]:
        raise NonSquare(f"adjacency must be square, got shape {table.shape}")
    if not table.any():
        raise ShiftError("adjacency has no admissible transition")
    if not 0.0 < metric_base < 1.0:
        raise ShiftError(f"metric_base must lie in (0, 1), got {metric_base}")
    for s in range(table.shape[0]):
        if not table[s].any() or not table[:, s].any():
            raise EmptyRowOrColumn(s)
    table.setflags(write=False)
    return MarkovShift(table, float(metric_base))


def full_shift(n: int, metric_base: float = 0.5) -> MarkovShift:
    return build_shift(np.ones((n, n), dtype=bool), metric_base)


def is_irreducible(shift: MarkovShift) -> bool:
    ncomp, _ = shift._scc_labels
    return ncomp == 1


def period(shift: MarkovShift) -> int:
    """gcd of cycle lengths, via BFS levels (per strong component).

    For a reducible shift this is the gcd over all components.
    """
    n = shift.alphabet_size
    _, labels = shift._scc_labels
    g = 0
    level = [-1] * n
    for root in range(n):
        if level[root] >= 0:
            continue
        level[root] = 0
        queue = [root]
        for a in queue:
            for b in shift.successors(a):
                if labels[b] != labels[a]:
                    continue
                if level[b] < 0:
                    level[b] = level[a] + 1
                    queue.append(b)
                else:
                    g = math.gcd(g, abs(level[a] + 1 - level[b]))
    return g if g > 0 else 1


def is_topologically_mixing(shift: MarkovShift) -> bool:
    return is_irreducible(shift) and period(shift) == 1


def primitivity_witness(shift: MarkovShift) -> PrimitivityWitness | None:
    """Smallest K0 <= N**2 with A**(K0+1) > 0, i.e. every pair connects
    through exactly K0 intermediate symbols; F is the whole alphabet."""
    if not is_topologically_mixing(shift):
        return None
    n = shift.alphabet_size
    a = shift.adjacency.astype(np.int64)
    reach = a.copy()
    for k0 in range(n * n + 1):
        if reach.all():
            return PrimitivityWitness(k0, frozenset(range(n)))
        reach = ((reach @ a) > 0).astype(np.int64)
    return None


def enumerate_words(shift: MarkovShift, length: int) -> Iterator[tuple[int, ...]]:
    """Admissible words of ``length`` in lexicographic order."""
    if length < 1:
        raise ValueError("length must be >= 1")
    stack: list[tuple[int, ...]] = [(s,) for s in reversed(range(shift.alphabet_size))]
    while stack:
        w = stack.pop()
        if len(w) == length:
            yield w
            continue
        for b in reversed(shift.successors(w[-1])):
            stack.append(w + (b,))


def simple_cycles(n: int, successors, max_len: int) -> list[tuple[int, ...]]:
    """Simple cycles of length <= max_len, each rotated to start at its
    smallest node, sorted lexicographically."""
    found = []
    for start in range(n):
        path = [start]
        on_path = {start}

        def extend(node):
            for nxt in successors(node):
                if nxt == start:
                    found.append(tuple(path))
                elif nxt > start and nxt not in on_path and len(path) < max_len:
                    path.append(nxt)
                    on_path.add(nxt)
                    extend(nxt)
                    path.pop()
                    on_path.discard(nxt)

        extend(start)
    return sorted(found)


def enumerate_cycles(shift: MarkovShift, max_len: int) -> Iterator[tuple[int, ...]]:
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    yield from simple_cycles(shift.alphabet_size, shift.successors, max_len)


def format_word(symbols: Sequence[int]) -> str:
    if all(s < 10 for s in symbols):
        return "".join(str(s) for s in symbols)
    return ",".join(str(s) for s in symbols)


def parse_word(text: str) -> tuple[int, ...]:
    """'0110' -> (0, 1, 1, 0); comma-separated form for symbols >= 10."""
    text = text.strip()
    if not text:
        return ()
    if "," in text:
        return tuple(int(t) for t in text.split(","))
    return tuple(int(c) for c in text)


def load_model(path: str | Path) -> MarkovShift:
    """Read a model file: ``{"alphabet_size", "edges" | "full", "metric_base"}``."""
    data = json.loads(Path(path).read_text())
    return model_from_dict(data)


def model_from_dict(data: dict) -> MarkovShift:
    n = int(data["alphabet_size"])
    if data.get("full"):
        table = np.ones((n, n), dtype=bool)
    else:
        table = np.zeros((n, n), dtype=bool)
        for a, b in data.get("edges", []):
            table[a, b] = True
    return build_shift(table, data.get("metric_base", 0.5))


def model_to_dict(shift: MarkovShift) -> dict:
    edges = [[int(a), int(b)] for a, b in zip(*np.nonzero(shift.adjacency))]
    return {"alphabet_size": shift.alphabet_size, "edges": edges, "metric_base": shift.metric_base}
