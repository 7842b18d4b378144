"""Context graph: the finite reduction of (Sigma_A, sigma, f) for a
locally constant f of range k.

Nodes are admissible words of length ``max(k-1, 1)``.  A point x sits in the
context ``x[:m]``; the step x -> sigma(x) is the edge ``x[:m] -> x[1:m+1]``
carrying the weight f(x[:k]).  Both h_beta and the sub-actions are functions
of the context, and r = R_+ is a function of the edge.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .potential import InadmissibleWord, Potential, WordTooShort
from .shift import MarkovShift, enumerate_words, format_word


@dataclass(frozen=True, eq=False)
class ContextGraph:
    shift: MarkovShift
    potential: Potential
    contexts: tuple[tuple[int, ...], ...]
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    words: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.contexts)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def context_len(self) -> int:
        return len(self.contexts[0])

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {c: i for i, c in enumerate(self.contexts)}

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(int(s), int(d)): e for e, (s, d) in enumerate(zip(self.src, self.dst))}

    @cached_property
    def out_edges(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for e, s in enumerate(self.src):
            out[s].append(e)
        return out

    @cached_property
    def in_edges(self) -> list[list[int]]:
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for e, d in enumerate(self.dst):
            inc[d].append(e)
        return inc

    def successors(self, c: int) -> list[int]:
        return [int(self.dst[e]) for e in self.out_edges[c]]

    def label(self, c: int) -> str:
        return format_word(self.contexts[c])

    def reversed(self) -> "ContextGraph":
        """Same nodes, every edge flipped (weights kept)."""
        order = np.lexsort((self.src, self.dst))
        return ContextGraph(self.shift, self.potential, self.contexts,
                            self.dst[order].copy(), self.src[order].copy(),
                            self.weight[order].copy(),
                            tuple(self.words[e] for e in order))

    def context_of(self, word: Sequence[int]) -> int:
        m = self.context_len
        if len(word) < m:
            raise WordTooShort(f"need {m} symbols to fix a context")
        try:
            return self.index[tuple(word[:m])]
        except KeyError:
            raise InadmissibleWord(format_word(word[:m])) from None

    def contexts_with_prefix(self, word: Sequence[int]) -> list[int]:
        w = tuple(word)
        return [i for i, c in enumerate(self.contexts) if c[: len(w)] == w]

    def edge_path(self, word: Sequence[int]) -> list[int]:
        """Edges traversed by a point of [word] over its first len-m steps."""
        if not self.shift.is_admissible(word):
            raise InadmissibleWord(format_word(word))
        m = self.context_len
        if len(word) < m:
            raise WordTooShort(f"need {m} symbols to fix a context")
        nodes = [self.index[tuple(word[i:i + m])] for i in range(len(word) - m + 1)]
        return [self.edge_index[(a, b)] for a, b in zip(nodes, nodes[1:])]


def build_context_graph(shift: MarkovShift, potential: Potential) -> ContextGraph:
    if potential.shift is not shift and not np.array_equal(potential.shift.adjacency, shift.adjacency):
        raise ValueError("potential belongs to a different shift")
    k = potential.range
    m = max(k - 1, 1)
    contexts = tuple(enumerate_words(shift, m))
    index = {c: i for i, c in enumerate(contexts)}
    src, dst, weight, words = [], [], [], []
    for i, c in enumerate(contexts):
        for s in shift.successors(c[-1]):
            word = c + (s,)
            src.append(i)
            dst.append(index[word[-m:]])
            weight.append(potential.values[word[:k]])
            words.append(word)
    return ContextGraph(shift, potential, contexts,
                        np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                        np.array(weight, dtype=np.float64), tuple(words))
