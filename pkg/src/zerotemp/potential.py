"""Locally constant potentials, Birkhoff sums, variation moduli and the
coercive-tail machinery that picks a truncation level for countable models.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .shift import MarkovShift, build_shift, enumerate_words, format_word, parse_word


class PotentialError(ValueError):
    pass


class WordTooShort(PotentialError):
    pass


class InadmissibleWord(PotentialError):
    pass


class EnvelopeNotSummable(PotentialError):
    pass


@dataclass(frozen=True, eq=False)
class Potential:
    """f depending on the first ``range`` symbols; ``values`` is keyed by
    admissible words of that length."""

    range: int
    values: Mapping[tuple[int, ...], float]
    shift: MarkovShift

    @property
    def max_abs(self) -> float:
        return max(abs(v) for v in self.values.values())

    def __call__(self, word: Sequence[int]) -> float:
        return evaluate(self, word)


def make_potential(shift: MarkovShift, range: int, values: Mapping) -> Potential:
    if range < 1:
        raise PotentialError("range must be >= 1")
    table: dict[tuple[int, ...], float] = {}
    for key, v in values.items():
        word = parse_word(key) if isinstance(key, str) else tuple(int(s) for s in key)
        if len(word) != range:
            raise PotentialError(f"key {key!r} does not have length {range}")
        table[word] = float(v)
    for w in enumerate_words(shift, range):
        if w not in table:
            raise PotentialError(f"missing value for admissible word {format_word(w)}")
        if not math.isfinite(table[w]):
            raise PotentialError(f"non-finite value at {format_word(w)}")
    extra = [w for w in table if not shift.is_admissible(w)]
    if extra:
        raise PotentialError(f"value given for inadmissible word {format_word(extra[0])}")
    return Potential(range, table, shift)


def potential_from_function(shift: MarkovShift, range: int, fn: Callable) -> Potential:
    return make_potential(shift, range, {w: fn(w) for w in enumerate_words(shift, range)})


def discretize(shift: MarkovShift, range: int, fn: Callable, depth: int = 32) -> Potential:
    """Range-``range`` approximation of a general (Walters) potential.

    ``fn`` takes a finite prefix of length ``depth`` standing for a point; each
    cylinder [w] is represented by its lexicographically minimal admissible
    extension.  Errors downstream are bounded by Var_range(fn), which the
    caller must supply separately.
    """
    return potential_from_function(shift, range, lambda w: fn(shift.min_extension(w, depth)))


def evaluate(potential: Potential, word: Sequence[int]) -> float:
    k = potential.range
    if len(word) < k:
        raise WordTooShort(f"need at least {k} symbols, got {len(word)}")
    if not potential.shift.is_admissible(word):
        raise InadmissibleWord(format_word(word))
    return potential.values[tuple(word[:k])]


def birkhoff_sum(potential: Potential, word: Sequence[int], n: int | None = None) -> float:
    """S_n f along ``word``; by default n = len(word) - range + 1."""
    k = potential.range
    if n is None:
        n = len(word) - k + 1
        if n < 0:
            raise WordTooShort(f"word of length {len(word)} is too short for range {k}")
    elif n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0
    if len(word) < n + k - 1:
        raise WordTooShort(f"S_{n} f needs {n + k - 1} symbols, got {len(word)}")
    if not potential.shift.is_admissible(word):
        raise InadmissibleWord(format_word(word))
    vals = potential.values
    return math.fsum(vals[tuple(word[i:i + k])] for i in range(n))


def birkhoff_sum_periodic(potential: Potential, cycle: Sequence[int]) -> float:
    """S_p f at the periodic point cycle^infinity, p = len(cycle)."""
    p = len(cycle)
    if p == 0:
        raise WordTooShort("empty cycle")
    k = potential.range
    unrolled = tuple(cycle) * (1 + (k + p - 1) // p)
    if not potential.shift.is_admissible(unrolled[: p + 1]):
        raise InadmissibleWord(format_word(cycle))
    return birkhoff_sum(potential, unrolled[: p + k - 1], n=p)


def variation(potential: Potential, m: int) -> float:
    """Var_m f = sup{|f(x) - f(y)| : x, y agree on m symbols}, by enumeration."""
    k = potential.range
    if m >= k:
        return 0.0
    spread: dict[tuple[int, ...], list[float]] = {}
    for w, v in potential.values.items():
        lo_hi = spread.setdefault(w[:m], [v, v])
        lo_hi[0] = min(lo_hi[0], v)
        lo_hi[1] = max(lo_hi[1], v)
    return max(hi - lo for lo, hi in spread.values())


def walters_modulus(potential: Potential, j: int) -> float:
    """M_j = sup_{n>=1} Var_{n+j} S_n f.

    For range k only the last k-1-j terms of S_n f can see past the shared
    prefix, and those terms depend only on the final k-1 prefix symbols, so
    the supremum is reached for some n <= k-1-j and is a finite maximum over
    admissible words of length n+k-1 grouped by their first n+j symbols.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    k = potential.range
    if j >= k - 1:
        return 0.0
    best = 0.0
    for n in range(1, k - j):
        groups: dict[tuple[int, ...], list[float]] = {}
        for w in enumerate_words(potential.shift, n + k - 1):
            s = birkhoff_sum(potential, w, n)
            lo_hi = groups.setdefault(w[: n + j], [s, s])
            lo_hi[0] = min(lo_hi[0], s)
            lo_hi[1] = max(lo_hi[1], s)
        best = max(best, max(hi - lo for lo, hi in groups.values()))
    return best


@dataclass(frozen=True)
class TailEnvelope:
    """Upper envelope e_i >= sup f|[i] with a tail certificate
    T(N) >= sum_{i>=N} exp(e_i); T is nonincreasing on ``0..domain``."""

    sup_bound: Callable[[int], float]
    tail: Callable[[int], float]
    domain: int
    params: dict = field(default_factory=dict)


def geometric_envelope(rate: float, offset: float = 0.0, domain: int = 10**6) -> TailEnvelope:
    """e_i = offset - rate*i, T(N) = exp(offset - rate*N) / (1 - exp(-rate))."""

    def tail(n: int) -> float:
        if rate <= 0:
            return math.inf
        return math.exp(offset - rate * n) / -math.expm1(-rate)

    return TailEnvelope(lambda i: offset - rate * i, tail, domain,
                        {"envelope": "geometric", "rate": rate, "offset": offset})


def constant_envelope(value: float = 0.0, domain: int = 10**6) -> TailEnvelope:
    return TailEnvelope(lambda i: value, lambda n: math.inf, domain,
                        {"envelope": "constant", "value": value})


def explicit_envelope(values: Sequence[float], tail_after: float = 0.0) -> TailEnvelope:
    """Envelope from a finite list; ``tail_after`` bounds the mass beyond it."""
    vals = [float(v) for v in values]
    suffix = [0.0] * (len(vals) + 1)
    suffix[-1] = tail_after
    for i in reversed(range(len(vals))):
        suffix[i] = suffix[i + 1] + math.exp(vals[i])
    return TailEnvelope(lambda i: vals[i], lambda n: suffix[min(n, len(vals))], len(vals),
                        {"envelope": "explicit", "values": vals, "tail_after": tail_after})


def envelope_from_dict(data) -> TailEnvelope:
    if isinstance(data, list):
        return explicit_envelope(data)
    kind = data.get("envelope")
    if kind == "geometric":
        return geometric_envelope(float(data["rate"]), float(data.get("offset", 0.0)))
    if kind == "constant":
        return constant_envelope(float(data.get("value", 0.0)))
    if kind == "explicit":
        return explicit_envelope(data["values"], float(data.get("tail_after", 0.0)))
    raise PotentialError(f"unknown envelope {kind!r}")


def truncation_level(envelope: TailEnvelope, epsilon: float) -> int:
    """Smallest N with T(N) <= epsilon (binary search; T is nonincreasing)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not envelope.tail(envelope.domain) <= epsilon:
        raise EnvelopeNotSummable(
            f"tail bound stays above {epsilon:g} up to N={envelope.domain}")
    lo, hi = 0, envelope.domain
    while lo < hi:
        mid = (lo + hi) // 2
        if envelope.tail(mid) <= epsilon:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class CountableModel:
    """A potential on Sigma_A(N) given by rules, restricted on demand."""

    range: int
    value: Callable[[tuple[int, ...]], float]
    allows: Callable[[int, int], bool] = lambda a, b: True
    envelope: TailEnvelope | None = None
    var1_bound: float | None = None
    name: str = "custom"


def linear_symbol_penalty(slope: float = 1.0) -> CountableModel:
    """Countable full shift with f(x) = -slope * x_0."""
    return CountableModel(
        range=1,
        value=lambda w: -slope * w[0],
        envelope=geometric_envelope(slope),
        var1_bound=0.0,
        name="linear_symbol_penalty",
    )


def truncate(model: CountableModel, n: int, metric_base: float = 0.5) -> tuple[MarkovShift, Potential]:
    if n < 1:
        raise ValueError("truncation level must be >= 1")
    table = np.array([[bool(model.allows(a, b)) for b in range(n)] for a in range(n)])
    shift = build_shift(table, metric_base)
    values = {}
    for w in enumerate_words(shift, model.range):
        try:
            values[w] = float(model.value(w))
        except Exception as exc:  # rule failure is reported with the word
            raise PotentialError(f"rule failed on word {format_word(w)}: {exc}") from exc
    return shift, make_potential(shift, model.range, values)


def potential_from_dict(data: dict, shift: MarkovShift | None = None) -> Potential | CountableModel:
    if "rule" in data:
        if data["rule"] != "linear_symbol_penalty":
            raise PotentialError(f"unknown rule {data['rule']!r}")
        model = linear_symbol_penalty(float(data.get("slope", 1.0)))
        if "envelope" in data:
            model = replace(model, envelope=envelope_from_dict(data["envelope"]))
        return model
    if shift is None:
        raise PotentialError("a table potential needs a model (shift)")
    return make_potential(shift, int(data["range"]), data["values"])


def load_potential(path: str | Path, shift: MarkovShift | None = None) -> Potential | CountableModel:
    return potential_from_dict(json.loads(Path(path).read_text()), shift)


def potential_to_dict(potential: Potential) -> dict:
    return {
        "range": potential.range,
        "values": {format_word(w): v for w, v in sorted(potential.values.items())},
    }
