"""beta-sweeps joining the positive-temperature and zero-temperature engines."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .deviation import (RPlusWeights, deviation_report, weights_from_solution,
                        zero_level_check)
from .graph import ContextGraph, build_context_graph
from .maxplus import ManeKernel, MaxPlusSolution, mane_kernel, solve_maxplus
from .potential import Potential
from .shift import MarkovShift, enumerate_words, format_word, parse_word
from .transfer import (NoConvergence, cylinder_log_measure, equilibrium_diagnostics,
                       g_beta_edge, gibbs_chain, gibbs_sandwich_gap, rpf_solve)

log = logging.getLogger(__name__)

SLACK = 1e-12
DEFAULT_GRID = tuple(4.0 * 2**j for j in range(8))  # 4 .. 512


class SweepError(ValueError):
    pass


class InsufficientData(SweepError):
    pass


def default_workers() -> int:
    env = os.environ.get("ZEROTEMP_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(eq=False)
class Instance:
    """A (shift, potential) pair with its zero-temperature data cached."""

    shift: MarkovShift
    potential: Potential
    name: str = "instance"

    @cached_property
    def graph(self) -> ContextGraph:
        return build_context_graph(self.shift, self.potential)

    @cached_property
    def maxplus(self) -> MaxPlusSolution:
        return solve_maxplus(self.graph)

    @cached_property
    def kernel(self) -> ManeKernel:
        return mane_kernel(self.graph, self.maxplus.m_f)

    @cached_property
    def weights(self) -> RPlusWeights:
        return weights_from_solution(self.graph, self.maxplus)

    def inf_I(self, words: Sequence[Sequence[int]]) -> dict[tuple[int, ...], float]:
        results = deviation_report(self.weights, self.maxplus.aubry_contexts, words)
        return {res.word: res.inf_I for res in results}

    def zero_level(self, max_period: int = 6) -> dict:
        return zero_level_check(self.weights, self.kernel, self.maxplus.unique, max_period)


SCALARS = ("beta", "pressure", "pressure_over_beta", "integral_f", "entropy", "v_gap",
           "sandwich_gap", "pressure_defect", "g_limit_gap", "residual")


@dataclass
class SweepRecord:
    beta: float
    pressure: float
    pressure_over_beta: float
    integral_f: float
    entropy: float
    v_gap: float
    sandwich_gap: float
    pressure_defect: float
    g_limit_gap: float
    residual: float
    v_beta: dict[str, float] = field(default_factory=dict)
    log_measures: dict[str, float] = field(default_factory=dict)
    ldp_residuals: dict[str, float] = field(default_factory=dict)
    ratio_residuals: dict[str, float] = field(default_factory=dict)

    @property
    def ratio_bound(self) -> float:
        """|ratio residual| <= v_gap + pressure_defect / beta."""
        return self.v_gap + self.pressure_defect / self.beta

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in SCALARS}
        for k in ("v_beta", "log_measures", "ldp_residuals", "ratio_residuals"):
            out[k] = dict(getattr(self, k))
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SweepRecord":
        kw = {k: float(data[k]) for k in SCALARS}
        for k in ("v_beta", "log_measures", "ldp_residuals", "ratio_residuals"):
            kw[k] = {w: float(v) for w, v in data.get(k, {}).items()}
        return cls(**kw)


def _beta_record(inst: Instance, beta: float, cylinders, inf_I, tracked, sandwich_words,
                 tol: float) -> SweepRecord:
    graph, mp = inst.graph, inst.maxplus
    rpf = rpf_solve(inst.shift, inst.potential, beta, tol=tol, graph=graph, maxplus=mp)
    chain = gibbs_chain(rpf, graph)
    diag = equilibrium_diagnostics(rpf, chain)
    v_beta = rpf.v_beta
    spread = v_beta - mp.V
    v_gap = float(spread.max() - spread.min())
    pressure_defect = rpf.pressure_defect
    g_gap = max(abs(g_beta_edge(rpf, e, graph) / beta + inst.weights.r[e])
                for e in range(graph.n_edges))
    log_measures, ldp = {}, {}
    for w in cylinders:
        key = format_word(w)
        lm = cylinder_log_measure(chain, w)
        log_measures[key] = lm
        if math.isfinite(inf_I[w]):
            ldp[key] = lm / beta + inf_I[w]
    ratios = {}
    for w in tracked:
        e = graph.edge_path(w[: graph.context_len + 1])[0]
        num = cylinder_log_measure(chain, w[1:])
        den = cylinder_log_measure(chain, w)
        ratios[format_word(w)] = (num - den) / beta - float(inst.weights.r[e])
    return SweepRecord(
        beta=float(beta),
        pressure=rpf.log_lambda,
        pressure_over_beta=rpf.log_lambda / beta,
        integral_f=diag["integral_f"],
        entropy=diag["entropy"],
        v_gap=v_gap,
        sandwich_gap=gibbs_sandwich_gap(rpf, chain, sandwich_words),
        pressure_defect=pressure_defect,
        g_limit_gap=g_gap,
        residual=rpf.residual,
        v_beta={graph.label(c): float(v) for c, v in enumerate(v_beta)},
        log_measures=log_measures,
        ldp_residuals=ldp,
        ratio_residuals=ratios,
    )


def default_words(shift: MarkovShift, max_len: int, limit: int = 4096) -> list[tuple[int, ...]]:
    words: list[tuple[int, ...]] = []
    for length in range(1, max_len + 1):
        batch = list(enumerate_words(shift, length))
        if len(words) + len(batch) > limit:
            break
        words.extend(batch)
    return words


def run_sweep(inst: Instance, beta_grid: Sequence[float] = DEFAULT_GRID,
              cylinders: Sequence[Sequence[int]] | None = None,
              tracked_words: Sequence[Sequence[int]] | None = None,
              sandwich_words: Sequence[Sequence[int]] | None = None,
              tol: float = 1e-12, workers: int | None = None) -> list[SweepRecord]:
    """One record per beta (skipping betas whose solve fails)."""
    grid = [float(b) for b in beta_grid]
    if any(b <= 1.0 for b in grid):
        raise SweepError("every beta must exceed 1")
    if any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])):
        raise SweepError("beta grid must be strictly increasing")
    m = inst.graph.context_len
    cylinders = [tuple(w) for w in (cylinders if cylinders is not None else default_words(inst.shift, 2))]
    dropped = [w for w in cylinders if not inst.shift.is_admissible(w)]
    if dropped:
        log.warning("empty cylinders dropped from the sweep: %s", [format_word(w) for w in dropped])
        cylinders = [w for w in cylinders if w not in dropped]
    if tracked_words is None:
        tracked_words = list(enumerate_words(inst.shift, m + 1))
    tracked = [tuple(w) for w in tracked_words]
    for w in tracked:
        if len(w) < m + 1 or not inst.shift.is_admissible(w):
            raise SweepError(f"tracked word {format_word(w)} must be admissible with length >= {m + 1}")
    if sandwich_words is None:
        sandwich_words = default_words(inst.shift, 6)
    inf_I = inst.inf_I(cylinders)
    # force the cached zero-temperature data before any worker touches it
    inst.kernel, inst.weights

    def one(beta):
        try:
            return _beta_record(inst, beta, cylinders, inf_I, tracked, sandwich_words, tol)
        except NoConvergence as exc:
            log.warning("beta=%g skipped: %s", beta, exc)
            return None

    workers = workers or default_workers()
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, grid))
    else:
        out = [one(b) for b in grid]
    return [r for r in out if r is not None]


def _fit_intercept(betas, values):
    x = 1.0 / np.asarray(betas)
    slope, intercept = np.polyfit(x, np.asarray(values), 1)
    return float(intercept), float(slope)


def _orders(betas, values, limit):
    res = np.abs(np.asarray(values) - limit)
    orders = []
    for i in range(len(res) - 1):
        if res[i] > 0 and res[i + 1] > 0:
            orders.append(math.log(res[i] / res[i + 1]) / math.log(betas[i + 1] / betas[i]))
        else:
            orders.append(math.inf)
    return orders


def limit_estimates(records: Sequence[SweepRecord], window: int = 3) -> dict:
    """Linear extrapolation in 1/beta over the last ``window`` records, plus
    convergence orders from successive residual ratios."""
    if len(records) < 3:
        raise InsufficientData("need at least 3 records")
    tail = list(records)[-window:]
    betas = [r.beta for r in records]
    tb = [r.beta for r in tail]
    m_est, _ = _fit_intercept(tb, [r.pressure_over_beta for r in tail])
    out = {
        "m_f_from_pressure": m_est,
        "ldp_limits": {},
        "convergence_orders": {
            "pressure_over_beta": _orders(betas, [r.pressure_over_beta for r in records], m_est)},
    }
    keys = [k for k in records[0].log_measures if all(
        math.isfinite(r.log_measures.get(k, -math.inf)) for r in records)]
    for key in keys:
        vals = [r.log_measures[key] / r.beta for r in records]
        lim, _ = _fit_intercept(tb, vals[-len(tail):])
        out["ldp_limits"][key] = lim
        out["convergence_orders"][key] = _orders(betas, vals, lim)
    return out


def monotonicity_audit(records: Sequence[SweepRecord], slack: float = SLACK) -> dict:
    """integral_f increasing, entropy decreasing, pressure defect
    nonincreasing and nonnegative, along the record order."""
    violations = []
    for a, b in zip(records, records[1:]):
        pair = (a.beta, b.beta)
        if b.beta <= a.beta:
            violations.append({"check": "beta_increasing", "betas": pair})
        if b.integral_f < a.integral_f - slack:
            violations.append({"check": "integral_f_increasing", "betas": pair})
        if b.entropy > a.entropy + slack:
            violations.append({"check": "entropy_decreasing", "betas": pair})
        if b.pressure_defect > a.pressure_defect + slack:
            violations.append({"check": "pressure_defect_nonincreasing", "betas": pair})
    for r in records:
        if r.pressure_defect < -slack:
            violations.append({"check": "pressure_defect_nonnegative", "betas": (r.beta,)})
        if r.entropy < -slack:
            violations.append({"check": "entropy_nonnegative", "betas": (r.beta,)})
    return {"checked": len(records), "violations": violations}


def sweep_audit(records: Sequence[SweepRecord], ratio_tol: float = 0.05,
                v_gap_tol: float = 0.05) -> dict:
    """Every sweep-level limit check; ``passed`` is False on any failure."""
    checks = []

    def add(name, ok, **detail):
        checks.append({"check": name, "passed": bool(ok), **detail})

    mono = monotonicity_audit(records)
    add("monotonicity", not mono["violations"], violations=mono["violations"])
    if records:
        first, last = records[0], records[-1]
        for key, res in last.ldp_residuals.items():
            if key in first.ldp_residuals:
                add(f"ldp_shrinks[{key}]", abs(res) <= abs(first.ldp_residuals[key]),
                    first=first.ldp_residuals[key], last=res)
        add("v_gap_shrinks", last.v_gap <= first.v_gap + 1e-9, first=first.v_gap, last=last.v_gap)
        add("v_gap_final", last.v_gap <= v_gap_tol, value=last.v_gap)
        worst = max((abs(v) for v in last.ratio_residuals.values()), default=0.0)
        add("ratio_residual_final", worst <= ratio_tol, value=worst)
        for r in records:
            worst = max((abs(v) for v in r.ratio_residuals.values()), default=0.0)
            add(f"ratio_bound[{r.beta:g}]", worst <= r.ratio_bound + SLACK,
                value=worst, bound=r.ratio_bound)
            bound = 2 * r.v_gap + abs(r.pressure_defect) / r.beta + SLACK
            add(f"g_limit[{r.beta:g}]", r.g_limit_gap <= bound, value=r.g_limit_gap, bound=bound)
    return {"passed": all(c["passed"] for c in checks), "checks": checks}


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _columns(records: Sequence[SweepRecord]) -> list[str]:
    cols = list(SCALARS)
    if records:
        r = records[0]
        cols += [f"v_beta[{k}]" for k in r.v_beta]
        cols += [f"log_mu[{k}]" for k in r.log_measures]
        cols += [f"ldp[{k}]" for k in r.ldp_residuals]
        cols += [f"ratio[{k}]" for k in r.ratio_residuals]
    return cols


_GROUPS = {"v_beta": "v_beta", "log_mu": "log_measures", "ldp": "ldp_residuals",
           "ratio": "ratio_residuals"}


def to_csv(records: Sequence[SweepRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = _columns(records)
    writer.writerow(cols)
    for r in records:
        row = []
        for col in cols:
            if "[" in col:
                group, key = col[:-1].split("[", 1)
                row.append(_fmt(getattr(r, _GROUPS[group])[key]))
            else:
                row.append(_fmt(getattr(r, col)))
        writer.writerow(row)
    return buf.getvalue()


def from_csv(text: str) -> list[SweepRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    cols, out = rows[0], []
    for row in rows[1:]:
        data: dict = {g: {} for g in _GROUPS.values()}
        for col, val in zip(cols, row):
            if "[" in col:
                group, key = col[:-1].split("[", 1)
                data[_GROUPS[group]][key] = float(val)
            else:
                data[col] = float(val)
        out.append(SweepRecord.from_dict(data))
    return out


def to_json(records: Sequence[SweepRecord]) -> str:
    return json.dumps([r.to_dict() for r in records], indent=1) + "\n"


def from_json(text: str) -> list[SweepRecord]:
    return [SweepRecord.from_dict(d) for d in json.loads(text)]


def emit(records: Sequence[SweepRecord], fmt: str, path: str | Path) -> Path:
    """Write records as CSV (one row per beta, header first) or a JSON array."""
    if fmt not in ("csv", "json"):
        raise SweepError(f"unknown format {fmt!r}")
    path = Path(path)
    text = to_csv(records) if fmt == "csv" else to_json(records)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def parse_words(items: Sequence[str]) -> list[tuple[int, ...]]:
    return [parse_word(s) for s in items]
