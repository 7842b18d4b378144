"""Command line front end: ``zerotemp {check,solve,deviation,sweep}``.

Runs are described by one JSON config; flags only choose paths, the output
format and verbosity.  Exit codes: 0 success, 1 usage/config error,
2 numerical failure, 3 audit failure, 4 hypothesis warning (non-unique
maximizing measure).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .maxplus import MaxPlusError
from .potential import (CountableModel, PotentialError, load_potential,
                        truncate, truncation_level, variation, walters_modulus)
from .shift import (ShiftError, is_irreducible, is_topologically_mixing,
                    load_model, parse_word, period, primitivity_witness)
from .sweep import (DEFAULT_GRID, Instance, SweepError, emit, limit_estimates,
                    monotonicity_audit, run_sweep, sweep_audit)
from .transfer import NotMixing, TransferError, equilibrium_diagnostics, gibbs_chain, rpf_solve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_AUDIT, EXIT_WARNING = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    pass


class AuditFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    model: Path | None
    potential: Path
    betas: list[float] = field(default_factory=lambda: list(DEFAULT_GRID))
    cylinders: list[tuple[int, ...]] | None = None
    tracked_words: list[tuple[int, ...]] | None = None
    tol: float = 1e-12
    truncation_epsilon: float | None = None
    truncation_n: int | None = None
    max_period: int = 6
    backend: str = "auto"
    format: str = "csv"
    ratio_tol: float = 0.05
    v_gap_tol: float = 0.05

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        base = path.parent

        def rel(p):
            return None if p is None else (base / p)

        if "potential" not in data:
            raise ConfigError("config needs a 'potential' file")
        trunc = data.get("truncation", {})
        cfg = cls(
            model=rel(data.get("model")),
            potential=rel(data["potential"]),
            betas=[float(b) for b in data.get("betas", DEFAULT_GRID)],
            cylinders=[parse_word(w) for w in data["cylinders"]] if "cylinders" in data else None,
            tracked_words=[parse_word(w) for w in data["tracked_words"]] if "tracked_words" in data else None,
            tol=float(data.get("tol", 1e-12)),
            truncation_epsilon=trunc.get("epsilon"),
            truncation_n=trunc.get("N"),
            max_period=int(data.get("max_period", 6)),
            backend=data.get("backend", "auto"),
            format=data.get("format", "csv"),
            ratio_tol=float(data.get("ratio_tol", 0.05)),
            v_gap_tol=float(data.get("v_gap_tol", 0.05)),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.tol <= 0 or self.ratio_tol <= 0 or self.v_gap_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.truncation_epsilon is not None and self.truncation_epsilon <= 0:
            raise ConfigError("truncation epsilon must be positive")
        if any(b2 <= b1 for b1, b2 in zip(self.betas, self.betas[1:])):
            raise ConfigError("beta grid must be strictly increasing")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")


def load_instance(cfg: RunConfig) -> tuple[Instance, dict, CountableModel | None]:
    """Build the finite instance; countable rule potentials are truncated."""
    try:
        shift = load_model(cfg.model) if cfg.model is not None else None
        pot = load_potential(cfg.potential, shift)
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {exc.filename}") from None
    except (json.JSONDecodeError, KeyError) as exc:
        raise ConfigError(f"malformed model or potential file: {exc}") from None
    info: dict = {}
    countable = pot if isinstance(pot, CountableModel) else None
    if countable is not None:
        if cfg.truncation_n is not None:
            n = int(cfg.truncation_n)
        elif cfg.truncation_epsilon is not None and pot.envelope is not None:
            n = max(1, truncation_level(pot.envelope, cfg.truncation_epsilon))
        else:
            raise ConfigError("countable potential needs truncation N or epsilon")
        metric = shift.metric_base if shift is not None else 0.5
        shift, pot = truncate(pot, n, metric)
        info["truncation_level"] = n
    return Instance(shift, pot, cfg.potential.stem), info, countable


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, indent=1, allow_nan=False, default=_json_default) + "\n")


def _json_default(x):
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(type(x))


def _clean(x):
    """Make a structure strict-JSON safe (infinities spelled as strings)."""
    if isinstance(x, float) and not math.isfinite(x):
        return "+inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def cmd_check(cfg: RunConfig, out: Path, say) -> int:
    inst, info, countable = load_instance(cfg)
    shift, pot = inst.shift, inst.potential
    witness = primitivity_witness(shift)
    report: dict = {
        "alphabet_size": shift.alphabet_size,
        "range": pot.range,
        "irreducible": is_irreducible(shift),
        "period": period(shift),
        "mixing": is_topologically_mixing(shift),
        "primitivity_K0": witness.K0 if witness else None,
        "walters_moduli": {str(j): walters_modulus(pot, j) for j in range(1, pot.range + 1)},
        "var_1": variation(pot, 1),
        **info,
    }
    if countable is not None and countable.envelope is not None:
        env = countable.envelope
        report["coercive_tail"] = {**env.params, "tail_at_truncation": env.tail(info["truncation_level"])}
    hypotheses = [
        ("topologically_mixing", report["mixing"]),
        ("finitely_primitive", witness is not None),
        # a locally constant potential has summable (eventually zero) moduli
        ("walters", report["walters_moduli"][str(pot.range)] == 0.0),
    ]
    try:
        mp = inst.maxplus
        report["m_f"] = mp.m_f
        report["unique_maximizing_measure"] = mp.unique
        hypotheses.append(("unique_maximizing_measure", mp.unique))
    except MaxPlusError as exc:
        report["maxplus_error"] = str(exc)
        hypotheses.append(("unique_maximizing_measure", False))
    report["hypotheses"] = {name: bool(ok) for name, ok in hypotheses}
    _write_json(out / "check.json", _clean(report))
    for name, ok in hypotheses:
        say(f"{'PASS' if ok else 'FAIL'} {name}")
    structural = all(ok for name, ok in hypotheses if name != "unique_maximizing_measure")
    if not structural:
        return EXIT_AUDIT
    if not report["hypotheses"]["unique_maximizing_measure"]:
        return EXIT_WARNING
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out: Path, say) -> int:
    inst, info, _ = load_instance(cfg)
    mp = inst.maxplus
    solutions, failures = [], []
    for beta in cfg.betas:
        rpf = rpf_solve(inst.shift, inst.potential, beta, tol=cfg.tol, backend=cfg.backend,
                        graph=inst.graph, maxplus=mp)
        chain = gibbs_chain(rpf, inst.graph)
        entry = rpf.to_dict()
        entry["contexts"] = [inst.graph.label(c) for c in range(inst.graph.n)]
        entry.update(equilibrium_diagnostics(rpf, chain))
        norm = abs(math.fsum(rpf.nu * np.exp(rpf.log_h)) - 1.0)
        entry["normalization_defect"] = norm
        if rpf.residual > cfg.tol or norm > 1e-12:
            failures.append(beta)
        solutions.append(entry)
        say(f"beta={beta:g} log_lambda={rpf.log_lambda:.17g} residual={rpf.residual:.2e}")
    _write_json(out / "solve.json", _clean({
        **info, "maxplus": mp.to_dict(inst.graph), "rpf": solutions, "audit_failures": failures}))
    return EXIT_AUDIT if failures else EXIT_OK


def _cylinders(cfg: RunConfig, inst: Instance):
    if cfg.cylinders is not None:
        return cfg.cylinders
    from .sweep import default_words
    return default_words(inst.shift, 2)


def cmd_deviation(cfg: RunConfig, out: Path, say) -> int:
    from .deviation import deviation_report
    inst, info, _ = load_instance(cfg)
    mp = inst.maxplus
    results = deviation_report(inst.weights, mp.aubry_contexts, _cylinders(cfg, inst))
    rows = [res.to_dict(inst.graph) for res in results]
    zero = inst.zero_level(cfg.max_period)
    _write_json(out / "deviation.json", _clean({
        **info, "m_f": mp.m_f, "unique": mp.unique, "cylinders": rows, "zero_level": zero}))
    for row in rows:
        say(f"[{row['word']}] inf_I = {row['inf_I']}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Path, say) -> int:
    inst, info, _ = load_instance(cfg)
    records = run_sweep(inst, cfg.betas, _cylinders(cfg, inst), cfg.tracked_words, tol=cfg.tol)
    emit(records, cfg.format, out / f"sweep.{cfg.format}")
    audit = sweep_audit(records, cfg.ratio_tol, cfg.v_gap_tol)
    audit["zero_level"] = inst.zero_level(cfg.max_period)
    if audit["zero_level"]["violations"]:
        audit["passed"] = False
    audit["skipped_betas"] = [b for b in cfg.betas if b not in {r.beta for r in records}]
    audit["monotonicity"] = monotonicity_audit(records)
    if len(records) >= 3:
        audit["limits"] = limit_estimates(records)
    audit.update(info)
    _write_json(out / "audit.json", _clean(audit))
    for chk in audit["checks"]:
        say(f"{'PASS' if chk['passed'] else 'FAIL'} {chk['check']}")
    return EXIT_OK if audit["passed"] else EXIT_AUDIT


COMMANDS = {"check": cmd_check, "solve": cmd_solve, "deviation": cmd_deviation, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zerotemp", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="run config (JSON)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), help="sweep output format")
    parser.add_argument("--quiet", action="store_true")
    return parser


def _fail(code: int, kind: str, message: str, out: Path | None) -> int:
    payload = json.dumps({"error": kind, "message": message, "exit_code": code})
    print(payload, file=sys.stderr)
    if out is not None and out.is_dir():
        (out / "error.json").write_text(payload + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    out = Path(args.out)
    say = (lambda msg: None) if args.quiet else print
    try:
        cfg = RunConfig.load(args.config)
        if args.format:
            cfg.format = args.format
        out.mkdir(parents=True, exist_ok=True)
        say(f"# kernels: {kernels.BACKEND}")
        return COMMANDS[args.command](cfg, out, say)
    except (ConfigError, ShiftError, PotentialError, SweepError) as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc), out)
    except NotMixing as exc:
        return _fail(EXIT_AUDIT, type(exc).__name__, str(exc), out)
    except (TransferError, MaxPlusError) as exc:
        return _fail(EXIT_NUMERICAL, type(exc).__name__, str(exc), out)


if __name__ == "__main__":
    sys.exit(main())
