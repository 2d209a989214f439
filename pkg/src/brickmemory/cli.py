"""Command-line front end.

    brickmemory exact-sweep --two-l 200 --x 51 --profile pair:beta=0.7 --t 0..400
    brickmemory infinite-time --two-l 200 --profile "w:omega=0.3;w:omega=0.7"
    brickmemory markov --two-l 100 --x 75 --a 0..3..0.1
    brickmemory figure 2 --out fig2.csv
    brickmemory mc-validate --seed 7 --n 20000 --format json

Output is CSV with a ``#`` header block (version, resolved config, column
provenance) or JSON with the same fields. Identical configs give identical
bytes; elapsed time goes to stderr only.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import __version__
from .distance import (
    annealed_distance_sq,
    distance_series,
    infinite_time_mixed,
    infinite_time_pure,
)
from .haar import (
    build_state_pair,
    folded_gate_check,
    haar_moment_check,
    mc_purities,
    ratio_estimate,
    state_profiles,
)
from .markov import (
    DissipationSchedule,
    critical_a,
    dissipative_eigenvalue,
    markov_distance_sq,
    open_longtime_distance,
    perturbed_eigenvalue,
)
from .profiles import MixedLongTime, PairProduct, WState, parse_profile, self_profile
from .validation import (
    CircuitGeometry,
    CriticalPointError,
    SizeGuardError,
    check_engine_geometry,
)

EXIT_OK, EXIT_CONFIG, EXIT_GUARD = 0, 2, 3

COMMANDS = ("exact-sweep", "infinite-time", "markov", "figure", "mc-validate")

KEYS = (
    "q", "two_l", "x", "profile", "self_a", "self_b", "t", "a", "exponent",
    "depth", "n", "seed", "out", "format", "precision", "workers", "preset",
)

DEFAULTS: dict[str, dict[str, Any]] = {
    "exact-sweep": {"two_l": "20", "x": "1", "profile": "pair:beta=0.7", "t": "0..20"},
    "infinite-time": {"two_l": "200", "x": None, "profile": "w:omega=0.7"},
    "markov": {"two_l": "100", "x": "75", "profile": "w:omega=0.7", "a": "0..3..0.1"},
    "mc-validate": {"two_l": "6,8", "x": "1,3,5", "t": "0..4", "n": "20000", "seed": "7",
                    "profile": "pair:beta=0.7;w:omega=0.7"},
    "figure": {},
}
COMMON = {"q": "2", "exponent": "1", "format": "csv", "precision": "12", "workers": "1"}

FIGURES = {
    "1": ("infinite-time", {
        "two_l": "200", "x": "0..200",
        "profile": "w:omega=0;w:omega=0.3;w:omega=0.5;w:omega=0.7;w:omega=0.9",
    }),
    "2": ("exact-sweep", {
        "two_l": "200", "x": "11,51,91,111,151,191", "profile": "pair:beta=0.7",
        "t": "0..400..4",
    }),
    "3": ("exact-sweep", {
        "two_l": "200", "x": "11,51,91,111,151,191", "profile": "w:omega=0.7",
        "t": "0..400..4",
    }),
    "4": ("markov", {
        "two_l": "100", "x": "75,90,100", "profile": "w:omega=0.7", "a": "0..3..0.05",
    }),
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- parsing


def parse_int_range(text: str, name: str) -> list[int]:
    """``a..b[..step]`` (inclusive), a comma list, or a single integer."""
    try:
        out: list[int] = []
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                bits = part.split("..")
                if len(bits) not in (2, 3):
                    raise ValueError
                lo, hi = int(bits[0]), int(bits[1])
                step = int(bits[2]) if len(bits) == 3 else 1
                if step <= 0 or hi < lo:
                    raise ValueError
                out.extend(range(lo, hi + 1, step))
            else:
                out.append(int(part))
        return out
    except ValueError:
        raise ConfigError(f"--{name.replace('_', '-')}: cannot parse {text!r}") from None


def parse_float_range(text: str, name: str) -> list[float]:
    try:
        out: list[float] = []
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                bits = [Fraction(b) for b in part.split("..")]
                if len(bits) not in (2, 3):
                    raise ValueError
                lo, hi = bits[0], bits[1]
                step = bits[2] if len(bits) == 3 else Fraction(1)
                if step <= 0 or hi < lo:
                    raise ValueError
                count = int((hi - lo) / step)
                out.extend(float(lo + i * step) for i in range(count + 1))
            else:
                out.append(float(Fraction(part)))
        return out
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"--{name.replace('_', '-')}: cannot parse {text!r}") from None


def read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"--config: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            k = k.strip().replace("-", "_")
            if k not in KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {k!r}")
            out[k] = v.strip()
    return out


@dataclass
class RunConfig:
    command: str
    values: dict[str, str] = field(default_factory=dict)

    def get(self, key: str):
        return self.values.get(key)

    def int(self, key: str) -> int:
        vals = parse_int_range(self.values[key], key)
        if len(vals) != 1:
            raise ConfigError(f"--{key.replace('_', '-')} takes a single integer")
        return vals[0]

    def echo(self) -> list[tuple[str, str]]:
        return [(k, self.values[k]) for k in KEYS if self.values.get(k) is not None]


def resolve(args: argparse.Namespace) -> RunConfig:
    command = args.command
    values: dict[str, Any] = dict(COMMON)
    if command == "figure":
        if args.number not in FIGURES:
            raise ConfigError(f"unknown figure {args.number!r}; choose from 1-4")
        command, preset = FIGURES[args.number]
        values.update(DEFAULTS[command])
        values.update(preset)
        values["preset"] = f"figure-{args.number}"
    else:
        values.update(DEFAULTS[command])
    if args.config:
        values.update(read_config_file(args.config))
    for k in KEYS:
        v = getattr(args, k, None)
        if v is not None:
            values[k] = str(v)
    if values.get("format") not in ("csv", "json"):
        raise ConfigError("--format must be csv or json")
    return RunConfig(command, values)


# ---------------------------------------------------------------- output


@dataclass
class OutputRecord:
    config: RunConfig
    columns: list[str]
    provenance: dict[str, str]
    rows: list[tuple]
    summary: dict[str, Any] = field(default_factory=dict)
    elapsed: float = 0.0


def _fmt(v, precision: int) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        return format(float(v), f".{precision}g")
    return str(v)


def _json_val(v, precision: int):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            return None
        return float(format(float(v), f".{precision}g"))
    return v


def render(rec: OutputRecord) -> str:
    precision = int(rec.config.values["precision"])
    if rec.config.values["format"] == "json":
        doc = {
            "version": __version__,
            "command": rec.config.command,
            "config": dict(rec.config.echo()),
            "provenance": rec.provenance,
            "summary": {k: _json_val(v, precision) for k, v in rec.summary.items()},
            "columns": rec.columns,
            "rows": [
                {c: _json_val(v, precision) for c, v in zip(rec.columns, row)}
                for row in rec.rows
            ],
        }
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# brickmemory {__version__}\n")
    buf.write(f"# command {rec.config.command}\n")
    for k, v in rec.config.echo():
        buf.write(f"# config {k}={v}\n")
    for col, op in rec.provenance.items():
        buf.write(f"# column {col} <- {op}\n")
    for k, v in rec.summary.items():
        buf.write(f"# summary {k}={_fmt(v, precision)}\n")
    buf.write(",".join(rec.columns) + "\n")
    for row in rec.rows:
        buf.write(",".join(_fmt(v, precision) for v in row) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------- commands


def _profiles(cfg: RunConfig, two_l: int):
    specs = [s for s in cfg.values["profile"].split(";") if s.strip()]
    return [(s.strip(), parse_profile(s.strip(), two_l)) for s in specs]


def _selves(cfg: RunConfig, cross, two_l: int):
    sa = cfg.get("self_a")
    sb = cfg.get("self_b")
    sa = parse_profile(sa, two_l) if sa else self_profile(cross, two_l)
    sb = parse_profile(sb, two_l) if sb else sa
    return sa, sb


def _sweep_one(job):
    geom, times, cross, sa, sb = job
    return distance_series(geom, times, cross, sa, sb).values


def _pool_map(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def cmd_exact_sweep(cfg: RunConfig) -> OutputRecord:
    q, two_l = cfg.int("q"), cfg.int("two_l")
    xs = sorted(set(parse_int_range(cfg.values["x"], "x")))
    times = sorted(set(parse_int_range(cfg.values["t"], "t")))
    ((spec, cross),) = _single_profile(cfg, two_l)
    if not cross.finite_time:
        raise ConfigError(f"profile {spec!r} has no finite-time overlap; use infinite-time")
    sa, sb = _selves(cfg, cross, two_l)
    jobs = [(CircuitGeometry(q, two_l, x), times, cross, sa, sb) for x in xs]
    for job in jobs:
        check_engine_geometry(job[0])
    results = _pool_map(_sweep_one, jobs, cfg.int("workers"))
    rows = [
        (x, t, v, "exact") for x, vals in zip(xs, results) for t, v in zip(times, vals)
    ]
    return OutputRecord(
        cfg,
        ["x", "t", "delta_sq", "provenance"],
        {"delta_sq": "distance.annealed_distance_sq"},
        rows,
    )


def _single_profile(cfg, two_l):
    profs = _profiles(cfg, two_l)
    if len(profs) != 1:
        raise ConfigError("this command takes exactly one --profile")
    return profs


def cmd_infinite_time(cfg: RunConfig) -> OutputRecord:
    q, two_l = cfg.int("q"), cfg.int("two_l")
    xs = sorted(set(parse_int_range(cfg.values.get("x") or f"0..{two_l}", "x")))
    rows = []
    for spec, prof in _profiles(cfg, two_l):
        for x in xs:
            geom = CircuitGeometry(q, two_l, x)
            if isinstance(prof, MixedLongTime):
                val = infinite_time_mixed(geom, prof)
            else:
                val = infinite_time_pure(geom, prof.overlap_sq(two_l))
            rows.append((spec, x, val, "closed-form"))
    return OutputRecord(
        cfg,
        ["profile", "x", "delta_sq_infinity", "provenance"],
        {"delta_sq_infinity": "distance.infinite_time_pure | distance.infinite_time_mixed"},
        rows,
    )


def _markov_representable(geom: CircuitGeometry) -> bool:
    return geom.x in (0, geom.two_l) or geom.x % 2 == 1


def cmd_markov(cfg: RunConfig) -> OutputRecord:
    q, two_l = cfg.int("q"), cfg.int("two_l")
    xs = sorted(set(parse_int_range(cfg.values["x"], "x")))
    a_grid = parse_float_range(cfg.values["a"], "a")
    exponent = float(Fraction(cfg.values["exponent"]))
    depth = cfg.int("depth") if cfg.get("depth") else 10 * two_l  # T = 20 L
    ((spec, cross),) = _single_profile(cfg, two_l)
    sa, sb = _selves(cfg, cross, two_l)
    overlap = cross.overlap_sq(two_l)
    rows = []
    for x in xs:
        geom = CircuitGeometry(q, two_l, x)
        a_c = critical_a(geom)
        for a in a_grid:
            sched = DissipationSchedule(a, depth, exponent)
            if _markov_representable(geom):
                numeric = markov_distance_sq(geom, sched, cross, sa, sb)
            else:
                numeric = float("nan")
            closed = open_longtime_distance(geom, a, overlap)
            rows.append((
                x, a, numeric, closed,
                dissipative_eigenvalue(geom, sched),
                perturbed_eigenvalue(geom, sched),
                a_c, "exact",
            ))
    return OutputRecord(
        cfg,
        ["x", "a", "delta_sq_T", "delta_sq_T_closed", "lambda_numeric",
         "lambda_perturbative", "a_c", "provenance"],
        {
            "delta_sq_T": "markov.markov_distance_sq",
            "delta_sq_T_closed": "markov.open_longtime_distance",
            "lambda_numeric": "markov.dissipative_eigenvalue",
            "lambda_perturbative": "markov.perturbed_eigenvalue",
            "a_c": "markov.critical_a",
        },
        rows,
    )


def _w_amplitudes(omega: float) -> dict:
    d = math.sqrt(omega)  # |c1|^2 - |c2|^2
    return {"c1": math.sqrt((1 + d) / 2), "c2": math.sqrt((1 - d) / 2)}


def _state_params(prof):
    if isinstance(prof, WState):
        return "w", _w_amplitudes(float(prof.omega))
    if isinstance(prof, PairProduct) and prof.beta == prof.gamma:
        return "pair", {"beta": float(prof.beta)}
    raise ConfigError("mc-validate supports pair:beta=.. and w:omega=.. profiles")


def cmd_mc_validate(cfg: RunConfig) -> OutputRecord:
    q = cfg.int("q")
    sizes = sorted(set(parse_int_range(cfg.values["two_l"], "two_l")))
    xs = sorted(set(parse_int_range(cfg.values["x"], "x")))
    times = sorted(set(parse_int_range(cfg.values["t"], "t")))
    n, seed, workers = cfg.int("n"), cfg.int("seed"), cfg.int("workers")
    if n < 100:
        raise ConfigError("--n must be at least 100")
    rows = []
    for two_l in sizes:
        for spec, prof in _profiles(cfg, two_l):
            kind, params = _state_params(prof)
            geom = CircuitGeometry(q, two_l, xs[0])
            a, b, _ = build_state_pair(kind, params, geom)
            cross, sa, sb = state_profiles(a, b)
            samples = mc_purities(q, two_l, [a, b], [(0, 1)], xs, max(times), n, seed,
                                  workers=workers)
            for ix, x in enumerate(xs):
                gx = geom.with_x(x)
                for t in times:
                    est = ratio_estimate(samples[:, t, ix, 0], seed)
                    exact = annealed_distance_sq(gx, t, cross, sa, sb)
                    diff = est.mean - exact
                    z = diff / est.stderr if est.stderr > 0 else (0.0 if diff == 0 else math.inf)
                    within = abs(diff) <= 3 * est.stderr + 1e-12
                    rows.append((spec, two_l, x, t, est.mean, est.stderr, exact, z, within, "mc"))
    frac = sum(r[8] for r in rows) / len(rows)
    gate = folded_gate_check(max(n, 1000), seed, q)
    moments = haar_moment_check(q * q, max(n, 1000), seed)
    summary = {
        "cells": len(rows),
        "fraction_within_3se": frac,
        "grid_pass": frac >= 0.95,
        "folded_mixed_residual": gate.mixed_residual,
        "folded_bound": 5 / math.sqrt(gate.n),
        "folded_unitary_residual": max(gate.circle_residual, gate.square_residual),
        "haar_second_moment_z": moments["second_moment_z"],
    }
    return OutputRecord(
        cfg,
        ["profile", "two_l", "x", "t", "mc_mean", "mc_stderr", "exact", "z",
         "within_3se", "provenance"],
        {"mc_mean": "haar.ratio_estimate", "mc_stderr": "haar.ratio_estimate",
         "exact": "distance.annealed_distance_sq"},
        rows,
        summary,
    )


HANDLERS = {
    "exact-sweep": cmd_exact_sweep,
    "infinite-time": cmd_infinite_time,
    "markov": cmd_markov,
    "mc-validate": cmd_mc_validate,
}


def cmd_figure(cfg: RunConfig) -> OutputRecord:
    """Figure presets resolve to one of the sweep commands."""
    return HANDLERS[cfg.command](cfg)


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for flag in ("q", "two-l", "x", "profile", "self-a", "self-b", "t", "a", "exponent",
                 "depth", "n", "seed", "out", "precision", "workers"):
        common.add_argument(f"--{flag}", dest=flag.replace("-", "_"), default=None)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--config", default=None, help="key=value file; flags win")
    parser = argparse.ArgumentParser(prog="brickmemory", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "figure":
            p.add_argument("number", choices=sorted(FIGURES))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = resolve(args)
        handler = cmd_figure if args.command == "figure" else HANDLERS[cfg.command]
        rec = handler(cfg)
    except (SizeGuardError, CriticalPointError, ArithmeticError, OverflowError) as exc:
        print(f"error: numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rec.elapsed = time.perf_counter() - start
    text = render(rec)
    out = cfg.get("out")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"elapsed {rec.elapsed:.3f} s", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
