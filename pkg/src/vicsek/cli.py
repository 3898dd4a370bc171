"""Command-line interface: ``vicsek {lambda2,extend,spectrum,verify,export,plot}``.

Exit codes: 0 success / all properties hold, 1 a property failed, 2 an
infrastructure error (bad input, level cap, solver failure, I/O).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np

from . import __version__
from . import decimation as dec
from .graph import BUILD_LEVEL_CAP, LevelCapError, build_graph, write_edges_csv, write_vertices_csv
from .plot import render_svg
from .reports import PropertyResult, Report
from .verify import DEFAULT_SEED, SUITES, run_suite

EXIT_OK, EXIT_PROPERTY, EXIT_INFRA = 0, 1, 2
BASES = {"u1": (1.0, 0.0, 0.0), "u2": (0.0, 1.0, 0.0), "u3": (0.0, 0.0, 1.0), "zero": (0.0, 0.0, 0.0)}


class InfrastructureError(RuntimeError):
    pass


@dataclass
class RunConfig:
    precision: str = "double"
    levels: Optional[int] = None
    depth: int = 8
    grid: int = 10_000
    trials: int = 100
    seed: int = DEFAULT_SEED
    out: Optional[str] = None
    format: str = "text"

    def __post_init__(self):
        if self.precision not in ("double", "high"):
            raise InfrastructureError(f"unknown precision {self.precision!r}")
        if self.levels is not None and not 0 <= self.levels <= dec.MAX_LEVELS:
            raise InfrastructureError(f"--levels must lie in [0, {dec.MAX_LEVELS}]")
        if not 0 <= self.depth <= 10:
            raise InfrastructureError("--depth must lie in [0, 10]")
        if self.grid < 2:
            raise InfrastructureError("--grid must be >= 2")
        if self.trials < 0:
            raise InfrastructureError("--trials must be >= 0")

    @classmethod
    def from_args(cls, args):
        keys = cls.__dataclass_fields__
        return cls(**{k: getattr(args, k) for k in keys if getattr(args, k, None) is not None})


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _fmt(x, precision, digits=40):
    if x is None:
        return "-"
    if precision == "high":
        return mpmath.nstr(x, digits)
    return repr(float(x))


def _coeffs(args):
    if args.coeffs is not None:
        return tuple(args.coeffs)
    return BASES[args.basis or "u1"]


def _level(args, default):
    m = default if args.levels is None else args.levels
    if m > BUILD_LEVEL_CAP:
        raise LevelCapError(f"level {m} exceeds cap {BUILD_LEVEL_CAP}")
    return m


# -- commands ----------------------------------------------------------------

def cmd_lambda2(args, cfg: RunConfig) -> int:
    if cfg.levels:
        seq = dec.lambda_sequence(cfg.levels, cfg.precision)
    else:
        seq = dec.lambda2(cfg.precision)
    rows = seq.table()
    with _output(cfg.out) as fh:
        if cfg.format == "json":
            json.dump({"precision": cfg.precision, "converged": seq.converged,
                       "estimate": _fmt(seq.limit, cfg.precision, dec.HIGH_DPS),
                       "table": [{"m": m, "lambda_m": _fmt(lam, cfg.precision), "scaled": _fmt(e, cfg.precision),
                                  "delta": _fmt(d, cfg.precision)} for m, lam, e, d in rows]}, fh, indent=2)
            fh.write("\n")
        else:
            fh.write("m\tlambda_m\t15^m*lambda_m\tdelta\n")
            for m, lam, e, d in rows:
                fh.write(f"{m}\t{_fmt(lam, cfg.precision)}\t{_fmt(e, cfg.precision)}\t{_fmt(d, cfg.precision, 6)}\n")
            fh.write(f"lambda2 = {_fmt(seq.limit, cfg.precision)}\n")
    return EXIT_OK


def cmd_extend(args, cfg: RunConfig) -> int:
    m = _level(args, 2)
    values = dec.extend_basis(m) @ np.array(_coeffs(args))
    g = build_graph(m)
    with _output(cfg.out) as fh:
        if cfg.format == "json":
            json.dump({"level": m, "coefficients": list(_coeffs(args)), "values": values.tolist()}, fh)
            fh.write("\n")
        else:
            write_vertices_csv(g, fh, values)
    return EXIT_OK


def cmd_spectrum(args, cfg: RunConfig) -> int:
    cap = cfg.levels or dec.MAX_LEVELS
    table = dec.enumerate_spectrum(args.count, cap, cfg.precision)
    with _output(cfg.out) as fh:
        if cfg.format == "json":
            json.dump([{"eigenvalue": _fmt(v, cfg.precision), "multiplicity": mult, "series": w.series,
                        "birth_level": w.birth_level, "prefix": "".join(map(str, w.prefix))}
                       for v, mult, w in table], fh, indent=2)
            fh.write("\n")
        else:
            fh.write("eigenvalue\tmultiplicity\tseries\tword\n")
            for v, mult, w in table:
                fh.write(f"{_fmt(v, cfg.precision, 30)}\t{mult}\t{w.series}\t{w}\n")
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    levels = 6 if cfg.levels is None else cfg.levels
    try:
        rep = run_suite(args.suite, cfg.depth, levels, cfg.trials, cfg.grid, cfg.seed)
    except dec.ExtensionResidualError as exc:
        # the extension itself contradicts the eigen-equation: a property failure
        rep = Report(args.suite, {"depth": cfg.depth, "levels": levels}, cfg.seed)
        rep.add(PropertyResult("extension_consistency", False, [{"error": str(exc)}]))
    rep.seed = cfg.seed
    with _output(cfg.out) as fh:
        fh.write(rep.to_json(indent=1 if cfg.format == "json" else None))
        fh.write("\n")
    failed = rep.failures()
    print(f"{rep.suite}: {len(rep.results) - len(failed)}/{len(rep.results)} properties hold (seed {cfg.seed})",
          file=sys.stderr)
    for r in failed:
        print(f"FAIL {r.name}: {r.detail}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_PROPERTY


def cmd_export(args, cfg: RunConfig) -> int:
    g = build_graph(_level(args, 1))
    with _output(cfg.out) as fh:
        if args.what == "vertices":
            write_vertices_csv(g, fh)
        else:
            write_edges_csv(g, fh)
    return EXIT_OK


def cmd_plot(args, cfg: RunConfig) -> int:
    m = _level(args, 2)
    c = _coeffs(args)
    values = dec.extend_basis(m) @ np.array(c)
    svg = render_svg(build_graph(m), values, title=f"level {m}, c = {c}")
    with _output(cfg.out) as fh:
        fh.write(svg)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _add_basis(p):
    p.add_argument("basis", nargs="?", choices=sorted(BASES), help="basis function (default u1)")
    p.add_argument("--coeffs", nargs=3, type=float, metavar=("C1", "C2", "C3"),
                   help="plot c1*u1 + c2*u2 + c3*u3 instead of a basis function")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-m", "--levels", type=int, help="level (or number of levels / level cap)")
    common.add_argument("--precision", choices=("double", "high"), default="double")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("text", "csv", "json", "svg"), default="text")

    parser = argparse.ArgumentParser(prog="vicsek", description="Spectral decimation on the Vicsek set.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lambda2", parents=[common], help="estimate the second Neumann eigenvalue")
    p.set_defaults(func=cmd_lambda2)

    p = sub.add_parser("extend", parents=[common], help="extend an eigenfunction to V_m and write CSV")
    _add_basis(p)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("spectrum", parents=[common], help="lowest distinct Neumann eigenvalues")
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", parents=[common], help="run property suites")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", parents=[common], help="write the vertex or edge table of Gamma_m")
    p.add_argument("what", choices=("vertices", "edges"))
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("plot", parents=[common], help="render a function on V_m as SVG")
    _add_basis(p)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        return args.func(args, cfg)
    except (InfrastructureError, LevelCapError, dec.ConvergenceError, dec.ForbiddenEigenvalueError,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFRA


if __name__ == "__main__":
    sys.exit(main())
