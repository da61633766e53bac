"""Command-line front end.

Example::

    unigrav trade.csv --exp-id iso_o --imp-id iso_d --where year=1990 \\
        --theta 5.03 --psi 1.24 --results --gen-X flow_cf --gen-w welfare \\
        --output out.csv --summary run.json

Exit codes: 0 success, 1 validation error, 2 convergence failure, 3 I/O
error. When several groups fail, a validation failure takes precedence over
a convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .domain import Elasticities, Mode, ShiftVectors, SolverConfig, validate_inputs
from .errors import GravityError, NonFiniteError, NotConvergedError, ValidationError
from .ingest import PanelSlice, read_long_csv, read_vector_csv, shock_from_partial, split_groups
from .report import growth_table, render_table, table_to_csv
from .solver import solve_problem
from .statics import compute_statics

EXIT_OK, EXIT_VALIDATION, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3

# flag -> (default column name, kind); kind is "pair" for N x N outputs and
# "origin" for vectors attached to every row of the exporting location
GEN_OPTIONS = {
    "X": ("X_prime", "pair"),
    "x": ("X_hat", "pair"),
    "rp": ("rp", "origin"),
    "y": ("Y_hat", "origin"),
    "p": ("p_hat", "origin"),
    "Pindex": ("P_hat", "origin"),
    "w": ("W_hat", "origin"),
    "q": ("Q_hat", "origin"),
    "rw": ("rw_hat", "origin"),
    "nw": ("nw_hat", "origin"),
}

log = logging.getLogger("unigrav")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="unigrav", description="General-equilibrium counterfactuals for universal "
                 "gravity trade models from a long-format bilateral trade file.")
    ap.add_argument("input", help="CSV file with one row per (origin, destination) pair")
    ap.add_argument("--version", action="version", version=__version__)

    g = ap.add_argument_group("data")
    g.add_argument("--exp-id", default="exp_id", help="origin column (default: exp_id)")
    g.add_argument("--imp-id", default="imp_id", help="destination column (default: imp_id)")
    g.add_argument("--flow", default="flow", help="trade flow column (default: flow)")
    g.add_argument("--partial", default="partial", help="log partial effect column (default: partial)")
    g.add_argument("--by", metavar="COLUMN", help="solve separately for each value of COLUMN")
    g.add_argument("--where", metavar="COL=VALUE", action="append", default=[],
                   help="keep only rows where COL equals VALUE (repeatable)")

    g = ap.add_argument_group("model")
    g.add_argument("--theta", type=float, required=True, help="trade elasticity (> 0)")
    g.add_argument("--psi", type=float, default=0.0, help="supply elasticity (>= 0, default 0)")
    modes = g.add_mutually_exclusive_group()
    modes.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    modes.add_argument("--universal", action="store_true",
                       help="deficit parameters scale with income; enables --xi-hat")
    modes.add_argument("--multiplicative", action="store_true",
                       help="expenditure changes equal income changes")
    g.add_argument("--a-hat", metavar="FILE", help="productivity changes (location,value)")
    g.add_argument("--l-hat", metavar="FILE", help="labor force changes (location,value)")
    g.add_argument("--c-hat", metavar="FILE",
                   help="supply shifter changes; disables welfare and wage outputs")
    g.add_argument("--xi-hat", metavar="FILE", help="deficit parameter changes (universal only)")

    g = ap.add_argument_group("numerics")
    g.add_argument("--tol", type=float, default=1e-12)
    g.add_argument("--max-iter", type=int, default=1_000_000)
    g.add_argument("--damping", type=float, default=1.0,
                   help="weight on the new iterate, in (0, 1] (default 1: no damping)")
    g.add_argument("--jobs", type=int, default=1, help="groups solved concurrently")

    g = ap.add_argument_group("output")
    g.add_argument("--results", action="store_true", help="print the percent-change table")
    g.add_argument("--results-csv", metavar="FILE", help="write the full-precision table(s)")
    g.add_argument("--output", "-o", metavar="FILE",
                   help="long-format CSV with the input rows plus generated columns")
    g.add_argument("--summary", metavar="FILE", help="JSON run summary")
    for key, (default, kind) in GEN_OPTIONS.items():
        what = "pair" if kind == "pair" else "origin-location"
        g.add_argument(f"--gen-{key}", dest=f"gen_{key}", nargs="?", const=default, default=None,
                       metavar="NAME", help=f"{what} column (default name {default})")
    g.add_argument("--quiet", "-q", action="store_true", help="no progress messages")
    return ap


@dataclass
class GroupResult:
    group: Optional[str]
    slice: Optional[PanelSlice] = None
    problem: object = None
    solution: object = None
    statics: object = None
    table: object = None
    error: Optional[str] = None
    code: int = EXIT_OK


def _parse_where(items):
    out = {}
    for it in items:
        if "=" not in it:
            raise ValidationError(f"--where expects COL=VALUE, got {it!r}")
        k, v = it.split("=", 1)
        out[k] = v
    return out


def _mode(args) -> Mode:
    if args.universal:
        return Mode.UNIVERSAL
    if args.multiplicative:
        return Mode.MULTIPLICATIVE
    return Mode(args.mode or "default")


def _solve_group(sl: PanelSlice, args, mode: Mode) -> GroupResult:
    res = GroupResult(sl.group, slice=sl)
    try:
        vec = {k: (read_vector_csv(getattr(args, k), sl.index, k) if getattr(args, k) else None)
               for k in ("a_hat", "l_hat", "c_hat", "xi_hat")}
        shifts = ShiftVectors.build(sl.n, **vec)
        el = Elasticities(args.theta, args.psi)
        cfg = SolverConfig(mode=mode, tol=args.tol, max_iter=args.max_iter, damping=args.damping)
        B = shock_from_partial(sl.partial)
        res.problem = validate_inputs(sl.X, B, el, shifts, cfg)
        res.solution = solve_problem(res.problem)
        res.statics = compute_statics(sl.X, B, el, shifts, res.solution)
        if args.results or args.results_csv:
            st = res.statics
            res.table = growth_table(sl.X, st.X_hat, res.solution, st.Q_hat, st.W_hat, sl.index)
    except NotConvergedError as exc:
        res.solution = exc.solution
        res.error, res.code = str(exc), EXIT_CONVERGENCE
    except NonFiniteError as exc:
        res.error, res.code = str(exc), EXIT_CONVERGENCE
    except OSError as exc:
        res.error, res.code = str(exc), EXIT_IO
    except GravityError as exc:
        res.error, res.code = str(exc), EXIT_VALIDATION
    return res


def _fmt(v) -> str:
    return "" if v is None or not np.isfinite(v) else repr(float(v))


def _group_label(g):
    return "(all)" if g is None else str(g)


_SOURCES = {
    "X": lambda sol, st: st.X_prime,
    "x": lambda sol, st: st.X_hat,
    "rp": lambda sol, st: st.rp,
    "y": lambda sol, st: st.Y_hat,
    "p": lambda sol, st: sol.p_hat,
    "Pindex": lambda sol, st: sol.P_hat,
    "w": lambda sol, st: st.W_hat,
    "q": lambda sol, st: st.Q_hat,
    "rw": lambda sol, st: st.rw_hat,
    "nw": lambda sol, st: st.nw_hat,
}


def _write_output(path, args, records, raw, fieldnames, results):
    gens = [(k, getattr(args, f"gen_{k}")) for k in GEN_OPTIONS if getattr(args, f"gen_{k}")]
    header = fieldnames + [n for _, n in gens if n not in fieldnames]
    by_group = {r.group: r for r in results if r.statics is not None}
    positions = {g: {lab: k for k, lab in enumerate(r.slice.index.labels)}
                 for g, r in by_group.items()}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row, rec in zip(raw, records):
            out = dict(row)
            for _, name in gens:
                out[name] = ""
            res = by_group.get(rec.group) if rec is not None else None
            if res is not None:
                pos = positions[rec.group]
                i, j = pos[rec.origin], pos[rec.destination]
                for key, name in gens:
                    val = _SOURCES[key](res.solution, res.statics)
                    if val is not None:
                        out[name] = _fmt(val[i, j] if GEN_OPTIONS[key][1] == "pair" else val[i])
            w.writerow([out.get(c, "") for c in header])


def _summary(args, mode, results) -> dict:
    groups = []
    for r in results:
        d = {"group": r.group, "status": "ok" if r.code == EXIT_OK else "error",
             "theta": args.theta, "psi": args.psi, "mode": mode.value}
        if r.slice is not None:
            d["N"] = r.slice.n
            d["labels"] = list(r.slice.index.labels)
        if r.solution is not None:
            s = r.solution
            d.update(crit=s.crit, n_iter=s.n_iter, Xi_hat=s.Xi_hat, converged=s.converged)
        if r.error:
            d["error"] = r.error
        groups.append(d)
    return {"groups": groups}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    logging.basicConfig(level=logging.WARNING, format="%(message)s")

    def progress(msg):
        if not args.quiet:
            print(msg, file=sys.stderr)

    try:
        mode = _mode(args)
        if args.xi_hat and mode is not Mode.UNIVERSAL:
            raise ValidationError("--xi-hat must be combined with --universal")
        if args.c_hat and (args.a_hat or args.l_hat):
            raise ValidationError("--c-hat cannot be combined with --a-hat or --l-hat")
        gens = [k for k in GEN_OPTIONS if getattr(args, f"gen_{k}")]
        if gens and not args.output:
            raise ValidationError("--gen-* options need --output FILE")
        Elasticities(args.theta, args.psi)
        where = _parse_where(args.where)
        cols = {"exp_id": args.exp_id, "imp_id": args.imp_id, "flow": args.flow,
                "partial": args.partial}
        progress("sorting...")
        records, raw, fieldnames = read_long_csv(args.input, cols, args.by, where)
    except OSError as exc:
        print(f"unigrav: {exc}", file=sys.stderr)
        return EXIT_IO
    except GravityError as exc:
        print(f"unigrav: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    kept = [r for r in records if r is not None]
    if not kept:
        print("unigrav: no rows selected", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        parts = split_groups(kept, strict=False)
    except ValidationError as exc:
        print(f"unigrav: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    progress("solving...")
    for name in ("a_hat", "l_hat", "c_hat", "xi_hat"):
        if getattr(args, name):
            progress(f"Using custom {name}.")
    todo = [(g, s) for g, s in parts]

    def work(item):
        g, s = item
        if isinstance(s, Exception):
            return GroupResult(g, error=str(s), code=EXIT_VALIDATION)
        return _solve_group(s, args, mode)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(work, todo))

    for r in results:
        if r.error:
            print(f"unigrav: group {_group_label(r.group)}: {r.error}", file=sys.stderr)
    if any(r.code == EXIT_OK for r in results):
        progress("solved!")

    if args.results:
        for r in results:
            if r.table is None:
                continue
            if args.by:
                print(f"\n{args.by} = {r.group}")
            print()
            print(render_table(r.table), end="")
    try:
        if args.results_csv:
            with open(args.results_csv, "w", encoding="utf-8", newline="") as fh:
                for r in results:
                    if r.table is None:
                        continue
                    if args.by:
                        fh.write(f"# {args.by}={r.group}\n")
                    fh.write(table_to_csv(r.table))
        if args.output:
            _write_output(args.output, args, records, raw, fieldnames, results)
        if args.summary:
            with open(args.summary, "w", encoding="utf-8") as fh:
                json.dump(_summary(args, mode, results), fh, indent=2, sort_keys=True)
                fh.write("\n")
    except OSError as exc:
        print(f"unigrav: {exc}", file=sys.stderr)
        return EXIT_IO

    codes = {r.code for r in results}
    for code in (EXIT_IO, EXIT_VALIDATION, EXIT_CONVERGENCE):
        if code in codes:
            return code
    return EXIT_OK


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
