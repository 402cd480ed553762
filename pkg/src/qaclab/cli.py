"""Command-line entry point.

Exit codes: 0 all checks passed, 1 a check failed, 2 bad usage or parameters,
3 file read/write failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .circuit import CircuitError, loads
from .experiments import VERIFIERS, ExperimentConfig, default_suite, report_bundle, run_verification, write_atomic
from .fourier import FourierError, extract_fc, spectrum_csv, wgk, wht
from .majority import MajorityError, majority_report, rows_to_csv, weak_copy_report, weak_copy_table
from .report import dumps
from .sim import SimulationError
from .states import NamedStateSpec, build_state, felinity, state_from_dict

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class IOFailure(Exception):
    pass


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc


def _emit_report(rep, out: str | None) -> int:
    text = rep.to_json()
    sys.stdout.write(text)
    if out:
        _write(Path(out) / f"{rep.lemma_id}-seed{rep.seed}.json", text)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _write(path: Path, text: str) -> None:
    try:
        write_atomic(path, text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def cmd_fourier(args) -> int:
    try:
        text = Path(args.circuit).read_text()
    except OSError as exc:
        raise IOFailure(f"cannot read {args.circuit}: {exc}") from exc
    circuit = loads(text)
    spec = wht(extract_fc(circuit))
    sys.stdout.write(spectrum_csv(spec))
    if args.level is not None:
        print(f"W>={args.level},{wgk(spec, args.level):.17g}")
    return EXIT_OK


def cmd_felinity(args) -> int:
    if args.state:
        state = state_from_dict(_read_json(args.state))
    else:
        state = build_state(NamedStateSpec.parse(args.named))
    print(f"{felinity(state):.17g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.list:
        for lemma, (desc, _) in VERIFIERS.items():
            print(f"{lemma:14s} {desc}")
        return EXIT_OK
    if args.lemma_id is None:
        raise SimulationError("verify needs a lemma id (or --list)")
    if args.lemma_id not in VERIFIERS:
        raise SimulationError(f"unknown lemma id {args.lemma_id!r}; see verify --list")
    extra = {}
    if args.blocks is not None:
        extra["blocks"] = args.blocks
    cfg = ExperimentConfig(args.lemma_id, n=args.n, k=args.k, t=args.t, a=args.a, d=args.d,
                           seed=args.seed, count=args.count, tol=args.tol, extra=extra)
    return _emit_report(run_verification(cfg), args.out)


def cmd_majority(args) -> int:
    rep, res = majority_report(args.n, args.a, args.d, args.c_prime)
    if args.csv:
        _write(Path(args.csv), rows_to_csv(res.table()))
    return _emit_report(rep, args.out)


def cmd_weak_copy(args) -> int:
    if args.csv:
        _write(Path(args.csv), rows_to_csv(weak_copy_table(args.n, [args.t])))
    return _emit_report(weak_copy_report(args.n, args.t), args.out)


def cmd_report(args) -> int:
    configs = default_suite() if args.all else []
    summary = report_bundle(configs, Path(args.out), jobs=args.jobs, tables=args.all)
    sys.stdout.write(dumps({k: summary[k] for k in ("runs", "passed_runs", "passed")}))
    return EXIT_OK if summary["passed"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qaclab", description="Checks for constant-depth reflection circuits.")
    p.add_argument("--version", action="version", version=f"qaclab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fourier", help="Fourier spectrum of a circuit's output function")
    f.add_argument("circuit", help="circuit JSON file")
    f.add_argument("--level", type=int, help="also print the weight at this level and above")
    f.set_defaults(func=cmd_fourier)

    fe = sub.add_parser("felinity", help="felinity of a state")
    src = fe.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", help="state JSON file")
    src.add_argument("--named", help="dicke:n,k | w:n | cat:n | rotw:n,beta | basis:bits | eps:n,eps | oddmix:n")
    fe.set_defaults(func=cmd_felinity)

    v = sub.add_parser("verify", help="run one lemma check")
    v.add_argument("lemma_id", nargs="?")
    v.add_argument("--list", action="store_true", help="list lemma ids")
    v.add_argument("--n", type=int)
    v.add_argument("--k", type=int)
    v.add_argument("--t", type=float)
    v.add_argument("--a", type=float)
    v.add_argument("--d", type=float, default=8.0)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int, help="corpus size or grid size")
    v.add_argument("--blocks", type=int, help="partition: fix the block count")
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--out", help="directory for the JSON report")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("majority", help="threshold-ladder majority correlation")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--a", type=float, required=True)
    m.add_argument("--d", type=float, default=8.0)
    m.add_argument("--c-prime", type=float, default=1.0)
    m.add_argument("--csv", help="write the per-weight agreement table")
    m.add_argument("--out")
    m.set_defaults(func=cmd_majority)

    w = sub.add_parser("weak-copy", help="weak-copy test law against simulation")
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--t", type=float, required=True)
    w.add_argument("--csv")
    w.add_argument("--out")
    w.set_defaults(func=cmd_weak_copy)

    r = sub.add_parser("report", help="run a suite and write a report bundle")
    r.add_argument("--all", action="store_true", help="run the default suite")
    r.add_argument("--out", required=True)
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CircuitError, SimulationError, FourierError, MajorityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
