"""Command-line driver: ``fpc <command> [flags]``.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 shape, 4 too few results, 5 singular subset.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import codes, folded, sim
from .errors import (
    FieldTooSmall,
    FormatError,
    FPCError,
    IndivisibleShape,
    InsufficientResults,
    PointSelectionFailed,
    ShapeMismatch,
    SingularRecoverySubset,
    StragglerOverload,
)
from .field import FieldSpec
from .linalg import DenseMatrix, read_matrix, write_matrix

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SHAPE, EXIT_INSUFFICIENT, EXIT_SINGULAR = range(6)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def int_list(text: str) -> list[int]:
    """'3', '1,4,5' or an inclusive range '0:10'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            a, b = part.split(":", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _field(text: str) -> FieldSpec:
    try:
        return FieldSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _latency(args, straggler_ids=()) -> sim.LatencyModel:
    slowdown = math.inf if args.fail_stop else args.slowdown
    return sim.LatencyModel(args.base_unit, frozenset(straggler_ids), slowdown, args.jitter, args.seed)


def _add_latency_flags(sp):
    sp.add_argument("--slowdown", type=float, default=5.0)
    sp.add_argument("--fail-stop", action="store_true", help="stragglers never answer")
    sp.add_argument("--jitter", type=float, default=0.0)
    sp.add_argument("--base-unit", type=float, default=1.0)


def _instance(scheme, m, p, N, spec, seed, budget):
    params = codes.CodeParams(scheme, m, p, N, spec)
    return codes.select_points(params, seed=seed, verify_budget=budget)


def cmd_multiply(args, out):
    A = read_matrix(args.input)
    if args.field is not None and args.field != A.spec:
        raise UsageError(f"--field {args.field} does not match the input matrix ({A.spec})")
    if not args.pad and (A.rows % args.m or A.cols % args.p):
        raise IndivisibleShape(f"{A.rows}x{A.cols} matrix is not divisible into {args.m}x{args.p} blocks")
    if args.manifest:
        inst = codes.read_manifest(args.manifest)
        prm = inst.params
        if (prm.scheme, prm.m, prm.p, prm.N, prm.spec) != (args.scheme, args.m, args.p, args.workers, A.spec):
            raise UsageError("manifest disagrees with --scheme/--m/--p/--workers or the matrix field")
    else:
        inst = _instance(args.scheme, args.m, args.p, args.workers, A.spec, args.seed, args.verify_budget)
    if args.straggler_ids is not None:
        ids = int_list(args.straggler_ids)
    else:
        ids = sim.choose_stragglers(args.workers, args.stragglers, args.seed)
    C, report = sim.run_distributed(A, inst, _latency(args, ids))
    if args.out:
        write_matrix(args.out, C)
    if args.report:
        sim.append_csv(args.report, [report.csv_row()])
    if not args.out and not args.report:
        out.write(sim.rows_to_csv([report.csv_row()]))
    return EXIT_OK


def cmd_threshold(args, out):
    out.write(f"{codes.recovery_threshold(args.scheme, args.m, args.p)}\n")
    return EXIT_OK


def cmd_dims(args, out):
    dp, dm = folded.span_dims(args.m, args.p, args.char)
    out.write(f"{dp},{dm}\n")
    return EXIT_OK


def cmd_chains(args, out):
    cs = folded.build_chain_structure(args.m, args.p)
    for (a, b), seq in cs.loops.items():
        tag = "special-loop" if (a, b) == cs.special_key else "loop"
        out.write(f"{tag} {a},{b}: " + " ".join(folded.format_triple(y) for y in seq) + "\n")
    for seq in cs.single_chains:
        out.write(f"chain 0,0,{seq[0][2]}: " + " ".join(folded.format_triple(y) for y in seq) + "\n")
    return EXIT_OK


def cmd_verify_points(args, out):
    inst = _instance(args.scheme, args.m, args.p, args.workers, args.field, args.seed, args.verify_budget)
    text = codes.manifest_text(inst)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_sweep(args, out):
    A = read_matrix(args.input)
    insts = []
    for scheme in args.schemes.split(","):
        scheme = scheme.strip()
        m = 1 if scheme == "matdot" else args.m
        insts.append(_instance(scheme, m, args.p, args.workers, A.spec, args.seed, args.verify_budget))
    rows = sim.sweep_stragglers(A, insts, int_list(args.s_range), _latency(args))
    return _emit(rows, args.out, out)


def cmd_cond(args, out):
    rows = sim.condition_sweep(int_list(args.p_range), args.s, trials=args.trials,
                               point_mode=args.point_mode, scheme=args.scheme, seed=args.seed)
    return _emit(rows, args.out, out)


def _emit(rows, path, out):
    if path:
        sim.append_csv(path, rows)
    else:
        out.write(sim.rows_to_csv(rows))
    return EXIT_OK


def cmd_gen_matrix(args, out):
    spec = args.field
    rng = np.random.default_rng(args.seed)
    try:
        data = spec.random_array((args.rows, args.cols), rng, args.dist)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_matrix(args.out, DenseMatrix(spec, data, normalized=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fpc", description="Folded polynomial codes for straggler-tolerant AA^T.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("multiply", help="encode, simulate workers, decode AA^T")
    sp.add_argument("--input", required=True)
    sp.add_argument("--scheme", choices=codes.SCHEMES, default="fpc")
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--workers", type=int, required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--stragglers", type=int, default=0)
    g.add_argument("--straggler-ids", default=None, help="comma list of worker ids")
    sp.add_argument("--field", type=_field, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--report")
    sp.add_argument("--manifest", help="reuse a point set written by verify-points")
    sp.add_argument("--verify-budget", type=int, default=10_000)
    sp.add_argument("--pad", action="store_true", help="zero-pad indivisible shapes")
    _add_latency_flags(sp)
    sp.set_defaults(func=cmd_multiply)

    sp = sub.add_parser("threshold", help="print the recovery threshold")
    sp.add_argument("--scheme", choices=codes.SCHEMES, default="fpc")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.set_defaults(func=cmd_threshold)

    sp = sub.add_parser("dims", help="print dim_plus,dim_minus")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--char", type=int, default=0, help="field characteristic (0 for Q/R)")
    sp.set_defaults(func=cmd_dims)

    sp = sub.add_parser("chains", help="list loops and single chains")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.set_defaults(func=cmd_chains)

    sp = sub.add_parser("verify-points", help="select and verify evaluation points, print manifest")
    sp.add_argument("--scheme", choices=codes.SCHEMES, default="fpc")
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--workers", type=int, required=True)
    sp.add_argument("--field", type=_field, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--verify-budget", type=int, default=10_000)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify_points)

    sp = sub.add_parser("sweep", help="overall time vs straggler count (CSV)")
    sp.add_argument("--input", required=True)
    sp.add_argument("--schemes", default="fpc,matdot")
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--workers", type=int, required=True)
    sp.add_argument("--s-range", default="0", help="e.g. 0:10 or 0,2,4")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--verify-budget", type=int, default=200)
    sp.add_argument("--out")
    _add_latency_flags(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("cond", help="worst condition number vs p (CSV)")
    sp.add_argument("--p-range", default="2:10")
    sp.add_argument("--s", type=int, default=1)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--point-mode", choices=("chebyshev", "random_best_of_20"), default="random_best_of_20")
    sp.add_argument("--scheme", choices=("fpc", "matdot"), default="fpc")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_cond)

    sp = sub.add_parser("gen-matrix", help="write a seeded random matrix file")
    sp.add_argument("--rows", type=int, required=True)
    sp.add_argument("--cols", type=int, required=True)
    sp.add_argument("--dist", choices=("gaussian", "uniform", "integers"), default="uniform")
    sp.add_argument("--field", type=_field, default=FieldSpec.real64())
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_matrix)
    return ap


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (UsageError, FieldTooSmall)):
        return EXIT_USAGE
    if isinstance(exc, (OSError, FormatError)):
        return EXIT_IO
    if isinstance(exc, (IndivisibleShape, ShapeMismatch)):
        return EXIT_SHAPE
    if isinstance(exc, (InsufficientResults, StragglerOverload)):
        return EXIT_INSUFFICIENT
    if isinstance(exc, (SingularRecoverySubset, PointSelectionFailed)):
        return EXIT_SINGULAR
    return EXIT_USAGE


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except (UsageError, OSError, FPCError, ValueError) as exc:
        name = "UsageError" if isinstance(exc, (UsageError, ValueError)) and not isinstance(exc, FPCError) else type(exc).__name__
        err.write(f"error: {name}: {exc}\n")
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
