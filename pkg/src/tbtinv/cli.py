"""Command-line interface: ``tbtinv <command> [options]``.

Exit status is 0 when every pass flag of every report is true, 1 when a
check failed or an input was rejected, 2 for usage and file-format errors,
and 3 when a computational stage failed.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields

import numpy as np

from . import io
from .extraction import extract_g
from .linalg import condition_estimate
from .reconstruction import GridConfig, recover_r_detailed
from .symbol import random_symbol
from .theta import IntegrityError, pfaffian_leading_coefficient, theta_poly
from .verify import (
    CHECKS,
    ReconstructionReport,
    StageError,
    Tolerances,
    characterize,
    invariant_suite,
    random_g12,
    roundtrip,
)
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_STAGE = 0, 1, 2, 3


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _tol_override(text):
    name, sep, value = text.partition("=")
    names = {f.name for f in fields(Tolerances)}
    if not sep or name not in names:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE with NAME in {sorted(names)}")
    try:
        return name, (int(value) if name in ("samples", "seed") else float(value))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value for {name}: {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print report JSON on stdout")
    common.add_argument("--out", help="output file")
    common.add_argument(
        "--tol", action="append", type=_tol_override, default=[], metavar="NAME=VALUE",
        help="override one tolerance (repeatable)",
    )
    grid = common.add_argument_group("grid")
    grid.add_argument("--grid-radius-lambda", type=float, default=GridConfig.radius_lambda)
    grid.add_argument("--grid-radius-mu", type=float, default=GridConfig.radius_mu)
    grid.add_argument("--collision", type=float, default=GridConfig.collision)
    grid.add_argument("--max-redraws", type=int, default=GridConfig.max_redraws)

    gen_opts = argparse.ArgumentParser(add_help=False)
    gen_opts.add_argument("--m", type=_positive_int, default=1)
    gen_opts.add_argument("--n", type=_positive_int, default=1)
    gen_opts.add_argument("--seed", type=int, default=0)
    gen_opts.add_argument("--dominance", type=float, default=4.0)

    batch = argparse.ArgumentParser(add_help=False)
    batch.add_argument("--count", type=_positive_int, default=1, help="run seeds seed..seed+count-1")
    batch.add_argument("--workers", type=_positive_int, default=1, help="worker processes for batches")

    parser = argparse.ArgumentParser(prog="tbtinv", description="Toeplitz-block-Toeplitz inversion from g12.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common, gen_opts], help="write a random symbol file")
    p = sub.add_parser("extract", parents=[common], help="symbol file -> gpair file")
    p.add_argument("--symbol", required=True)
    p = sub.add_parser("reconstruct", parents=[common], help="gpair file -> R matrix file")
    p.add_argument("--gpair", required=True)
    p.add_argument("--report", help="also write the report to this file")
    p = sub.add_parser("characterize", parents=[common, gen_opts, batch],
                       help="test that R^{-1} is TBT for a gpair file or random g12")
    p.add_argument("--gpair")
    p = sub.add_parser("roundtrip", parents=[common, gen_opts, batch],
                       help="symbol -> g12 -> R, compared with the dense inverse")
    p.add_argument("--symbol")
    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--symbol")
    p.add_argument("--gpair")
    p.add_argument("--checks", help=f"comma-separated subset of {','.join(CHECKS)}")
    return parser


def _tolerances(args) -> Tolerances:
    return Tolerances(**dict(args.tol))


def _grid(args) -> GridConfig:
    return GridConfig(
        radius_lambda=args.grid_radius_lambda,
        radius_mu=args.grid_radius_mu,
        collision=args.collision,
        max_redraws=args.max_redraws,
    )


def _summary(rep: ReconstructionReport) -> str:
    head = f"{rep.workflow} m={rep.m} n={rep.n}: {'PASS' if rep.ok else rep.status.upper() if rep.status != 'ok' else 'FAIL'}"
    lines = [head]
    if rep.stage:
        lines.append(f"  stage {rep.stage}: {rep.message}")
    for key, value in rep.to_dict().items():
        if key.startswith("pass") or key in ("workflow", "m", "n", "status", "stage", "message") or value == "n/a":
            continue
        lines.append(f"  {key} = {value}")
    for name, flag in rep.passes.items():
        lines.append(f"  [{'ok' if flag else 'FAIL'}] {name}")
    return "\n".join(lines)


def _emit(args, reports: list[ReconstructionReport], path=None) -> int:
    payload = [r.to_dict() for r in reports]
    doc = payload[0] if len(payload) == 1 else payload
    if path:
        io.write_json(path, doc)
    if args.json:
        print(io.dumps(doc))
    else:
        for r in reports:
            print(_summary(r))
        if len(reports) > 1:
            good = sum(r.ok for r in reports)
            print(f"{good}/{len(reports)} passed")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def _roundtrip_job(job):
    sym, tol, grid = job
    try:
        return roundtrip(sym, tol, grid)
    except StageError as exc:
        rep = ReconstructionReport("roundtrip", sym.m, sym.n, status="failed", stage=exc.stage, message=str(exc))
        return rep


def _characterize_job(job):
    g12, m, n, tol, grid = job
    return characterize(g12, m, n, tol, grid)


def _run(fn, jobs, workers):
    if workers == 1 or len(jobs) == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def cmd_gen(args):
    sym = random_symbol(args.m, args.n, seed=args.seed, dominance=args.dominance)
    doc = io.symbol_to_dict(sym)
    if args.out:
        io.write_json(args.out, doc)
    else:
        print(io.dumps(doc))
    return EXIT_OK


def cmd_extract(args):
    sym = io.read_symbol(args.symbol)
    try:
        gp = extract_g(sym, max_condition=_tolerances(args).max_condition_t)
    except np.linalg.LinAlgError as exc:
        raise StageError("inverse", exc) from exc
    doc = io.gpair_to_dict(gp)
    if args.out:
        io.write_json(args.out, doc)
    else:
        print(io.dumps(doc))
    return EXIT_OK


def cmd_reconstruct(args):
    gp = io.read_gpair(args.gpair)
    try:
        theta = theta_poly(gp)
    except (IntegrityError, np.linalg.LinAlgError) as exc:
        raise StageError("theta", exc) from exc
    try:
        rec = recover_r_detailed(gp, theta, _grid(args))
    except np.linalg.LinAlgError as exc:
        raise StageError("recover", exc) from exc
    rep = ReconstructionReport("reconstruct", gp.m, gp.n)
    rep.theta_leading_coeff = pfaffian_leading_coefficient(gp)
    rep.condition_r = condition_estimate(rec.r)
    rep.branch_used, rep.grid_attempts = rec.p, rec.attempts
    rep.passes = {"recovered": True}
    if args.out:
        io.write_json(args.out, io.cmatrix_to_dict(rec.r))
    return _emit(args, [rep], args.report)


def cmd_characterize(args):
    tol, grid = _tolerances(args), _grid(args)
    if args.gpair:
        gp = io.read_gpair(args.gpair)
        jobs = [(gp.g12, gp.m, gp.n, tol, grid)]
    else:
        jobs = [(random_g12(args.m, args.n, s), args.m, args.n, tol, grid)
                for s in range(args.seed, args.seed + args.count)]
    return _emit(args, _run(_characterize_job, jobs, args.workers), args.out)


def cmd_roundtrip(args):
    tol, grid = _tolerances(args), _grid(args)
    if args.symbol:
        syms = [io.read_symbol(args.symbol)]
    else:
        syms = [random_symbol(args.m, args.n, seed=s, dominance=args.dominance)
                for s in range(args.seed, args.seed + args.count)]
    if len(syms) == 1:
        rep = roundtrip(syms[0], tol, grid)
        return _emit(args, [rep], args.out)
    reports = _run(_roundtrip_job, [(s, tol, grid) for s in syms], args.workers)
    code = _emit(args, reports, args.out)
    return EXIT_STAGE if any(r.status == "failed" for r in reports) else code


def cmd_verify(args):
    if not (args.symbol or args.gpair):
        raise io.FormatError("arguments", "verify needs --symbol and/or --gpair")
    sym = io.read_symbol(args.symbol) if args.symbol else None
    gp = io.read_gpair(args.gpair) if args.gpair else None
    if sym is not None and gp is not None and (sym.m, sym.n) != (gp.m, gp.n):
        raise io.FormatError("m/n", "symbol and gpair sizes differ")
    selection = [c.strip() for c in args.checks.split(",")] if args.checks else None
    if selection is not None and not set(selection) <= set(CHECKS):
        raise io.FormatError("--checks", f"unknown checks {sorted(set(selection) - set(CHECKS))}")
    rep = invariant_suite(sym, gp, selection, _tolerances(args), _grid(args))
    return _emit(args, [rep], args.out)


COMMANDS = {
    "gen": cmd_gen,
    "extract": cmd_extract,
    "reconstruct": cmd_reconstruct,
    "characterize": cmd_characterize,
    "roundtrip": cmd_roundtrip,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except io.FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"error: stage failed {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
