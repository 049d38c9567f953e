"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 unreadable instance or config,
3 solver backend failure, 4 verification or cross-check mismatch.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from cpds.bench import ConfigError, RunConfig, cached_k_star, cross_check, run_benchmark
from cpds.formulations import Formulation, Options, build
from cpds.instance import InstanceFormatError, format_instance, grid_like_instance, read_instance
from cpds.milp import BackendError, Limits, to_lp
from cpds.oracle import OracleSizeError, brute_force_cpds, brute_force_pds
from cpds.oracle import k_star as oracle_k_star
from cpds.propagation import monitored_set
from cpds.solver import VerificationError, solve_cpds

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_BACKEND, EXIT_MISMATCH = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rho_text(inst, rho) -> str:
    parts = []
    for u, vs in rho.assignment.items():
        parts.append(f"{inst.label(u)}->{{{','.join(inst.label(v) for v in sorted(vs))}}}")
    return " ".join(parts) if parts else "(none)"


def cmd_solve(args) -> int:
    inst = read_instance(args.file, capacity=args.k)
    kind = Formulation.parse(args.model)
    opts = Options(args.inp, args.outp, args.init2)
    if opts != Options() and kind not in (Formulation.FPS, Formulation.EFPS):
        raise UsageError(f"--inp/--outp/--init2 only apply to FPS-IP and EFPS-IP, not {kind.value}")
    rep = solve_cpds(inst, kind, opts, Limits(args.time_limit, seed=args.seed),
                     backend=args.backend, mode=args.mode, seed=args.seed)
    print(f"instance   {inst.name} (n={inst.n}, m={inst.m}, k={inst.capacity})")
    print(f"model      {rep.model}")
    print(f"status     {rep.status}")
    print(f"objective  {rep.objective if rep.objective is not None else 'NA'}")
    print(f"bound      {rep.bound if rep.bound is not None else 'NA'}")
    print(f"gap        {rep.gap if rep.gap is not None else 'NA'}")
    print(f"time       {rep.time_s:.3f}s (separation {rep.sep_time_s:.3f}s)")
    print(f"rows       {rep.init_rows} initial, {rep.lazy_rows} lazy; {rep.vars} variables")
    print(f"verified   {'yes' if rep.verified else 'no'}")
    if rep.rho is not None:
        print(f"placement  {_rho_text(inst, rep.rho)}")
        if args.trace:
            print(monitored_set(inst, rep.rho).dump(inst))
    if args.lp_out:
        model = build(inst, kind, opts, seed=args.seed)
        lazy = rep.added_rows if rep.components == 1 else []
        Path(args.lp_out).write_text(to_lp(model, lazy))
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = read_instance(args.file, capacity=args.k if args.k is not None else 0)
    res = brute_force_pds(inst, args.max_n) if args.k is None else brute_force_cpds(inst, args.max_n)
    print(f"optimum    {res.optimum}")
    print(f"witness    {_rho_text(inst, res.witness)}")
    print(f"nodes      {res.nodes}")
    return EXIT_OK


def cmd_kstar(args) -> int:
    inst = read_instance(args.file)
    if args.oracle:
        value = oracle_k_star(inst)
    else:
        value = cached_k_star(inst, Path(args.file), backend=args.backend, time_limit=args.time_limit)
    print(value)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = RunConfig.load(args.config)
    if args.output:
        cfg.output = Path(args.output)
    run_benchmark(cfg)
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = RunConfig.load(args.config)
    rep = cross_check(cfg)
    print(f"checked {rep.checked} (instance, k) pairs, {rep.oracle_checked} against the oracle")
    for d in rep.disagreements:
        print(f"MISMATCH {d}")
    return EXIT_OK if rep.ok else EXIT_MISMATCH


def cmd_generate(args) -> int:
    inst = grid_like_instance(args.rows, args.cols, seed=args.seed, zero_fraction=args.zero_fraction)
    text = format_instance(inst, f"grid-like {args.rows}x{args.cols} seed {args.seed}")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cpds", description="Exact solvers for the capacitated power dominating set problem.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log more (repeatable)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("file")
    s.add_argument("--k", type=int, required=True, help="capacity")
    s.add_argument("--model", default="EFPS-IP", help="FPS-IP, EFPS-IP, BRI-IP, JOV-IP or FORT-IP")
    s.add_argument("--inp", action="store_true", help="add incoming-propagation rows")
    s.add_argument("--outp", action="store_true", help="add outgoing-propagation rows")
    s.add_argument("--init2", action="store_true", help="add all rows from 2-cycles up front")
    s.add_argument("--time-limit", type=float, default=None, help="seconds")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--backend", default="scip", choices=["scip", "scip-lite", "highs"])
    s.add_argument("--mode", default="auto", choices=["auto", "callback", "iterative"])
    s.add_argument("--lp-out", help="write the model (with lazy rows found) as an LP file")
    s.add_argument("--trace", action="store_true", help="print the rule applications")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="brute-force optimum of a small instance")
    o.add_argument("file")
    o.add_argument("--k", type=int, default=None, help="capacity (omit for the uncapacitated optimum)")
    o.add_argument("--max-n", type=int, default=12)
    o.set_defaults(func=cmd_oracle)

    k = sub.add_parser("kstar", help="smallest capacity reaching the uncapacitated optimum")
    k.add_argument("file")
    k.add_argument("--oracle", action="store_true", help="use brute force instead of the MILP")
    k.add_argument("--backend", default="scip", choices=["scip", "scip-lite", "highs"])
    k.add_argument("--time-limit", type=float, default=None)
    k.set_defaults(func=cmd_kstar)

    b = sub.add_parser("bench", help="run a benchmark configuration")
    b.add_argument("config")
    b.add_argument("--output", help="override the CSV path")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("check", help="cross-check models against each other and the oracle")
    c.add_argument("config")
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("generate", help="write a synthetic grid-like instance")
    g.add_argument("--rows", type=int, default=10)
    g.add_argument("--cols", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--zero-fraction", type=float, default=0.25)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, OracleSizeError) as exc:
        print(f"cpds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # unknown model names and similar come through as ValueError
        if isinstance(exc, (InstanceFormatError, ConfigError)):
            print(f"cpds: {exc}", file=sys.stderr)
            return EXIT_PARSE
        print(f"cpds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cpds: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BackendError as exc:
        print(f"cpds: backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except VerificationError as exc:
        print(f"cpds: verification failed: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
