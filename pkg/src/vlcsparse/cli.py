"""Command-line front end: generate, solve, benchmark and certify.

Subcommands

  gen    write a problem file (plus truth sidecar for random instances)
  solve  run the capped solver or a baseline on a problem file
  bench  sweep (seeds x methods x parameters) into a CSV report
  check  print the stationarity certificate of a point

Exit codes: 0 success / point accepted, 2 invalid parameters, 3 solver did
not converge, 4 infeasible instance, 5 point rejected by the membership
test of ``check``.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .alm import AlmConfig
from .bench import (
    BenchConfig,
    NU_GRID_DEFAULT,
    baseline_irl1,
    baseline_l1,
    report_row,
    run_bench,
    write_csv,
)
from .core import (
    read_problem,
    read_truth,
    residual_res,
    write_problem,
    write_truth,
)
from .errors import (
    InfeasibleError,
    NonconvergenceError,
    ParameterError,
    PreconditionError,
    VlcsparseError,
)
from .generators import MarketSpec, RandomVlcsSpec, example31_fixture, gen_market_vlcs, gen_random_vlcs
from .outer import OuterConfig, solve_sparse
from .stationarity import certify_point, format_certificate, lifted_residual

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONV = 3
EXIT_INFEASIBLE = 4
EXIT_NOT_IN_S = 5


def _float_list(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _int_list(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


def build_parser():
    ap = argparse.ArgumentParser(prog="vlcsparse", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    kind = g.add_mutually_exclusive_group(required=True)
    kind.add_argument("--random", action="store_true")
    kind.add_argument("--market", action="store_true")
    kind.add_argument("--fixture", action="store_true")
    g.add_argument("--m", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--nnz", type=int)
    g.add_argument("--s", type=int, help="|I_G| = |I_H| of the planted solution")
    g.add_argument("--overlap", type=int, help="|I_00| of the planted solution")
    g.add_argument("--n1", type=int, help="producers (market)")
    g.add_argument("--m1", type=int, help="products (market)")
    g.add_argument("--nu", type=float, default=0.2, help="fixture cap width")
    g.add_argument("--sigma", type=float, default=0.1, help="fixture relaxation")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--compat-paper-bd", action="store_true",
                   help="use the literal doubling rule for inactive rows of b, d")
    g.add_argument("--out", required=True, help="output path prefix")

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("problem", help="problem file (VLCS text format)")
    s.add_argument("--method", choices=("capped", "l1", "irl1"), default="capped")
    s.add_argument("--nu", type=float, default=0.004)
    s.add_argument("--K", type=int, default=20)
    s.add_argument("--p", type=float, default=0.5, help="exponent for irl1")
    s.add_argument("--truth", help="truth sidecar for matched-zero counts")
    s.add_argument("--sigma-cap", type=float, default=1e3)
    s.add_argument("--max-outer", type=int, default=20)
    s.add_argument("--out", help="write a one-row CSV report here")
    s.add_argument("--format", choices=("csv", "human"), default="human")

    b = sub.add_parser("bench", help="benchmark sweep into CSV")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--random", action="store_true")
    src.add_argument("--market", action="store_true")
    src.add_argument("--problem", help="fixed problem file")
    b.add_argument("--m", type=int, default=50)
    b.add_argument("--n", type=int, default=100)
    b.add_argument("--nnz", type=int, default=30)
    b.add_argument("--s", type=int, default=30)
    b.add_argument("--overlap", type=int, default=10)
    b.add_argument("--n1", type=int, default=5)
    b.add_argument("--m1", type=int, default=10)
    b.add_argument("--truth", help="truth sidecar for --problem")
    b.add_argument("--seeds", type=_int_list, required=True)
    b.add_argument("--nu-list", type=_float_list, default=NU_GRID_DEFAULT)
    b.add_argument("--p-list", type=_float_list, default=(0.5,))
    b.add_argument("--K", type=int, default=20)
    b.add_argument("--methods", default="capped,l1",
                   help="comma list from {capped,l1,irl1}")
    b.add_argument("--sigma-cap", type=float, default=1e3)
    b.add_argument("--max-outer", type=int, default=20)
    b.add_argument("--compat-paper-bd", action="store_true")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", required=True)

    c = sub.add_parser("check", help="stationarity certificate of a point")
    c.add_argument("problem")
    c.add_argument("point", nargs="?", help="point file (plain decimals)")
    c.add_argument("--point", dest="point_inline",
                   help="inline comma-separated coordinates")
    c.add_argument("--nu", type=float, required=True)
    c.add_argument("--sigma", type=float,
                   help="also certify against the sigma-relaxed problem")
    c.add_argument("--act-tol", type=float, default=1e-6)
    return ap


def cli_gen(args) -> int:
    if args.random:
        for name in ("m", "n", "nnz", "s", "overlap"):
            if getattr(args, name) is None:
                raise ParameterError(f"--random requires --{name}")
        spec = RandomVlcsSpec(m=args.m, n=args.n, nnz=args.nnz,
                              s_active=args.s, overlap=args.overlap, seed=args.seed)
        p, x_true = gen_random_vlcs(spec, compat_paper_bd=args.compat_paper_bd)
        write_problem(args.out + ".vlcs", p)
        write_truth(args.out + ".xtrue", x_true)
        print(f"wrote {args.out}.vlcs and {args.out}.xtrue "
              f"(m={p.m}, n={p.n}, nnz={args.nnz})")
    elif args.market:
        for name in ("n1", "m1"):
            if getattr(args, name) is None:
                raise ParameterError(f"--market requires --{name}")
        spec = MarketSpec.sample(args.n1, args.m1, seed=args.seed)
        p = gen_market_vlcs(spec)
        write_problem(args.out + ".vlcs", p)
        print(f"wrote {args.out}.vlcs (m={p.m}, n={p.n})")
    else:
        p, _points = example31_fixture(args.nu, args.sigma)
        write_problem(args.out + ".vlcs", p)
        print(f"wrote {args.out}.vlcs (2-d fixture)")
    return EXIT_OK


def cli_solve(args) -> int:
    if args.method == "capped" and not (0 < args.nu < 1):
        raise ParameterError(f"--nu must lie in (0,1), got {args.nu}")
    p = read_problem(args.problem)
    x_true = read_truth(args.truth) if args.truth else None
    cfg = OuterConfig(nu_final=args.nu, K=args.K, sigma_cap=args.sigma_cap,
                      max_outer_k=args.max_outer)
    alm_cfg = AlmConfig()
    if args.method == "capped":
        rep = solve_sparse(p, cfg, alm_cfg, x_true=x_true)
    elif args.method == "l1":
        rep = baseline_l1(p, cfg, alm_cfg, x_true=x_true)
    else:
        rep = baseline_irl1(args.p, p, cfg, alm_cfg, x_true=x_true)

    row = report_row(rep, instance_id=args.problem)
    if args.out:
        write_csv(args.out, [row])
    if args.format == "csv":
        from .bench import rows_to_csv_text

        sys.stdout.write(rows_to_csv_text([row]))
    else:
        print(f"method           {rep.method} (param {row['param'] or '-'})")
        print(f"converged        {rep.converged}")
        print(f"zeros recovered  {rep.zeros_recovered}")
        if rep.matched_zeros is not None:
            print(f"matched zeros    {rep.matched_zeros}")
        print(f"Res              {rep.res:.6e}")
        print(f"objective value  {rep.phi_value:.6f}")
        print(f"outer iterations {rep.outer_iters}")
        print(f"wall time        {rep.wall_time:.3f}s")
        if rep.stationarity is not None:
            print("certificate:")
            print(format_certificate(rep.stationarity))
    return EXIT_OK if rep.converged else EXIT_NONCONV


def cli_bench(args) -> int:
    if args.random:
        instance = {"kind": "random", "m": args.m, "n": args.n, "nnz": args.nnz,
                    "s_active": args.s, "overlap": args.overlap}
    elif args.market:
        instance = {"kind": "market", "n1": args.n1, "m1": args.m1}
    else:
        instance = {"kind": "file", "path": args.problem, "truth": args.truth}
    methods = tuple(t for t in args.methods.split(",") if t)
    baselines = tuple(m for m in methods if m in ("l1", "irl1"))
    cfg = BenchConfig(
        instance=instance,
        seeds=args.seeds,
        nu_list=args.nu_list,
        K=args.K,
        baselines=baselines,
        p_list=args.p_list,
        sigma_cap=args.sigma_cap,
        max_outer_k=args.max_outer,
        methods=tuple(m for m in methods if m == "capped"),
        compat_paper_bd=args.compat_paper_bd,
    )
    rows, summaries, _reports = run_bench(cfg, jobs=args.jobs)
    write_csv(args.out, rows, summaries)
    print(f"wrote {len(rows)} data rows + {len(summaries)} summary rows to {args.out}")
    return EXIT_OK


def _read_point(args, n):
    if args.point_inline:
        vals = [float(t) for t in args.point_inline.split(",") if t.strip()]
    elif args.point:
        with open(args.point, "r", encoding="ascii") as fh:
            tokens = fh.read().split()
        if tokens and tokens[0] == "XTRUE":
            tokens = tokens[2:]
        vals = [float(t) for t in tokens]
    else:
        raise ParameterError("check needs a point file or --point")
    if len(vals) != n:
        raise ParameterError(f"point has {len(vals)} coordinates, problem has n={n}")
    return np.array(vals)


def cli_check(args) -> int:
    p = read_problem(args.problem)
    x = _read_point(args, p.n)
    res = residual_res(p, x)
    print(f"Res(x) = {res:.6e}")
    cert = certify_point(p, x, args.nu, act_tol=args.act_tol)
    print(format_certificate(cert))
    if args.sigma is not None:
        try:
            lr = lifted_residual((p, args.sigma), x, args.nu, act_tol=args.act_tol)
            print(f"relaxed lifted residual (sigma={args.sigma:g}): {lr:.6e}")
        except PreconditionError as exc:
            print(f"relaxed membership failed: {exc}")
            return EXIT_NOT_IN_S
        return EXIT_OK
    if res > args.act_tol:
        print(f"point is not in the solution set (Res > {args.act_tol:g})")
        return EXIT_NOT_IN_S
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        if args.command == "gen":
            return cli_gen(args)
        if args.command == "solve":
            return cli_solve(args)
        if args.command == "bench":
            return cli_bench(args)
        return cli_check(args)
    except (ParameterError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NonconvergenceError as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except VlcsparseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
