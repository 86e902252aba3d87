"""Command-line interface: solve one instance, print a stepsize plan,
reproduce the benchmark table, or run the diagnostic suite.

Exit codes: 0 success, 1 invariant/diagnostic failure, 2 input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import (
    ALGOS,
    DEFAULT_SIZES,
    format_summary,
    generate_instance,
    run_benchmark,
    run_experiment,
    summarize,
    write_summary_csv,
)
from .checks import run_all_checks
from .core import DivergenceError, InputError, NumericalError
from .splitting import StoppingRule, write_trace_csv, write_trace_json
from .stepsize import PlanInfeasibleError, plan


def _parse_sizes(text: str) -> list[tuple[int, int]]:
    """Parse `100:1000,300:10000` into [(100, 1000), (300, 10000)]."""
    sizes = []
    try:
        for part in text.split(","):
            n, s = part.split(":")
            sizes.append((int(n), int(s)))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"sizes must look like 100:1000,300:10000 — got {text!r}"
        ) from None
    return sizes


def _add_protocol_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--lam", type=float, default=1.0, help="relaxation of the z-update")
    sub.add_argument("--alpha", type=float, default=0.99, help="prox-step relaxation")
    sub.add_argument("--lambda1", type=float, default=10.0, help="nonnegativity weight")
    sub.add_argument("--lambda2", type=float, default=5.0, help="spectral penalty weight")
    sub.add_argument("--tau", type=float, default=100.0, help="MCP knee")
    sub.add_argument("--max-iter", type=int, default=20000)
    sub.add_argument("--tol", type=float, default=1e-3, help="composite-residual tolerance")
    sub.add_argument("--proxgamma", type=float, default=5e-3, help="residual prox stepsize")
    sub.add_argument("--gamma", type=float, default=None, help="stepsize override")
    sub.add_argument("--gamma-dys", type=float, default=None, help="baseline stepsize override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trisplit", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_plan = subs.add_parser("plan", help="print the stepsize plan for given moduli")
    p_plan.add_argument("--l1", type=float, required=True, help="Lipschitz modulus of f1")
    p_plan.add_argument("--l2", type=float, required=True, help="Lipschitz modulus of f2")
    p_plan.add_argument("--lam", type=float, default=1.0)
    p_plan.add_argument("--alpha", type=float, default=0.99)
    p_plan.add_argument("--format", choices=("text", "json"), default="text")
    p_plan.set_defaults(func=cmd_plan)

    p_solve = subs.add_parser("solve", help="run one algorithm on one synthetic instance")
    p_solve.add_argument("--algo", choices=ALGOS, required=True)
    p_solve.add_argument("--n", type=int, default=100, help="matrix size (n x n)")
    p_solve.add_argument("--s", type=int, default=1000, help="number of observed entries")
    p_solve.add_argument("--rank", type=int, default=10)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--trace", default=None, help="write the iteration trace here")
    p_solve.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_protocol_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_bench = subs.add_parser("bench", help="reproduce the benchmark table")
    p_bench.add_argument("--seeds", type=int, default=5, help="number of seeds (0..seeds-1)")
    p_bench.add_argument(
        "--sizes",
        type=_parse_sizes,
        default=list(DEFAULT_SIZES),
        help="comma-separated n:s pairs, e.g. 100:1000,300:10000",
    )
    p_bench.add_argument("--algos", nargs="+", choices=ALGOS, default=list(ALGOS))
    p_bench.add_argument("--rank", type=int, default=10)
    p_bench.add_argument("--jobs", type=int, default=1, help="worker threads")
    p_bench.add_argument("--outdir", default=None, help="write traces and summary.csv here")
    _add_protocol_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_check = subs.add_parser("check", help="run the hermetic diagnostic suite")
    p_check.set_defaults(func=cmd_check)

    return parser


def cmd_plan(args) -> int:
    sp = plan(args.l1, args.l2, args.lam, args.alpha)
    if args.format == "json":
        print(json.dumps(sp.as_dict(), indent=1))
    else:
        fields = dict(
            l1=sp.l1,
            l2=sp.l2,
            lam=sp.lam,
            alpha=sp.alpha,
            alpha_bar=sp.alpha_bar,
            eps1=sp.eps1,
            eps2=sp.eps2,
            gbar0=sp.gbar0,
            gbar1=sp.gbar1,
            gbar2=sp.gbar2,
            gbar3=sp.gbar3,
            gamma_upper=sp.gamma_upper,
            gamma_ryu=sp.gamma_ryu,
            thm2_cap=sp.thm2_cap,
            gamma_in_thm2_cap=sp.gamma_in_thm2_cap,
        )
        width = max(len(k) for k in fields)
        for key, value in fields.items():
            print(f"{key:<{width}}  {value}")
    return 0


def cmd_solve(args) -> int:
    inst = generate_instance(
        args.n, args.n, args.rank, args.s, args.seed,
        lam1=args.lambda1, lam2=args.lambda2, tau=args.tau,
    )
    stop = StoppingRule(prox_gamma=args.proxgamma, tol=args.tol, max_iter=args.max_iter)
    rep = run_experiment(
        inst, args.algo, lam=args.lam, alpha=args.alpha,
        gamma=args.gamma, gamma_dys=args.gamma_dys, stop=stop,
    )
    status = "diverged" if rep.diverged else ("converged" if rep.converged else "capped")
    print(
        f"algo={rep.algo} n={rep.n} s={rep.s} seed={rep.seed} {status} "
        f"iters={rep.iterations} obj={rep.objective:.4f} "
        f"residual={rep.residual:.3e} time_ms={rep.time_ms:.1f}"
    )
    if args.trace:
        writer = write_trace_json if args.format == "json" else write_trace_csv
        writer(args.trace, rep.trace)
        print(f"trace written to {args.trace}")
    return 3 if rep.diverged else 0


def cmd_bench(args) -> int:
    reports = run_benchmark(
        sizes=args.sizes,
        seeds=range(args.seeds),
        algos=args.algos,
        r=args.rank,
        lam1=args.lambda1,
        lam2=args.lambda2,
        tau=args.tau,
        jobs=args.jobs,
        trace_dir=args.outdir,
        lam=args.lam,
        alpha=args.alpha,
        gamma=args.gamma,
        gamma_dys=args.gamma_dys,
        stop=StoppingRule(prox_gamma=args.proxgamma, tol=args.tol, max_iter=args.max_iter),
    )
    rows = summarize(reports)
    print(format_summary(rows))
    if args.outdir:
        path = f"{args.outdir}/summary.csv"
        write_summary_csv(path, rows)
        print(f"summary written to {path}")
    return 0


def cmd_check(args) -> int:
    return 0 if run_all_checks() else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (InputError, PlanInfeasibleError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (DivergenceError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
