"""Command-line front end.

Subcommands: gen, corrupt, solve, bounds, experiment, oracle.
Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

import argparse
import sys as _sys

import numpy as np

from .detect import METHODS, WITHOUT_REMOVAL, DetectionConfig, detect as _run_detect
from . import experiment as _experiment
from . import linalg, systems
from .bounds import BoundInputs, bound_report, max_rounds
from .exceptions import RkDetectError


def _add_corruption_args(p):
    p.add_argument("--s", type=int, default=0, help="number of corrupted right-hand-side entries")
    p.add_argument("--corruption", default="uniform:1:5",
                   help="corruption law: uniform:LO:HI or constant:VALUE")
    p.add_argument("--seed", type=int, default=0)


def _build_parser():
    parser = argparse.ArgumentParser(prog="rkdetect",
                                     description="Randomized Kaczmarz solvers with corruption detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a corrupted system into a directory")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", choices=(systems.GAUSSIAN, systems.CORRELATED),
                   default=systems.GAUSSIAN)
    _add_corruption_args(p)
    p.add_argument("--out", required=True, help="output system directory")

    p = sub.add_parser("corrupt", help="plant corruption into an existing clean system")
    p.add_argument("--system", required=True, help="input system directory")
    _add_corruption_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("solve", help="run a multi-round detection method on a system")
    p.add_argument("--system", required=True)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--k", type=int, required=True, help="RK iterations per round")
    p.add_argument("--w", type=int, required=True, help="rounds")
    p.add_argument("--d", type=int, required=True, help="picks per round")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the solution vector to this file")

    p = sub.add_parser("bounds", help="evaluate the success-probability bounds")
    p.add_argument("--system", help="measure inputs from this ground-truthed system")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--eps-star", type=float)
    p.add_argument("--x-star-norm", type=float)
    p.add_argument("--sigma-min-star", type=float)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--d", type=int, help="picks per round (default: s)")
    p.add_argument("--w", type=int, help="rounds (default: floor((m - n) / d))")

    p = sub.add_parser("experiment", help="run a Monte-Carlo sweep")
    p.add_argument("--spec", help="key=value spec file (repeated keys form sweep lists)")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--family", choices=(systems.GAUSSIAN, systems.CORRELATED),
                   default=systems.GAUSSIAN)
    p.add_argument("--method", choices=METHODS, default=WITHOUT_REMOVAL)
    p.add_argument("--s", type=int, action="append", help="sweep value, repeatable")
    p.add_argument("--d", type=int, action="append")
    p.add_argument("--k", type=int, action="append")
    p.add_argument("--w", type=int, action="append")
    p.add_argument("--delta", type=float, action="append")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--corruption", default="uniform:1:5")
    p.add_argument("--overlay", action="store_true",
                   help="add theoretical-bound rows next to the empirical rates")
    p.add_argument("--csv", required=True, help="output CSV path")
    p.add_argument("--svg", help="optional output SVG chart path")

    p = sub.add_parser("oracle", help="exhaustive smallest-support solve (tiny systems)")
    p.add_argument("--system", required=True)

    return parser


def _one_based(indices):
    return "{" + ",".join(str(int(i) + 1) for i in indices) + "}"


def _cmd_gen(args):
    spec = systems.GenSpec(m=args.m, n=args.n, family=args.family, s=args.s,
                           corruption=_experiment.parse_corruption(args.corruption),
                           seed=args.seed)
    sys_ = systems.generate(spec)
    systems.save_system(sys_, args.out)
    print(f"wrote {sys_.m} x {sys_.n} {args.family} system to {args.out} "
          f"(s={sys_.s}, support={_one_based(sys_.support)})")
    return 0


def _cmd_corrupt(args):
    sys_ = systems.load_system(args.system)
    x_star = sys_.x_star if sys_.has_truth else linalg.least_squares_solve(sys_.A, sys_.b)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((args.seed,))))
    law = _experiment.parse_corruption(args.corruption)
    b_star = sys_.A @ x_star
    support = np.sort(rng.choice(sys_.m, size=args.s, replace=False)) if args.s else np.empty(0, dtype=int)
    eps = law.draw(rng, args.s) if args.s else np.empty(0)
    b = b_star.copy()
    b[support] += eps
    out = systems.CorruptedSystem(A=sys_.A, b=b, b_star=b_star, x_star=x_star,
                                  support=support, eps=eps)
    systems.save_system(out, args.out)
    print(f"corrupted {args.s} rows, support={_one_based(support)}, wrote {args.out}")
    return 0


def _cmd_solve(args):
    sys_ = systems.load_system(args.system)
    cfg = DetectionConfig(method=args.method, k=args.k, w=args.w, d=args.d, seed=args.seed)
    outcome = _run_detect(sys_.A, sys_.b, cfg)
    print(f"method={args.method} rounds={outcome.rounds_run} |S|={outcome.selected.size}")
    print(f"selected (1-based): {_one_based(outcome.selected)}")
    print(f"surviving-residual norm: {outcome.residual_norm:.6e} "
          f"({'consistent' if outcome.consistent else 'INCONSISTENT'})")
    if sys_.has_truth and sys_.s > 0:
        truth = set(int(i) for i in sys_.support)
        covered = truth <= set(int(i) for i in outcome.selected)
        print(f"ground truth I={_one_based(sys_.support)}; I subset of S: {'yes' if covered else 'no'}")
        print(f"||x - x*|| = {np.linalg.norm(outcome.solution - sys_.x_star):.6e}")
    if args.out:
        linalg.save_vector(args.out, outcome.solution)
        print(f"solution written to {args.out}")
    return 0


def _cmd_bounds(args):
    if args.system:
        sys_ = systems.load_system(args.system)
        sys_.require_truth()
        A_star, _ = linalg.subsystem(sys_.A, sys_.b, sys_.support)
        inputs = BoundInputs(m=sys_.m, n=sys_.n, s=sys_.s, delta=args.delta,
                             eps_star=sys_.eps_star,
                             x_star_norm=float(np.linalg.norm(sys_.x_star)),
                             sigma_min_star=linalg.smallest_singular_value(A_star))
    else:
        missing = [name for name in ("m", "n", "s", "eps_star", "x_star_norm", "sigma_min_star")
                   if getattr(args, name) is None]
        if missing:
            raise RkDetectError(f"bounds needs --system or explicit {', '.join('--' + m.replace('_', '-') for m in missing)}")
        inputs = BoundInputs(m=args.m, n=args.n, s=args.s, delta=args.delta,
                             eps_star=args.eps_star, x_star_norm=args.x_star_norm,
                             sigma_min_star=args.sigma_min_star)
    d = args.d if args.d is not None else max(1, inputs.s)
    w = args.w if args.w is not None else max_rounds(inputs.m, inputs.n, d)
    report = bound_report(inputs, w, d)
    print(f"m={inputs.m} n={inputs.n} s={inputs.s} delta={inputs.delta} "
          f"eps_star={inputs.eps_star:g} ||x*||={inputs.x_star_norm:.6g} "
          f"sigma_min(A_*)={inputs.sigma_min_star:.6g}")
    print(f"k_star = {report.k_star}")
    print(f"single-round success lower bound = {report.p_single:.12g}")
    print(f"one-of-{w}-rounds lower bound    = {report.p_thm1:.12g}")
    print(f"cumulative ({-(-inputs.s // d)}-of-{w}) lower bound = {report.p_thm2:.12g}")
    print(f"max rounds for d={d}: {report.w_max}")
    return 0


def _cmd_experiment(args):
    if args.spec:
        spec = _experiment.parse_spec_file(args.spec)
        if args.workers != 1:
            spec = _replace_spec(spec, workers=args.workers)
    else:
        if args.m is None or args.n is None:
            raise RkDetectError("experiment needs --spec or both --m and --n")
        spec = _experiment.ExperimentSpec(
            m=args.m, n=args.n, family=args.family, method=args.method,
            corruption=_experiment.parse_corruption(args.corruption),
            s_list=tuple(args.s or (10,)), d_list=tuple(args.d or (None,)),
            k_list=tuple(args.k or (500,)), w_list=tuple(args.w or (None,)),
            delta_list=tuple(args.delta or (0.5,)), trials=args.trials,
            master_seed=args.seed, workers=args.workers)
    table = _experiment.bound_overlay(spec) if args.overlay else _experiment.run_experiment(spec)
    _experiment.emit_csv(table, args.csv)
    print(f"wrote {len(table)} rows to {args.csv}")
    if args.svg:
        _experiment.emit_svg(table, args.svg)
        print(f"wrote chart to {args.svg}")
    return 0


def _replace_spec(spec, **kw):
    from dataclasses import replace
    return replace(spec, **kw)


def _cmd_oracle(args):
    sys_ = systems.load_system(args.system)
    support, x = systems.brute_force_l0_oracle(sys_.A, sys_.b)
    print(f"minimal corruption support (1-based): {_one_based(support)}")
    print("solution: " + " ".join(f"{v:.12g}" for v in x))
    if sys_.has_truth:
        match = np.array_equal(support, sys_.support)
        print(f"matches planted support: {'yes' if match else 'no'}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "corrupt": _cmd_corrupt,
    "solve": _cmd_solve,
    "bounds": _cmd_bounds,
    "experiment": _cmd_experiment,
    "oracle": _cmd_oracle,
}


def cli_main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors; report usage as 1
        return 0 if exc.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except RkDetectError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2


def main():
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
