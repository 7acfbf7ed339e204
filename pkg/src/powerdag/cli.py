"""Command-line front end: simulate, learn, evaluate, bench, figdata.

Exit codes: 0 on success, 1 on usage or input errors, 2 on numerical
failure (a diverged or singular solve; partial traces are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import bench, constraints, fileio, metrics, simulate, solver
from .errors import (
    DivergedError,
    DomainError,
    NumericOverflowError,
    PowerDagError,
    ShapeError,
    SingularMatrixError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the CLI contract reserves
    # 2 for numerical failure, so usage problems remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="powerdag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[], help="generate a synthetic SEM dataset")
    sim.add_argument("--family", choices=["er", "sf"], default="er")
    sim.add_argument("--nodes", type=int, required=True)
    sim.add_argument("--degree", type=float, default=2.0)
    sim.add_argument("--noise", choices=["gauss", "exp", "gumbel"], default="gauss")
    sim.add_argument("--samples", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=cmd_simulate)

    learn = sub.add_parser("learn", help="fit a DAG to a data CSV")
    learn.add_argument("--data", required=True)
    learn.add_argument("--out", required=True, help="output directory")
    learn.add_argument("--method", choices=["notears", "golem"], default="notears")
    learn.add_argument(
        "--constraint",
        choices=["tmpi", "fast-tmpi", "geo", "exp", "binomial", "poly", "single"],
        default="fast-tmpi",
    )
    learn.add_argument("--epsilon", type=float, default=1e-6)
    learn.add_argument("--threshold", type=float, default=0.3)
    learn.add_argument("--binomial-alpha", type=float, default=None, help="defaults to 1/d")
    learn.add_argument("--l1", type=float, default=0.1)
    learn.add_argument("--rho-init", type=float, default=1.0)
    learn.add_argument("--rho-max", type=float, default=1e16)
    learn.add_argument("--rho-growth", type=float, default=10.0)
    learn.add_argument("--progress-ratio", type=float, default=0.25)
    learn.add_argument("--h-tol", type=float, default=1e-8)
    learn.add_argument("--max-outer", type=int, default=100)
    learn.add_argument("--inner-iters", type=int, default=2000)
    learn.add_argument("--eta1", type=float, default=0.02)
    learn.add_argument("--eta2", type=float, default=5.0)
    learn.add_argument("--step-size", type=float, default=1e-3)
    learn.add_argument("--iters", type=int, default=10000)
    learn.add_argument("--trace", action="store_true", help="write trace.jsonl")
    learn.set_defaults(func=cmd_learn)

    ev = sub.add_parser("evaluate", help="score an estimate against a truth graph")
    ev.add_argument("--truth", required=True)
    ev.add_argument("--estimate", required=True)
    ev.add_argument("--threshold", type=float, default=None, help="binarize a raw estimate first")
    ev.add_argument("--out", default=None, help="also write the metrics JSON here")
    ev.set_defaults(func=cmd_evaluate)

    bn = sub.add_parser("bench", help="run a benchmark grid from a JSON plan")
    bn.add_argument("--plan", required=True)
    bn.add_argument("--jobs", type=int, default=None)
    bn.set_defaults(func=cmd_bench)

    fig = sub.add_parser("figdata", help="export gradient-norm and truncation-error curves")
    fig.add_argument("--matrix", default=None, help="candidate weight-matrix CSV")
    fig.add_argument("--family", choices=["er", "sf"], default="er")
    fig.add_argument("--nodes", type=int, default=None)
    fig.add_argument("--degree", type=float, default=2.0)
    fig.add_argument("--seed", type=int, default=0)
    fig.add_argument("--max-order", type=int, default=None)
    fig.add_argument("--out", required=True, help="output directory")
    fig.set_defaults(func=cmd_figdata)

    return parser


def cmd_simulate(args) -> int:
    out = fileio.ensure_dir(args.out)
    problem = simulate.make_problem(
        args.family, args.nodes, args.degree, args.noise, args.samples, args.seed
    )
    fileio.write_data_csv(out / "data.csv", problem.data)
    fileio.write_matrix_csv(out / "weights.csv", problem.truth_weights)
    fileio.write_json(
        out / "spec.json",
        {
            "family": simulate.canonical_family(args.family),
            "nodes": args.nodes,
            "degree": args.degree,
            "noise": problem.noise_family,
            "samples": args.samples,
            "seed": args.seed,
        },
    )
    return EXIT_OK


def cmd_learn(args) -> int:
    out = fileio.ensure_dir(args.out)
    x = fileio.read_data_csv(args.data)
    constraint = args.constraint.replace("-", "_")

    started = time.perf_counter()
    try:
        if args.method == "notears":
            cfg = solver.SolverConfig(
                constraint=constraint,
                eps=args.epsilon,
                l1_eta=args.l1,
                rho_init=args.rho_init,
                rho_max=args.rho_max,
                rho_growth=args.rho_growth,
                progress_ratio=args.progress_ratio,
                h_tol=args.h_tol,
                max_outer=args.max_outer,
                inner_max_iters=args.inner_iters,
                threshold_omega=args.threshold,
                binomial_alpha=args.binomial_alpha,
            )
            result = solver.solve_notears(x, cfg)
        else:
            gcfg = solver.GolemConfig(
                constraint=constraint,
                eps=args.epsilon,
                eta1=args.eta1,
                eta2=args.eta2,
                step_size=args.step_size,
                iters=args.iters,
                threshold_omega=args.threshold,
                binomial_alpha=args.binomial_alpha,
            )
            result = solver.solve_golem(x, gcfg)
    except DivergedError as exc:
        # keep the partial trace for post-mortems, then signal failure
        fileio.write_jsonl(out / "trace.jsonl", exc.trace)
        fileio.write_json(out / "summary.json", {"error": str(exc), "method": args.method})
        print(f"powerdag learn: diverged: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    fileio.write_matrix_csv(out / "estimate_raw.csv", result.b_raw)
    fileio.write_matrix_csv(out / "estimate_binary.csv", result.b_thresholded, integer=True)
    if args.trace:
        fileio.write_jsonl(out / "trace.jsonl", result.trace)
    fileio.write_json(
        out / "summary.json",
        {
            "method": args.method,
            "constraint": constraint,
            "n": int(x.shape[0]),
            "d": int(x.shape[1]),
            "final_h": result.final_h,
            "outer_iters": result.outer_iters,
            "total_matmuls": result.total_matmuls,
            "predicted_edges": int(result.b_thresholded.sum()),
            "wall_time_s": time.perf_counter() - started,
        },
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    truth_raw = fileio.read_matrix_csv(args.truth)
    est_raw = fileio.read_matrix_csv(args.estimate)
    if truth_raw.shape != est_raw.shape:
        raise ShapeError(f"truth and estimate sizes differ: {truth_raw.shape} vs {est_raw.shape}")
    truth = (truth_raw != 0).astype(np.int64)
    if args.threshold is not None:
        est = solver.threshold_and_repair(est_raw, args.threshold)
    else:
        est = est_raw.astype(np.int64)
    result = metrics.score(truth, est)
    payload = result.to_dict()
    if args.out:
        fileio.write_json(args.out, payload)
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def cmd_bench(args) -> int:
    plan = bench.BenchPlan.from_dict(fileio.read_json(args.plan))
    results_path, summary_path = bench.run_plan(plan, jobs=args.jobs)
    print(f"wrote {results_path} and {summary_path}")
    return EXIT_OK


def cmd_figdata(args) -> int:
    out = fileio.ensure_dir(args.out)
    if args.matrix is not None:
        b = fileio.read_matrix_csv(args.matrix)
    elif args.nodes is not None:
        problem = simulate.make_problem(args.family, args.nodes, args.degree, "gauss", 1, args.seed)
        b = problem.truth_weights
    else:
        raise DomainError("figdata needs either --matrix or --nodes")
    bt = b * b
    d = bt.shape[0]
    max_order = args.max_order if args.max_order is not None else d
    if not 1 <= max_order <= d:
        raise DomainError(f"--max-order must lie in [1, {d}]")

    curves = {
        family: constraints.per_order_gradient_norms(bt, family, max_order)
        for family in ("geo", "exp", "binomial")
    }
    with open(out / "gradient_norms.csv", "w") as fh:
        fh.write("order,geo,exp,binomial\n")
        for i in range(max_order):
            fh.write(
                f"{i + 1},{curves['geo'][i]:.17g},{curves['exp'][i]:.17g},{curves['binomial'][i]:.17g}\n"
            )

    profile = constraints.truncation_profile(bt)
    with open(out / "truncation_error.csv", "w") as fh:
        fh.write("k,power_infnorm,value_error,grad_error_infnorm\n")
        for row in profile:
            fh.write(
                f"{row['k']},{row['power_infnorm']:.17g},{row['value_error']:.17g},"
                f"{row['grad_error_infnorm']:.17g}\n"
            )
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (DivergedError, SingularMatrixError, NumericOverflowError) as exc:
        print(f"powerdag: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ShapeError, PowerDagError, OSError, ValueError) as exc:
        print(f"powerdag: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
