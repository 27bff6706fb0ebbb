"""Command line entry point: ``solve``, ``study`` and ``contour-diag``."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys

import numpy as np

from .contour import build_contour, k_schedule, quadrature_apply, write_contour_csv
from .harness import ALL_METHODS, EXP_METHODS, StudyConfig, _number, _solve_cell, emit, load_configs, run_study
from .integrator import SolverDivergence, solve
from .laplacian import DirichletLaplacian1D
from .problems import INITIAL_DATA, PROBLEMS
from .reference import NewtonFailure
from .time_mesh import build_graded_mesh, write_mesh_csv

log = logging.getLogger("nonsmooth_expint")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=ALL_METHODS, default="exp_k2")
    p.add_argument("--problem", choices=sorted(PROBLEMS), default="allen_cahn")
    p.add_argument("--initial", choices=sorted(INITIAL_DATA), default="step")
    p.add_argument("--T", type=_number, default=0.5, help="final time (fractions allowed)")
    p.add_argument("--tau", type=_number, default=1 / 64, help="target stepsize")
    p.add_argument("--M", type=int, default=1023, help="interior grid points")
    p.add_argument("--beta", type=_number, default=0.75)
    p.add_argument("--alpha", type=_number, default=math.pi / 4)
    p.add_argument("--K-mult", dest="K_mult", type=_number, default=10.0)
    p.add_argument("--K", type=int, default=None, help="override the node count")


def _cmd_solve(args) -> int:
    taus = (args.tau, args.tau / 2, args.tau / 4)
    if args.config:
        cfg = load_configs(args.config)[0]
        T = cfg.T[0]
        cfg = StudyConfig(**{**cfg.__dict__, "T": (T,)})
        tau = cfg.tau[0]
    else:
        cfg = StudyConfig(method=args.method, T=(args.T,), tau=taus, problem=args.problem,
                          initial=args.initial, beta=args.beta, alpha=args.alpha,
                          K_mult=args.K_mult, M=args.M)
        T, tau = args.T, args.tau
    op = DirichletLaplacian1D(cfg.M)
    if cfg.is_exponential:
        mesh = build_graded_mesh(T, cfg.steps(T, tau), cfg.beta)
        if args.dump_mesh:
            write_mesh_csv(mesh, args.dump_mesh)
        K = args.K or cfg.nodes(tau)
        try:
            hist = solve(op, cfg.spec(T), mesh, EXP_METHODS[cfg.method], K, cfg.alpha)
        except SolverDivergence as exc:
            print(f"solve failed: {exc}", file=sys.stderr)
            return 1
        log.info("%s: N=%d K=%d", cfg.method, mesh.N, K)
    else:
        try:
            hist = _solve_cell(cfg, op, T, tau)
        except NewtonFailure as exc:
            print(f"solve failed: {exc}", file=sys.stderr)
            return 1

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["x", "u"])
        for x, u in zip(op.x, hist.final):
            writer.writerow([repr(float(x)), repr(float(u))])
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_study(args) -> int:
    configs = load_configs(args.config)
    chunks = []
    failed = []
    for cfg in configs:
        log.info("running %s over T=%s", cfg.method, cfg.T)
        report = run_study(cfg, threads=args.threads)
        failed.extend(report.failures())
        text = emit(report, format=args.format)
        if chunks and args.format == "csv":
            text = text.split("\n", 1)[1]
        chunks.append(text)
    text = "".join(chunks) if args.format == "csv" else "\n".join(chunks)
    out = args.out or configs[0].output
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if failed:
        print(f"{len(failed)} cell(s) failed:", file=sys.stderr)
        for c in failed:
            print(f"  {c.method} T={c.T} tau={c.tau}: {c.error}", file=sys.stderr)
        return 1
    return 0


def _cmd_contour_diag(args) -> int:
    K = args.K or k_schedule(args.tau)
    rule = build_contour(args.tau, K, args.alpha)
    if args.out:
        write_contour_csv(rule, args.out)
    print(f"tau={args.tau:g} K={K} alpha={args.alpha:.6g} lambda={rule.lam:.6g} "
          f"a(theta)={rule.a_theta:.6g} h={rule.h:.6g}")

    # decay of the propagation error against the sine-transform oracle
    op = DirichletLaplacian1D(args.M)
    v = op.sample(INITIAL_DATA["step"])
    exact = op.exact_propagator(args.tau, v)
    print(f"{'K':>4}  {'max error vs exp(tau A) v':>26}")
    for Kd in (8, 16, 24, 32, 48, 64):
        r = build_contour(args.tau, Kd, args.alpha)
        approx = quadrature_apply(r, args.tau, op.resolvent_solve,
                                  lambda z: np.broadcast_to(v, (len(z), op.M)), batched=True)
        print(f"{Kd:>4}  {np.max(np.abs(approx - exact)):>26.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonsmooth-expint", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="single run, writes the final state as CSV (x, u)")
    _add_solver_args(p)
    p.add_argument("--config", help="take parameters from a study config (first T and tau)")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--dump-mesh", help="write the time mesh as CSV (n, t_n, tau_n)")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("study", help="convergence table from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "table"), default="csv")
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = one per CPU")
    p.set_defaults(func=_cmd_study)

    p = sub.add_parser("contour-diag", help="contour nodes/weights and quadrature decay")
    p.add_argument("--tau", type=_number, default=0.01)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--alpha", type=_number, default=math.pi / 4)
    p.add_argument("--M", type=int, default=255)
    p.add_argument("--out", help="write nodes/weights CSV (l, re_z, im_z, re_w, im_w)")
    p.set_defaults(func=_cmd_contour_diag)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
