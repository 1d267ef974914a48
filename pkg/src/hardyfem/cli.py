"""Command line interface.

Exit codes: 0 success, 1 fatal solver or I/O error, 2 bad arguments.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .assembly import assemble_pencil, hardy_constant
from .calibration import CalibrationError, solve_delta_1d, solve_radial
from .eigensolve import EigenSolveError, smallest_eigenpair
from .harness import (SweepConfig, eigenfunction_samples, emit_columns_csv, emit_csv,
                      emit_plot, run_sweep, svg_plot, _write_text)
from .mesh import uniform_mesh
from .minimizers import choose_m, error_functional, upper_bound_value
from .predictions import predict

EXIT_OK, EXIT_SOLVER, EXIT_ARGS = 0, 1, 2


def _dim(text):
    n = int(text)
    if n == 2 or n < 1:
        raise argparse.ArgumentTypeError("dimension must be 1 or >= 3")
    return n


def _pos_int(text):
    N = int(text)
    if N < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return N


def _out(**values):
    for k, v in values.items():
        print(f"{k} = {float(v)!r}" if isinstance(v, float) else f"{k} = {v}")


def cmd_solve(a):
    pencil = assemble_pencil(uniform_mesh(a.N), a.n)
    res = smallest_eigenpair(pencil, tol=a.tol)
    gap = res.lambda_min - hardy_constant(a.n)
    pred = predict(a.n, 1.0 / a.N)
    _out(n=a.n, N=a.N, S_h=res.lambda_min, gap=gap, gap_lb=pred.gap_lb,
         ratio_lb=gap / pred.gap_lb, residual=res.residual, iterations=res.iterations)


def cmd_calibrate(a):
    if not 0.0 < a.h < 1.0:
        raise ValueError("--h must lie in (0, 1)")
    if a.n == 1:
        cal = solve_delta_1d(a.h)
        _out(n=1, h=a.h, delta=cal.delta, mu=cal.lam, residual=cal.residual)
    else:
        cal = solve_radial(a.n, a.h)
        _out(n=a.n, h=a.h, delta=cal.delta, gamma=cal.gamma, mu=cal.lam,
             residual_1=cal.residuals[0], residual_2=cal.residuals[1])


def cmd_upper(a):
    nm = choose_m(a.n, 1.0 / a.N)
    bound, eps = upper_bound_value(a.N, a.n)
    _out(n=a.n, N=a.N, ub=bound, epsilon=eps, m=nm.m, error_functional=error_functional(nm))


def cmd_sweep(a):
    cfg = SweepConfig(n=a.n, N_min=a.n_min, N_max=a.n_max, points=a.points, tol=a.tol,
                      workers=a.workers)
    records = run_sweep(cfg)
    emit_csv(records, a.out)
    if a.plot:
        emit_plot(records, a.kind, a.plot)
    failed = sum(1 for r in records if "S_h" in r.flags)
    print(f"wrote {len(records)} rows to {a.out}" + (f" ({failed} failed solves)" if failed else ""))


def cmd_eigfun(a):
    x, fe, exact = eigenfunction_samples(a.N, a.n)
    emit_columns_csv({"x": x, "u_h": fe, "u_analytic": exact, "diff": fe - exact}, a.out)
    if a.plot:
        _write_text(a.plot, svg_plot({"FE minimizer": (x, fe), "analytic": (x, exact)},
                                     xlog=False, xlabel="x", ylabel="u",
                                     title=f"n = {a.n}, N = {a.N}"))
    print(f"sup error = {float(abs(fe - exact).max())!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hardyfem",
                                description="Discrete Hardy constants on uniform meshes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="smallest eigenvalue of the discrete pencil")
    s.add_argument("--n", type=_dim, required=True)
    s.add_argument("--N", type=_pos_int, required=True)
    s.add_argument("--tol", type=float, default=1e-12)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("calibrate", help="calibrated lower bound at mesh size h")
    s.add_argument("--n", type=_dim, required=True)
    s.add_argument("--h", type=float, required=True)
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("upper", help="interpolation upper bound")
    s.add_argument("--n", type=_dim, required=True)
    s.add_argument("--N", type=_pos_int, required=True)
    s.set_defaults(func=cmd_upper)

    s = sub.add_parser("sweep", help="convergence sweep over logspaced N")
    s.add_argument("--n", type=_dim, required=True)
    s.add_argument("--n-min", type=int, default=10)
    s.add_argument("--n-max", type=int, default=10**6)
    s.add_argument("--points", type=int, default=20)
    s.add_argument("--out", required=True)
    s.add_argument("--plot")
    s.add_argument("--kind", default="all", choices=("all", "ratio_lb", "ratio_asym", "ratio_ub"))
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("eigfun", help="FE minimizer against the analytic near-minimizer")
    s.add_argument("--n", type=_dim, required=True)
    s.add_argument("--N", type=_pos_int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--plot")
    s.set_defaults(func=cmd_eigfun)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (EigenSolveError, CalibrationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
