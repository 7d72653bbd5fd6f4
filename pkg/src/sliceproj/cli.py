"""Command-line front end.

Subcommands: probe (semismoothness scaling experiment), project (one-shot
projections), verify (invariant suites), curves (curve/residual data dump).
Exit codes: 0 success, 1 failed check, 2 invalid configuration or parse
failure, 3 solver failure. The SLICEPROJ_LOG environment variable
(error|warn|info|debug) controls log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .cones import (make_cone, membership_polar_shadow, normal_curve,
                    polar_curve, curve_step, read_cone_point, write_cone_point)
from .errors import InvalidInputError, NumericFailureError
from .probe import (probe_semismoothness, report_to_csv, report_to_json,
                    residual_exact)
from .project import (SolverConfig, project_cone, project_polar,
                      project_slice_dykstra, project_slice_fixedpoint)
from .symmat import read_block_matrix, write_block_matrix
from .verify import run_verify

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = os.environ.get("SLICEPROJ_LOG", "warn").lower()
    logging.basicConfig(level=_LOG_LEVELS.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sliceproj",
        description="Projection and semismoothness laboratory for an "
                    "LMI-representable cone family and its PSD-cone slices.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(p):
        p.add_argument("--tol", type=float, default=1e-9,
                       help="solver residual tolerance (default 1e-9)")
        p.add_argument("--max-iter", type=int, default=200_000,
                       help="solver iteration budget (default 200000)")
        p.add_argument("--rho", type=float, default=1.0,
                       help="ADMM penalty (default 1.0)")

    p_probe = sub.add_parser("probe", help="measure the semismoothness order")
    p_probe.add_argument("--n", type=int, required=True, help="cone index (>= 2)")
    p_probe.add_argument("--mode", choices=("exact", "numeric"), default="exact")
    p_probe.add_argument("--t-min", type=float, default=1e-4)
    p_probe.add_argument("--t-max", type=float, default=1e-1)
    p_probe.add_argument("--points", type=int, default=20)
    p_probe.add_argument("--fd-step", type=float, default=1e-6,
                         help="one-sided finite-difference step (numeric mode)")
    p_probe.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                         help="parallel grid evaluations (numeric mode)")
    p_probe.add_argument("--out", help="report file (default: stdout)")
    p_probe.add_argument("--format", choices=("csv", "json"), default="csv")
    add_solver_flags(p_probe)

    p_project = sub.add_parser("project", help="run one projection")
    p_project.add_argument("--n", type=int, required=True)
    p_project.add_argument("--target", required=True,
                           choices=("K", "polar", "slice-dykstra",
                                    "slice-fixedpoint"),
                           help="which projector to run")
    p_project.add_argument("--in", dest="input_path", required=True,
                           help="input file (cone point for K/polar, block "
                                "matrix for the slice targets)")
    p_project.add_argument("--out", help="output file for the projected object")
    p_project.add_argument("--gamma-frac", type=float, default=0.9,
                           help="fixed-point step as a fraction of 1/lam_max")
    add_solver_flags(p_project)

    p_verify = sub.add_parser("verify", help="run the invariant suites")
    p_verify.add_argument("--n-max", type=int, default=4,
                          help="largest cone index exercised (default 4)")
    p_verify.add_argument("--seed", type=int, default=12345,
                          help="RNG seed for the sampled checks")
    p_verify.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_verify.add_argument("--inject-defect", action="store_true",
                          help=argparse.SUPPRESS)

    p_curves = sub.add_parser("curves", help="dump curve and residual data")
    p_curves.add_argument("--n", type=int, required=True)
    p_curves.add_argument("--t-min", type=float, default=1e-4)
    p_curves.add_argument("--t-max", type=float, default=1e-1)
    p_curves.add_argument("--points", type=int, default=20)
    p_curves.add_argument("--out", help="CSV file (default: stdout)")
    return parser


def _write_output(text: str, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _residual_norm_any(model, t: float) -> float:
    """Exact residual norm, extended by continuity to the endpoints."""
    if 0.0 < t < 1.0:
        return residual_exact(model, t)[1]
    if t == 0.0:
        return 0.0
    w = normal_curve(model, t)
    return 1.0 / w.norm()


def cmd_probe(args) -> int:
    model = make_cone(args.n)
    cfg = SolverConfig(tol=args.tol, max_iter=args.max_iter, rho=args.rho)
    report = probe_semismoothness(
        model, mode=args.mode, t_min=args.t_min, t_max=args.t_max,
        points=args.points, cfg=cfg, fd_step=args.fd_step, jobs=args.jobs)
    text = report_to_csv(report) if args.format == "csv" else report_to_json(report)
    _write_output(text, args.out)
    print(report.summary_line())
    gap = abs(report.fitted_slope - model.lam)
    bound = 0.05 if args.mode == "exact" else 0.1
    return 0 if gap <= bound else 1


def cmd_project(args) -> int:
    model = make_cone(args.n)
    cfg = SolverConfig(tol=args.tol, max_iter=args.max_iter, rho=args.rho)
    with open(args.input_path) as fh:
        text = fh.read()
    if args.target in ("K", "polar"):
        point = read_cone_point(text)
        if args.target == "K":
            result, stats = project_cone(model, point, cfg)
        else:
            result, stats = project_polar(model, point, cfg)
        out_text = write_cone_point(result)
    else:
        mat = read_block_matrix(text)
        if args.target == "slice-dykstra":
            result, stats = project_slice_dykstra(model, mat, cfg)
        else:
            gamma = args.gamma_frac / model.lam_max
            result, stats = project_slice_fixedpoint(model, mat, cfg, gamma=gamma)
        out_text = write_block_matrix(result)
    _write_output(out_text, args.out)
    print(json.dumps(stats.to_json_dict()))
    return 0 if stats.converged else 3


def cmd_verify(args) -> int:
    results = run_verify(n_max=args.n_max, seed=args.seed, jobs=args.jobs,
                         inject_defect=args.inject_defect)
    all_ok = True
    for res in results:
        tag = "PASS" if res.ok else "FAIL"
        print(f"{tag} {res.name}: {res.detail}")
        all_ok = all_ok and res.ok
    return 0 if all_ok else 1


def cmd_curves(args) -> int:
    model = make_cone(args.n)
    if not (0.0 <= args.t_min < args.t_max <= 1.0) or args.points < 2:
        raise InvalidInputError("curves grid needs 0 <= t-min < t-max <= 1 "
                                "and at least 2 points")
    if args.t_min > 0.0:
        grid = np.logspace(math.log10(args.t_min), math.log10(args.t_max),
                           args.points)
    else:
        grid = np.linspace(args.t_min, args.t_max, args.points)
    n = model.n
    names = (["t"]
             + [f"v_{c}" for c in _coord_names(n)]
             + [f"w_{c}" for c in _coord_names(n)]
             + ["inner_vw", "h_norm", "residual_norm"])
    lines = [",".join(names)]
    for t in grid:
        t = float(t)
        v = polar_curve(model, t)
        w = normal_curve(model, t)
        row = ([t] + list(v.coords) + list(w.coords)
               + [float(v.coords @ w.coords), curve_step(model, t).norm(),
                  _residual_norm_any(model, t)])
        lines.append(",".join(format(val, ".17g") for val in row))
        if not membership_polar_shadow((v.x1, v.x2, v.x3), model, tol=1e-9):
            raise NumericFailureError(f"curve point at t={t:g} left the "
                                      "polar shadow")
    _write_output("\n".join(lines) + "\n", args.out)
    return 0


def _coord_names(n: int):
    return (["x1", "x2", "x3"]
            + [f"y{i}" for i in range(1, n)]
            + [f"z{i}" for i in range(1, n)])


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {"probe": cmd_probe, "project": cmd_project,
               "verify": cmd_verify, "curves": cmd_curves}[args.command]
    try:
        return handler(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericFailureError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
