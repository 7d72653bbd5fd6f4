"""Semismoothness-order measurement along the polar cone's boundary curve.

The probed quantity is the directional-derivative residual of the polar
projection at the curve's base point: with h(t) the curve step, the
residual r(t) = h - Pi'(base; h) scales like t^lam while ||h|| scales like
t, so the fitted slope of log r against log t recovers lam and the implied
semismoothness order is slope - 1, to be compared against lam - 1. Exact
mode evaluates the closed form of the residual; numeric mode reproduces it
from projection solves and a one-sided finite difference, with no use of
the closed form.

The projection onto the cone itself shares the polar projection's order;
this transfer is recorded here as a documented claim, while measurements
are made on the polar side only.

Grid points are evaluated independently and may fan out to a thread pool;
report assembly is single threaded and deterministic.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cones import (ConeModel, ConePoint, curve_step, normal_curve, normal_ray,
                    polar_curve, step_normal_inner, tangent_project)
from .errors import InvalidInputError, NumericFailureError
from .project import SolverConfig, _project_cone_arr, project_polar

DEFAULT_T_MIN = 1e-4
DEFAULT_T_MAX = 1e-1
DEFAULT_POINTS = 20
DEFAULT_FD_STEP = 1e-6


@dataclass(frozen=True)
class ProbeReport:
    """Grid of step sizes with the measured residual scaling.

    implied_order is exactly fitted_slope - 1; target_lambda is the
    conjugate exponent the slope should recover.
    """

    n: int
    mode: str
    t_grid: np.ndarray
    h_norms: np.ndarray
    residual_norms: np.ndarray
    fitted_slope: float
    implied_order: float
    target_lambda: float

    def __post_init__(self):
        for name in ("t_grid", "h_norms", "residual_norms"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=float))
        if not (len(self.t_grid) == len(self.h_norms) == len(self.residual_norms)):
            raise InvalidInputError("report vectors must share one length")
        if len(self.t_grid) < 5:
            raise InvalidInputError("report needs at least 5 grid points")
        if np.any(np.diff(self.t_grid) <= 0.0):
            raise InvalidInputError("t_grid must be strictly increasing")

    def summary_line(self) -> str:
        gap = abs(self.fitted_slope - self.target_lambda)
        return (f"n={self.n} slope={self.fitted_slope:.6g} "
                f"implied_order={self.implied_order:.6g} "
                f"target={self.target_lambda - 1.0:.6g} |delta|={gap:.3g}")


def residual_exact(model: ConeModel, t: float):
    """Closed-form residual vector and norm at curve parameter t in (0, 1).

    The residual is the normal-ray component of the curve step: the inner
    product 1 - (1 - t^lam)^(1/kappa) (evaluated cancellation-safely) times
    the unit-normalized generator.
    """
    if not (0.0 < t < 1.0):
        raise InvalidInputError("residual_exact requires t strictly inside (0, 1)")
    w = normal_curve(model, t)
    inner = step_normal_inner(model, t)
    w_sq = float(w.coords @ w.coords)
    vec = ConePoint(model.n, (inner / w_sq) * w.coords)
    return vec, inner / math.sqrt(w_sq)


@dataclass(frozen=True)
class NumericResidual:
    """Solver-based residual at one grid point.

    vector and norm come from the finite-difference variant; norm_analytic
    is the tangent-projection variant, and discrepancy is the distance
    between the two residual vectors.
    """

    vector: ConePoint
    norm: float
    norm_analytic: float
    discrepancy: float


def residual_numeric(model: ConeModel, t: float, cfg: SolverConfig | None = None,
                     fd_step: float = DEFAULT_FD_STEP) -> NumericResidual:
    """Measure the residual at t from projections alone.

    Asserts that both curve endpoints are fixed points of the polar
    projection, then evaluates the directional derivative two ways: the
    analytic tangent projection along the lemma-backed normal ray, and a
    one-sided finite difference of the polar projection (the directional
    derivative of a projection is a one-sided object, so no central
    differencing). Returns the finite-difference residual with both norms.
    """
    cfg = cfg or SolverConfig()
    if not (0.0 < t < 1.0):
        raise InvalidInputError("residual_numeric requires t strictly inside (0, 1)")
    if not (fd_step > 0.0):
        raise InvalidInputError("fd_step must be positive")
    base = polar_curve(model, t)
    origin = polar_curve(model, 0.0)
    for point, label in ((origin, "t=0"), (base, f"t={t:g}")):
        proj, stats = project_polar(model, point, cfg)
        drift = float(np.linalg.norm(proj.coords - point.coords))
        if drift > 10.0 * cfg.tol:
            raise NumericFailureError(
                f"curve point at {label} is not a polar fixed point "
                f"(drift {drift:.3e})", stats=stats)
    h = curve_step(model, t)
    # analytic variant: strip the normal component
    dd_analytic = tangent_project(normal_ray(model, t), h)
    r_analytic = h.coords - dd_analytic.coords
    # finite-difference variant, via the Moreau complement: the polar
    # projection of base + s h equals the input minus its cone projection,
    # so the residual reduces to Pi_cone(base + s h) / s
    probe_point = base.coords + fd_step * h.coords
    tight = replace(cfg, tol=min(cfg.tol, 1e-13))
    cone_part, stats = _project_cone_arr(model, probe_point, tight)
    if stats.final_residual > cfg.tol:
        raise NumericFailureError(
            f"cone projection at t={t:g} reached residual "
            f"{stats.final_residual:.3e} > tol {cfg.tol:.1e}", stats=stats)
    r_fd = cone_part / fd_step
    return NumericResidual(
        vector=ConePoint(model.n, r_fd),
        norm=float(np.linalg.norm(r_fd)),
        norm_analytic=float(np.linalg.norm(r_analytic)),
        discrepancy=float(np.linalg.norm(r_fd - r_analytic)),
    )


def fit_exponent(t_grid, residual_norms):
    """Ordinary least squares of log residual against log t.

    Returns (slope, intercept, max_abs_log_residual_deviation); the last is
    the worst-case fit deviation in log space.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    residual_norms = np.asarray(residual_norms, dtype=float)
    if t_grid.shape != residual_norms.shape or t_grid.ndim != 1:
        raise InvalidInputError("fit_exponent requires matching 1-d grids")
    if len(t_grid) < 5:
        raise InvalidInputError("fit_exponent requires at least 5 points")
    if np.any(residual_norms <= 0.0):
        raise InvalidInputError("fit_exponent requires positive residuals")
    if np.any(t_grid <= 0.0):
        raise InvalidInputError("fit_exponent requires positive t values")
    x = np.log(t_grid)
    y = np.log(residual_norms)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    deviation = float(np.max(np.abs(y - (slope * x + intercept))))
    return float(slope), float(intercept), deviation


def probe_semismoothness(model: ConeModel, mode: str = "exact",
                         t_min: float = DEFAULT_T_MIN,
                         t_max: float = DEFAULT_T_MAX,
                         points: int = DEFAULT_POINTS,
                         cfg: SolverConfig | None = None,
                         fd_step: float = DEFAULT_FD_STEP,
                         jobs: int = 1) -> ProbeReport:
    """Run the scaling probe on a log-spaced grid and fit the exponent.

    Exact mode uses the closed-form residual; numeric mode uses the
    finite-difference variant of :func:`residual_numeric`. The implied
    order is the fitted slope minus one, reported against lam - 1 (since
    the step norm is of order t, which the report's h_norms let callers
    verify).
    """
    if mode not in ("exact", "numeric"):
        raise InvalidInputError(f"unknown probe mode {mode!r}")
    if not (0.0 < t_min < t_max < 1.0):
        raise InvalidInputError("grid endpoints must satisfy 0 < t_min < t_max < 1")
    if points < 5:
        raise InvalidInputError("grid needs at least 5 points")
    cfg = cfg or SolverConfig()
    t_grid = np.logspace(math.log10(t_min), math.log10(t_max), points)
    h_norms = np.array([curve_step(model, t).norm() for t in t_grid])

    if mode == "exact":
        residuals = np.array([residual_exact(model, t)[1] for t in t_grid])
    else:
        def at(i):
            return residual_numeric(model, float(t_grid[i]), cfg, fd_step).norm
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                residuals = np.array(list(pool.map(at, range(points))))
        else:
            residuals = np.array([at(i) for i in range(points)])

    slope, _, _ = fit_exponent(t_grid, residuals)
    return ProbeReport(
        n=model.n,
        mode=mode,
        t_grid=t_grid,
        h_norms=h_norms,
        residual_norms=residuals,
        fitted_slope=slope,
        implied_order=slope - 1.0,
        target_lambda=model.lam,
    )


def report_to_json(report: ProbeReport) -> str:
    payload = {
        "n": report.n,
        "mode": report.mode,
        "t_grid": list(report.t_grid),
        "h_norms": list(report.h_norms),
        "residual_norms": list(report.residual_norms),
        "fitted_slope": report.fitted_slope,
        "implied_order": report.implied_order,
        "target_lambda": report.target_lambda,
    }
    return json.dumps(payload, indent=2) + "\n"


def report_from_json(text: str) -> ProbeReport:
    raw = json.loads(text)
    return ProbeReport(
        n=raw["n"],
        mode=raw["mode"],
        t_grid=np.array(raw["t_grid"]),
        h_norms=np.array(raw["h_norms"]),
        residual_norms=np.array(raw["residual_norms"]),
        fitted_slope=raw["fitted_slope"],
        implied_order=raw["implied_order"],
        target_lambda=raw["target_lambda"],
    )


def report_to_csv(report: ProbeReport) -> str:
    lines = ["t,h_norm,residual_norm"]
    for t, h, r in zip(report.t_grid, report.h_norms, report.residual_norms):
        lines.append(",".join(format(v, ".17g") for v in (t, h, r)))
    lines.append(f"# slope={report.fitted_slope:.17g} "
                 f"implied_order={report.implied_order:.17g} "
                 f"target={report.target_lambda - 1.0:.17g}")
    return "\n".join(lines) + "\n"
