"""Metric-projection solvers for the cone family and the PSD-cone slice.

Four routes are provided and kept deliberately independent so they can
cross-validate each other:

* ADMM splitting for the projection onto the cone itself, through its LMI
  form, with an active-set refinement step (see below);
* the Moreau decomposition for the projection onto the polar cone;
* Dykstra's alternating projections for the slice (PSD cone intersected
  with the range of the LMI map);
* a fixed-point iteration for the same slice, driven by repeated projected
  gradient steps onto the cone.

Projections whose answer sits at (or near) the cone's apex lack strict
complementarity, and every first-order splitting method degrades to a
sublinear crawl there. The ADMM solver therefore periodically attempts an
active-set Newton refinement in conically rescaled variables; the refined
point is accepted only when an exact optimality certificate holds (matched
KKT residual, nonnegative multipliers, feasible direction), otherwise the
raw ADMM iterate is kept. The certificate uses nothing beyond the cone's
defining inequalities, so the refined answers remain an independent check
on any closed-form prediction.

Solver invocations are independent and thread-safe given a shared immutable
ConeModel; each call owns its iterate state.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .cones import ConeModel, ConePoint
from .errors import InvalidInputError
from .symmat import RT2, BlockSymMatrix, SymMatrix, jacobi_eig, psd_clip_rows

log = logging.getLogger("sliceproj.project")

# relative improvement below which an iteration no longer counts as progress
_STALL_FACTOR = 1e-3
_STALL_WINDOW = 2000
_CERT_TOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the iterative projectors."""

    tol: float = 1e-9
    max_iter: int = 200_000
    rho: float = 1.0
    over_relax: float = 1.0
    polish: bool = True

    def __post_init__(self):
        if not (self.tol > 0.0):
            raise InvalidInputError("tol must be positive")
        if self.max_iter < 1:
            raise InvalidInputError("max_iter must be >= 1")
        if not (self.rho > 0.0):
            raise InvalidInputError("rho must be positive")
        if not (1.0 <= self.over_relax <= 1.8):
            raise InvalidInputError("over_relax must lie in [1, 1.8]")


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    final_residual: float
    converged: bool

    def __post_init__(self):
        object.__setattr__(self, "iterations", int(self.iterations))
        object.__setattr__(self, "final_residual", float(self.final_residual))
        object.__setattr__(self, "converged", bool(self.converged))

    def to_json_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "converged": self.converged,
        }


def _psd_clip_weighted(flat: np.ndarray) -> np.ndarray:
    """Blockwise PSD projection of a weighted-coordinate block vector."""
    rows = flat.reshape(-1, 3).copy()
    rows[:, 1] /= RT2
    rows = psd_clip_rows(rows)
    rows[:, 1] *= RT2
    return rows.ravel()


def _block_min_eigs(model: ConeModel, p: np.ndarray) -> np.ndarray:
    rows = (model.lmi_weighted @ p).reshape(-1, 3)
    a = rows[:, 0]
    b = rows[:, 1] / RT2
    c = rows[:, 2]
    return 0.5 * (a + c) - np.hypot(0.5 * (a - c), b)


def _newton_polish(model: ConeModel, q: np.ndarray, p0: np.ndarray, J,
                   max_newton: int = 60):
    """Solve the rescaled KKT system on the active set J and certify it.

    Unknowns are (mu, pi, nu): the candidate projection is mu * pi with pi
    of unit norm, nu the conically rescaled multipliers of the active block
    determinants. Rescaling keeps the system well conditioned even as the
    projection shrinks into the apex. Returns (p_hat, certificate_residual)
    or None when the certificate fails.
    """
    d = model.dim()
    scale = 1.0 + float(np.linalg.norm(q))
    mu = float(np.linalg.norm(p0))
    if not mu > 1e-13 * scale:
        return None
    pi = p0 / mu
    Bs = [model.det_forms[j] for j in J]
    Bpi = [B @ pi for B in Bs]
    nJ = len(J)
    if nJ:
        M = np.column_stack([-2.0 * v for v in Bpi])
        nu, *_ = np.linalg.lstsq(M, q - mu * pi, rcond=None)
    else:
        nu = np.zeros(0)

    def residual(mu, pi, nu):
        f1 = mu * pi - q
        for k in range(nJ):
            f1 -= 2.0 * nu[k] * (Bs[k] @ pi)
        f2 = np.array([pi @ (Bs[k] @ pi) for k in range(nJ)])
        return np.concatenate([f1, f2, [pi @ pi - 1.0]])

    u = np.concatenate([[mu], pi, nu])
    fu = residual(u[0], u[1:1 + d], u[1 + d:])
    best = np.linalg.norm(fu, np.inf)
    for _ in range(max_newton):
        if best <= 1e-15 * scale:
            break
        mu, pi, nu = u[0], u[1:1 + d], u[1 + d:]
        Bpi = [B @ pi for B in Bs]
        jac = np.zeros((d + nJ + 1, d + nJ + 1))
        S = mu * np.eye(d)
        for k in range(nJ):
            S -= 2.0 * nu[k] * Bs[k]
        jac[:d, 0] = pi
        jac[:d, 1:1 + d] = S
        for k in range(nJ):
            jac[:d, 1 + d + k] = -2.0 * Bpi[k]
            jac[d + k, 1:1 + d] = 2.0 * Bpi[k]
        jac[d + nJ, 1:1 + d] = 2.0 * pi
        try:
            du = np.linalg.solve(jac, -fu)
        except np.linalg.LinAlgError:
            return None
        step = 1.0
        norm0 = np.linalg.norm(fu)
        for _ in range(30):
            u_try = u + step * du
            f_try = residual(u_try[0], u_try[1:1 + d], u_try[1 + d:])
            if np.linalg.norm(f_try) < (1.0 - 0.25 * step) * norm0:
                u, fu = u_try, f_try
                best = np.linalg.norm(fu, np.inf)
                break
            step *= 0.5
        else:
            break
    if best > _CERT_TOL * scale:
        return None
    mu, pi, nu = float(u[0]), u[1:1 + d], u[1 + d:]
    # certificate: nonnegative multipliers, nonnegative scale, feasible
    # direction; together with the matched residual these prove optimality
    nu_scale = 1.0 + (np.abs(nu).max() if nJ else 0.0)
    if mu < -1e-11 * scale or np.any(nu < -1e-9 * nu_scale):
        return None
    if _block_min_eigs(model, pi).min() < -1e-10:
        return None
    return max(mu, 0.0) * pi, best


def _attempt_polish(model: ConeModel, q: np.ndarray, p: np.ndarray,
                    dual_flat: np.ndarray):
    """Try active-set candidates derived from the dual and primal iterates."""
    nblocks = 2 * model.n - 1
    dual_rows = np.abs(dual_flat.reshape(-1, 3)).max(axis=1)
    dual_ref = max(float(dual_rows.max()), 1e-300)
    j_dual = [j for j in range(nblocks) if dual_rows[j] > 1e-6 * dual_ref]
    rows = (model.lmi_weighted @ p).reshape(-1, 3)
    dets = rows[:, 0] * rows[:, 2] - (rows[:, 1] / RT2) ** 2
    det_ref = max(float(np.abs(dets).max()), float(p @ p), 1e-300)
    j_primal = [j for j in range(nblocks) if abs(dets[j]) <= 1e-5 * det_ref]
    seen = []
    for J in (j_dual, j_primal, list(range(nblocks))):
        if J in seen:
            continue
        seen.append(J)
        out = _newton_polish(model, q, p, J)
        if out is not None:
            return out
    return None


def _project_cone_arr(model: ConeModel, q: np.ndarray, cfg: SolverConfig):
    """ADMM projection onto the cone, on raw coordinate arrays.

    Splitting: p-update solves (I + rho A*A) p = q + rho A*(Z - U), Z-update
    is the blockwise PSD projection of A p + U, U is the scaled dual.
    Stops on max(primal, dual) residual <= tol, on a certified refinement,
    or when the residual stalls at its attainable floor.
    """
    d = model.dim()
    scale = 1.0 + float(np.linalg.norm(q))
    if float(np.linalg.norm(q)) == 0.0:
        return np.zeros(d), SolveStats(0, 0.0, True)
    if _block_min_eigs(model, q).min() >= -1e-13 * scale:
        return q.copy(), SolveStats(0, 0.0, True)
    W = model.lmi_weighted
    rho = cfg.rho
    alpha = cfg.over_relax
    factor = cho_factor(np.eye(d) + rho * model.gram_dense)
    p = np.zeros(d)
    Z = np.zeros(W.shape[0])
    U = np.zeros(W.shape[0])
    res = math.inf
    best_res = math.inf
    best_iter = 0
    polish_at = 256
    k = 0
    while k < cfg.max_iter:
        k += 1
        p = cho_solve(factor, q + rho * (W.T @ (Z - U)))
        Ap = W @ p
        Ap_rel = Ap if alpha == 1.0 else alpha * Ap + (1.0 - alpha) * Z
        Z_new = _psd_clip_weighted(Ap_rel + U)
        U = U + Ap_rel - Z_new
        r_prim = float(np.linalg.norm(Ap - Z_new))
        r_dual = rho * float(np.linalg.norm(W.T @ (Z_new - Z)))
        Z = Z_new
        res = max(r_prim, r_dual)
        if res < best_res * (1.0 - _STALL_FACTOR):
            best_res = res
            best_iter = k
        stalled = k - best_iter > _STALL_WINDOW
        if cfg.polish and (res <= cfg.tol or k == polish_at or stalled
                           or k == cfg.max_iter):
            if k == polish_at:
                polish_at *= 2
            refined = _attempt_polish(model, q, p, U)
            if refined is not None:
                p_hat, cert_res = refined
                return p_hat, SolveStats(k, cert_res, cert_res <= cfg.tol)
        if res <= cfg.tol:
            return p, SolveStats(k, res, True)
        if stalled:
            log.debug("cone projection stalled at residual %.3e after %d "
                      "iterations", res, k)
            break
    return p, SolveStats(k, res, res <= cfg.tol)


def project_cone(model: ConeModel, q: ConePoint, cfg: SolverConfig | None = None):
    """Metric projection onto the cone.

    Returns the nearest cone member to q and the solve statistics. The
    optimizer is ADMM over the LMI splitting plus the certified active-set
    refinement described in the module docstring.
    """
    cfg = cfg or SolverConfig()
    if q.n != model.n:
        raise InvalidInputError(f"point has n={q.n}, model has n={model.n}")
    p, stats = _project_cone_arr(model, q.coords, cfg)
    return ConePoint(model.n, p), stats


def project_polar(model: ConeModel, q: ConePoint, cfg: SolverConfig | None = None):
    """Metric projection onto the polar cone via the Moreau decomposition:
    the polar part is q minus the cone part, and the two are orthogonal."""
    p, stats = project_cone(model, q, cfg)
    return ConePoint(model.n, q.coords - p.coords), stats


def _range_project_flat(model: ConeModel, flat: np.ndarray) -> np.ndarray:
    coeff = model.solve_gram(model.lmi_weighted.T @ flat)
    return model.lmi_weighted @ coeff


def project_range(model: ConeModel, X: BlockSymMatrix) -> BlockSymMatrix:
    """Orthogonal projection onto the range of the LMI map.

    Returns the image of the Gram-system solution; the residual is
    annihilated by the adjoint, which is the defining property of the
    orthogonal projection onto a range space.
    """
    if X.n != model.n:
        raise InvalidInputError(f"matrix has n={X.n}, model has n={model.n}")
    flat = X.blocks.copy()
    flat[:, 1] *= RT2
    out = _range_project_flat(model, flat.ravel()).reshape(-1, 3)
    out[:, 1] /= RT2
    return BlockSymMatrix(model.n, out)


def _dykstra_flat(model: ConeModel, x0: np.ndarray, cfg: SolverConfig,
                  psd_step):
    """Dykstra alternation between the PSD cone and the range subspace.

    The correction term is carried on the PSD step only; the subspace is
    affine, so its step needs no correction.
    """
    x = x0.copy()
    corr = np.zeros_like(x0)
    res = math.inf
    best_res = math.inf
    best_iter = 0
    k = 0
    while k < cfg.max_iter:
        k += 1
        y = psd_step(x + corr)
        corr = x + corr - y
        x_new = _range_project_flat(model, y)
        gap = float(np.linalg.norm(y - x_new))
        step = float(np.linalg.norm(x_new - x))
        x = x_new
        res = max(gap, step)
        if res <= cfg.tol:
            return x, SolveStats(k, res, True)
        if res < best_res * (1.0 - _STALL_FACTOR):
            best_res = res
            best_iter = k
        if k - best_iter > _STALL_WINDOW:
            log.debug("Dykstra stalled at residual %.3e after %d iterations",
                      res, k)
            break
    return x, SolveStats(k, res, res <= cfg.tol)


def project_slice_dykstra(model: ConeModel, X, cfg: SolverConfig | None = None):
    """Project onto the slice (PSD cone intersected with the LMI range).

    Block-diagonal inputs keep the fast closed-form 2x2 PSD step; full
    symmetric inputs run the PSD step through the Jacobi eigensolver.
    Returns an object of the same kind as the input plus solve statistics.
    """
    cfg = cfg or SolverConfig()
    if isinstance(X, BlockSymMatrix):
        if X.n != model.n:
            raise InvalidInputError(f"matrix has n={X.n}, model has n={model.n}")
        flat = X.blocks.copy()
        flat[:, 1] *= RT2
        out, stats = _dykstra_flat(model, flat.ravel(), cfg, _psd_clip_weighted)
        rows = out.reshape(-1, 3)
        rows[:, 1] /= RT2
        return BlockSymMatrix(model.n, rows), stats
    if isinstance(X, SymMatrix):
        d = 4 * model.n - 2
        if X.dim != d:
            raise InvalidInputError(f"matrix dimension {X.dim} does not match {d}")
        dense0 = X.to_dense()

        def to_flat(dense):
            rows = np.empty((2 * model.n - 1, 3))
            for j in range(2 * model.n - 1):
                rows[j] = (dense[2 * j, 2 * j], RT2 * dense[2 * j, 2 * j + 1],
                           dense[2 * j + 1, 2 * j + 1])
            return rows.ravel()

        # state kept as dense matrices so the PSD step sees the full matrix
        x = dense0.copy()
        corr = np.zeros_like(x)
        res = math.inf
        k = 0
        stats = SolveStats(0, math.inf, False)
        while k < cfg.max_iter:
            k += 1
            w, V = jacobi_eig(SymMatrix.from_dense(x + corr))
            y = (V * np.maximum(w, 0.0)) @ V.T
            corr = x + corr - y
            flat = _range_project_flat(model, to_flat(y))
            rows = flat.reshape(-1, 3)
            x_new = np.zeros_like(x)
            for j in range(2 * model.n - 1):
                x_new[2 * j, 2 * j] = rows[j, 0]
                x_new[2 * j, 2 * j + 1] = rows[j, 1] / RT2
                x_new[2 * j + 1, 2 * j] = rows[j, 1] / RT2
                x_new[2 * j + 1, 2 * j + 1] = rows[j, 2]
            gap = float(np.linalg.norm(y - x_new))
            step = float(np.linalg.norm(x_new - x))
            x = x_new
            res = max(gap, step)
            if res <= cfg.tol:
                return SymMatrix.from_dense(x), SolveStats(k, res, True)
        return SymMatrix.from_dense(x), SolveStats(k, res, False)
    raise InvalidInputError("input must be a BlockSymMatrix or SymMatrix")


def project_slice_fixedpoint(model: ConeModel, X: BlockSymMatrix,
                             cfg: SolverConfig | None = None,
                             gamma: float | None = None):
    """Project onto the slice through the fixed-point map of projected
    gradient steps: z <- Pi_cone(z - gamma (A*A z - A*X)), answer A z.

    Any step 0 < gamma < 1/lam_max(A*A) yields the same fixed point; the
    default is the model's precomputed 0.9 / lam_max. Inner cone projections
    run at tol/100 so inexact inner solves do not stall the outer loop.
    """
    cfg = cfg or SolverConfig()
    if X.n != model.n:
        raise InvalidInputError(f"matrix has n={X.n}, model has n={model.n}")
    gamma = model.gamma if gamma is None else float(gamma)
    if not (0.0 < gamma < 1.0 / model.lam_max):
        raise InvalidInputError("gamma must lie in (0, 1/lam_max)")
    flat = X.blocks.copy()
    flat[:, 1] *= RT2
    target = model.lmi_weighted.T @ flat.ravel()
    inner_cfg = replace(cfg, tol=cfg.tol / 100.0)
    z = np.zeros(model.dim())
    res = math.inf
    inner_ok = True
    best_res = math.inf
    best_iter = 0
    k = 0
    while k < cfg.max_iter:
        k += 1
        point = z - gamma * (model.gram_dense @ z - target)
        z_new, inner_stats = _project_cone_arr(model, point, inner_cfg)
        if inner_stats.final_residual > cfg.tol:
            inner_ok = False
        res = float(np.linalg.norm(z_new - z))
        z = z_new
        if res <= cfg.tol:
            break
        if res < best_res * (1.0 - _STALL_FACTOR):
            best_res = res
            best_iter = k
        if k - best_iter > 50:
            log.debug("fixed-point projector stalled at %.3e after %d outer "
                      "iterations", res, k)
            break
    out = (model.lmi_weighted @ z).reshape(-1, 3)
    out[:, 1] /= RT2
    converged = res <= cfg.tol and inner_ok
    return BlockSymMatrix(model.n, out), SolveStats(k, res, converged)
