"""The LMI-representable cone family, its curves, normals, and duality tools.

For an index n >= 2 the cone lives in R^(2n+1) with coordinates
(x1, x2, x3, y1..y_{n-1}, z1..z_{n-1}) and is cut out by the inequalities

    x3^2 >= y1^2 + z1^2,  x3 >= 0,
    x3*y_i >= y_{i+1}^2   (i = 1..n-2),   x3*y_{n-1} >= x1^2,
    x3*z_i >= z_{i+1}^2   (i = 1..n-2),   x3*z_{n-1} >= x2^2.

Equivalently it is the preimage of the PSD cone under a linear map into
block-diagonal symmetric matrices with 2n-1 blocks of size 2x2 (one coupling
block plus the two doubling chains). Its shadow on (x1, x2, x3) is the
kappa-norm cone { ||(x1,x2)||_kappa <= x3 } with kappa = 2^n, whose polar is
governed by the conjugate exponent lambda = 2^n / (2^n - 1).

A ConeModel is immutable after construction and may be shared read-only
across concurrent workers; every operation here is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import InvalidInputError
from .symmat import RT2, BlockSymMatrix, SymMatrix

N_MIN = 2
N_MAX = 12


@dataclass(frozen=True)
class ConePoint:
    """Point of the ambient space R^(2n+1) with named coordinate groups."""

    n: int
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.shape != (2 * self.n + 1,):
            raise InvalidInputError(
                f"expected {2 * self.n + 1} coordinates for n={self.n}"
            )
        if not np.all(np.isfinite(coords)):
            raise InvalidInputError("ConePoint coordinates must be finite")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_parts(cls, n, x1, x2, x3, y, z) -> "ConePoint":
        coords = np.concatenate([[x1, x2, x3], np.asarray(y, dtype=float),
                                 np.asarray(z, dtype=float)])
        return cls(n, coords)

    @property
    def x1(self) -> float:
        return float(self.coords[0])

    @property
    def x2(self) -> float:
        return float(self.coords[1])

    @property
    def x3(self) -> float:
        return float(self.coords[2])

    @property
    def y(self) -> np.ndarray:
        return self.coords[3:self.n + 2]

    @property
    def z(self) -> np.ndarray:
        return self.coords[self.n + 2:]

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))


def _block_functionals(n: int):
    """Rows (alpha, beta, gamma) of each 2x2 block as linear functionals.

    Block k of the LMI image of p is [[alpha.p, beta.p], [beta.p, gamma.p]].
    Order: coupling block, y-chain ascending, z-chain ascending. The chain
    terminators put the spare variable (x1 or x2) on the off-diagonal so the
    PSD condition reproduces x3*y_{n-1} >= x1^2 and x3*z_{n-1} >= x2^2.
    """
    d = 2 * n + 1
    eye = np.eye(d)
    iy = lambda i: 2 + i
    iz = lambda i: n + 1 + i
    rows = [(eye[2] + eye[iy(1)], eye[iz(1)], eye[2] - eye[iy(1)])]
    for i in range(1, n - 1):
        rows.append((eye[2], eye[iy(i + 1)], eye[iy(i)]))
    rows.append((eye[2], eye[0], eye[iy(n - 1)]))
    for i in range(1, n - 1):
        rows.append((eye[2], eye[iz(i + 1)], eye[iz(i)]))
    rows.append((eye[2], eye[1], eye[iz(n - 1)]))
    return rows


def _weighted_matrix(n: int) -> np.ndarray:
    """Dense matrix of the LMI map in weighted block coordinates.

    Block entries are flattened to (a, sqrt(2) b, c) so the Euclidean inner
    product of the flattened vectors equals the trace inner product.
    """
    rows = _block_functionals(n)
    out = np.zeros((3 * len(rows), 2 * n + 1))
    for k, (alpha, beta, gamma) in enumerate(rows):
        out[3 * k] = alpha
        out[3 * k + 1] = RT2 * beta
        out[3 * k + 2] = gamma
    return out


def _det_forms(n: int):
    """Quadratic forms B_k with p^T B_k p = det(block_k(p))."""
    forms = []
    for alpha, beta, gamma in _block_functionals(n):
        forms.append(0.5 * (np.outer(alpha, gamma) + np.outer(gamma, alpha))
                     - np.outer(beta, beta))
    return forms


@dataclass(frozen=True)
class ConeModel:
    """Everything precomputed for a fixed cone index n.

    kappa and lam are the conjugate exponents 2^n and 2^n/(2^n - 1); gram is
    the Gram operator of the LMI map (positive definite since the map is
    injective) with a Cholesky factorization good for linear solves; gamma
    is the safe step 0.9 / lam_max(gram) for the fixed-point projector.
    """

    n: int
    kappa: float
    lam: float
    gram: SymMatrix
    gram_dense: np.ndarray = field(repr=False)
    gram_factor: tuple = field(repr=False)
    gamma: float
    lam_max: float
    lam_min: float
    lmi_weighted: np.ndarray = field(repr=False)
    det_forms: tuple = field(repr=False)

    def solve_gram(self, rhs: np.ndarray) -> np.ndarray:
        """Solve gram @ x = rhs using the cached factorization."""
        return cho_solve(self.gram_factor, rhs)

    def dim(self) -> int:
        return 2 * self.n + 1


def make_cone(n: int) -> ConeModel:
    """Build the ConeModel for index n (2 <= n <= 12)."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise InvalidInputError("n must be an integer")
    if n < N_MIN or n > N_MAX:
        raise InvalidInputError(f"n must be >= {N_MIN} and <= {N_MAX}")
    weighted = _weighted_matrix(n)
    gram_dense = weighted.T @ weighted
    eigs = np.linalg.eigvalsh(gram_dense)
    if eigs[0] <= 0.0:
        raise InvalidInputError("Gram operator is not positive definite")
    weighted.setflags(write=False)
    gram_dense.setflags(write=False)
    return ConeModel(
        n=int(n),
        kappa=float(2.0 ** n),
        lam=float(2.0 ** n / (2.0 ** n - 1.0)),
        gram=SymMatrix.from_dense(gram_dense),
        gram_dense=gram_dense,
        gram_factor=cho_factor(gram_dense),
        gamma=0.9 / float(eigs[-1]),
        lam_max=float(eigs[-1]),
        lam_min=float(eigs[0]),
        lmi_weighted=weighted,
        det_forms=tuple(_det_forms(n)),
    )


def _check_point(model: ConeModel, p: ConePoint) -> np.ndarray:
    if p.n != model.n:
        raise InvalidInputError(f"point has n={p.n}, model has n={model.n}")
    return p.coords


def lmi_apply(model: ConeModel, p: ConePoint) -> BlockSymMatrix:
    """Apply the LMI map: the block-diagonal matrix whose PSD-ness defines
    membership of p in the cone."""
    coords = _check_point(model, p)
    flat = model.lmi_weighted @ coords
    rows = flat.reshape(-1, 3)
    rows[:, 1] /= RT2
    return BlockSymMatrix(model.n, rows)


def lmi_adjoint(model: ConeModel, mat: BlockSymMatrix) -> ConePoint:
    """Adjoint of the LMI map under the trace inner product on blocks."""
    if mat.n != model.n:
        raise InvalidInputError(f"matrix has n={mat.n}, model has n={model.n}")
    flat = mat.blocks.copy()
    flat[:, 1] *= RT2
    return ConePoint(model.n, model.lmi_weighted.T @ flat.ravel())


def membership_cone(model: ConeModel, p: ConePoint, tol: float = 1e-9):
    """Inequality-description membership test for the cone.

    Returns (inside, worst) where worst is the largest constraint violation
    (positive means violated, negative means interior margin); inside is
    worst <= tol. Cross-checkable against the smallest block eigenvalue of
    lmi_apply(p), which cuts out the same set.
    """
    coords = _check_point(model, p)
    x1, x2, x3 = coords[0], coords[1], coords[2]
    y = coords[3:model.n + 2]
    z = coords[model.n + 2:]
    viol = [-x3, y[0] ** 2 + z[0] ** 2 - x3 ** 2]
    for i in range(model.n - 2):
        viol.append(y[i + 1] ** 2 - x3 * y[i])
        viol.append(z[i + 1] ** 2 - x3 * z[i])
    viol.append(x1 ** 2 - x3 * y[-1])
    viol.append(x2 ** 2 - x3 * z[-1])
    worst = float(max(viol))
    return worst <= tol, worst


def membership_polar_shadow(u, model: ConeModel, tol: float = 1e-9) -> bool:
    """Membership of (u1, u2, u3) in the polar of the cone's 3-variable shadow.

    The shadow is the kappa-norm cone, so its polar is the lambda-norm cone
    pointing down: |u1|^lam + |u2|^lam <= |u3|^lam with u3 <= 0. Fractional
    powers are evaluated on absolute values; the dual-norm derivation forces
    this reading.
    """
    u1, u2, u3 = (float(v) for v in u)
    if not all(math.isfinite(v) for v in (u1, u2, u3)):
        raise InvalidInputError("membership_polar_shadow requires finite input")
    if u3 > tol:
        return False
    lhs = abs(u1) ** model.lam + abs(u2) ** model.lam
    return lhs <= abs(u3) ** model.lam + tol


def one_minus_pow_one_minus(u: float, alpha: float) -> float:
    """Cancellation-safe 1 - (1 - u)^alpha for u in [0, 1], alpha > 0."""
    if u >= 1.0:
        return 1.0
    return -math.expm1(alpha * math.log1p(-u))


def _pow_one_minus(u: float, alpha: float) -> float:
    """(1 - u)^alpha, safe for u close to 0; u = 1 maps to 0 for alpha > 0."""
    if u >= 1.0:
        return 0.0
    return math.exp(alpha * math.log1p(-u))


def _check_t(t: float, lo: float = 0.0, hi: float = 1.0) -> float:
    t = float(t)
    if not (lo <= t <= hi) or not math.isfinite(t):
        raise InvalidInputError(f"t={t} outside [{lo}, {hi}]")
    return t


def polar_curve(model: ConeModel, t: float) -> ConePoint:
    """Boundary curve of the polar cone: (t, (1-t^lam)^(1/lam), -1, 0, ..., 0)."""
    t = _check_t(t)
    coords = np.zeros(model.dim())
    coords[0] = t
    coords[1] = _pow_one_minus(t ** model.lam, 1.0 / model.lam)
    coords[2] = -1.0
    return ConePoint(model.n, coords)


def normal_curve(model: ConeModel, t: float) -> ConePoint:
    """Generator of the normal ray of the polar cone at polar_curve(t).

    Head is (t^(lam/kappa), (1-t^lam)^(1/kappa), 1); the tails follow the
    doubling chains y_i = t^(lam/2^i) and z_i = (1-t^lam)^(1/2^i).
    """
    t = _check_t(t)
    n = model.n
    lam = model.lam
    tl = t ** lam
    coords = np.zeros(model.dim())
    coords[0] = t ** (lam / model.kappa)
    coords[1] = _pow_one_minus(tl, 1.0 / model.kappa)
    coords[2] = 1.0
    for i in range(1, n):
        coords[2 + i] = t ** (lam / 2.0 ** i)
        coords[n + 1 + i] = _pow_one_minus(tl, 1.0 / 2.0 ** i)
    return ConePoint(n, coords)


def curve_step(model: ConeModel, t: float) -> ConePoint:
    """The step h = polar_curve(t) - polar_curve(0), with the second coordinate
    evaluated through expm1/log1p so tiny steps keep full precision."""
    t = _check_t(t)
    coords = np.zeros(model.dim())
    coords[0] = t
    coords[1] = -one_minus_pow_one_minus(t ** model.lam, 1.0 / model.lam)
    return ConePoint(model.n, coords)


def step_normal_inner(model: ConeModel, t: float) -> float:
    """Closed form of <polar_curve(t) - polar_curve(0), normal_curve(t)>.

    Equals 1 - (1 - t^lam)^(1/kappa), which scales like t^lam / kappa as
    t -> 0; computed without subtractive cancellation.
    """
    t = _check_t(t)
    return one_minus_pow_one_minus(t ** model.lam, 1.0 / model.kappa)


@dataclass(frozen=True)
class NormalRay:
    """A boundary point of the polar cone together with the generator of the
    normal ray there: the normal cone is the half-line spanned by the
    generator, which lies in the cone and is orthogonal to the base."""

    base: ConePoint
    generator: ConePoint


def normal_ray(model: ConeModel, t: float) -> NormalRay:
    """Normal-ray data of the polar cone along the counterexample curve."""
    return NormalRay(base=polar_curve(model, t), generator=normal_curve(model, t))


def tangent_project(ray: NormalRay, d: ConePoint) -> ConePoint:
    """Project d onto the tangent cone at the ray's base point.

    The normal cone there is a single ray, so the tangent cone is the
    half-space {d : <d, w> <= 0} and the projection strips the positive
    multiple of the generator: d - max(0, <d, w>) / ||w||^2 * w.
    """
    if d.n != ray.generator.n:
        raise InvalidInputError("dimension mismatch between ray and direction")
    w = ray.generator.coords
    w_sq = float(w @ w)
    if w_sq == 0.0:
        raise InvalidInputError("invalid ray: zero generator")
    coef = max(0.0, float(d.coords @ w)) / w_sq
    return ConePoint(d.n, d.coords - coef * w)


def holder_gap(x, y, p: float) -> float:
    """Gap (right side minus left side) of Hoelder's inequality.

    For conjugate exponents p and q = p/(p-1),
    sum |x_i y_i| <= (sum |x_i|^p)^(1/p) (sum |y_i|^q)^(1/q);
    the gap is nonnegative and vanishes exactly on proportional pairs
    |x_i|^p = c |y_i|^q.
    """
    if not p > 1.0:
        raise InvalidInputError("holder_gap requires p > 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError("holder_gap requires equal-length vectors")
    q = p / (p - 1.0)
    lhs = float(np.sum(np.abs(x * y)))
    rhs = float(np.sum(np.abs(x) ** p) ** (1.0 / p)
                * np.sum(np.abs(y) ** q) ** (1.0 / q))
    return rhs - lhs


def sample_cone(model: ConeModel, rng: np.random.Generator,
                scale: float = 1.0, boundary_bias: float = 0.0) -> ConePoint:
    """Draw a random cone member by walking the doubling chains.

    With boundary_bias = 1 every chain inequality is tight; with 0 the slack
    factors are uniform. Used by the verification suites as an independent
    source of feasible points.
    """
    n = model.n
    x3 = rng.uniform(0.2, 1.0)
    # head block: y1^2 + z1^2 <= x3^2
    ang = rng.uniform(0.0, 0.5 * math.pi)
    rad = x3 * (boundary_bias + (1.0 - boundary_bias) * rng.uniform(0.0, 1.0))
    y_prev, z_prev = rad * math.cos(ang), rad * math.sin(ang)
    y = [y_prev]
    z = [z_prev]
    for _ in range(n - 2):
        fy = boundary_bias + (1.0 - boundary_bias) * rng.uniform(0.0, 1.0)
        fz = boundary_bias + (1.0 - boundary_bias) * rng.uniform(0.0, 1.0)
        y.append(fy * math.sqrt(x3 * y[-1]))
        z.append(fz * math.sqrt(x3 * z[-1]))
    sx1 = rng.choice([-1.0, 1.0])
    sx2 = rng.choice([-1.0, 1.0])
    fy = boundary_bias + (1.0 - boundary_bias) * rng.uniform(0.0, 1.0)
    fz = boundary_bias + (1.0 - boundary_bias) * rng.uniform(0.0, 1.0)
    x1 = sx1 * fy * math.sqrt(x3 * y[-1])
    x2 = sx2 * fz * math.sqrt(x3 * z[-1])
    point = ConePoint.from_parts(n, x1, x2, x3, y, z)
    return ConePoint(n, point.coords * (scale * rng.uniform(0.1, 2.0)))


def read_cone_point(text: str) -> ConePoint:
    """Parse the ConePoint text format: line 1 n, line 2 the 2n+1 coordinates."""
    lines = text.strip().splitlines()
    if len(lines) < 2:
        raise InvalidInputError("ConePoint input needs two lines")
    try:
        n = int(lines[0].split()[0])
    except (ValueError, IndexError) as exc:
        raise InvalidInputError("first line must hold the cone index n") from exc
    tokens = " ".join(lines[1:]).split()
    if len(tokens) != 2 * n + 1:
        raise InvalidInputError(f"expected {2 * n + 1} coordinates, got {len(tokens)}")
    try:
        coords = np.array([float(tok) for tok in tokens])
    except ValueError as exc:
        raise InvalidInputError("non-numeric coordinate in ConePoint input") from exc
    return ConePoint(n, coords)


def write_cone_point(p: ConePoint) -> str:
    coords = " ".join(format(v, ".17g") for v in p.coords)
    return f"{p.n}\n{coords}\n"
