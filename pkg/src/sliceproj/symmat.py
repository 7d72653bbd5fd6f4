"""Minimal dense symmetric-matrix kernel.

Provides closed-form 2x2 spectral decompositions, blockwise PSD projection
for block-diagonal matrices built from 2x2 blocks, and a cyclic Jacobi
eigensolver for full symmetric matrices. The Jacobi solver is deliberately
independent of the closed-form 2x2 path so the two can cross-check each
other.

All operations are pure functions of their inputs and safe for unrestricted
concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericFailureError

RT2 = math.sqrt(2.0)

# Desk-scale guard for the dense eigensolver.
JACOBI_MAX_DIM = 200
JACOBI_MAX_SWEEPS = 50


@dataclass(frozen=True)
class Sym2:
    """Symmetric 2x2 matrix stored as the three scalars (a, b, c).

    a is the (1,1) entry, b the off-diagonal, c the (2,2) entry.
    """

    a: float
    b: float
    c: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, self.c]])

    def norm(self) -> float:
        """Frobenius norm (off-diagonal counted twice)."""
        return math.sqrt(self.a * self.a + 2.0 * self.b * self.b + self.c * self.c)

    def is_finite(self) -> bool:
        return math.isfinite(self.a) and math.isfinite(self.b) and math.isfinite(self.c)


@dataclass(frozen=True)
class Spectral2:
    """Spectral data of a Sym2: eig1 >= eig2 and the rotation angle of the
    orthonormal eigenbasis, normalized to (-pi/2, pi/2]."""

    eig1: float
    eig2: float
    angle: float

    def reconstruct(self) -> Sym2:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return Sym2(
            self.eig1 * c * c + self.eig2 * s * s,
            (self.eig1 - self.eig2) * s * c,
            self.eig1 * s * s + self.eig2 * c * c,
        )


@dataclass(frozen=True)
class SymMatrix:
    """General d x d symmetric matrix in packed lower-triangular storage.

    ``packed`` holds the d(d+1)/2 lower-triangle entries row-major.
    """

    dim: int
    packed: np.ndarray

    def __post_init__(self):
        if self.dim <= 0:
            raise InvalidInputError("SymMatrix dimension must be positive")
        packed = np.asarray(self.packed, dtype=float)
        if packed.shape != (self.dim * (self.dim + 1) // 2,):
            raise InvalidInputError(
                f"packed storage must hold {self.dim * (self.dim + 1) // 2} entries"
            )
        object.__setattr__(self, "packed", packed)

    @classmethod
    def from_dense(cls, mat) -> "SymMatrix":
        mat = np.asarray(mat, dtype=float)
        d = mat.shape[0]
        idx = np.tril_indices(d)
        return cls(d, mat[idx])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        out[np.tril_indices(self.dim)] = self.packed
        out = out + out.T - np.diag(np.diag(out))
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_dense()))


@dataclass(frozen=True)
class BlockSymMatrix:
    """Block-diagonal element of S^(4n-2): an ordered list of 2n-1 symmetric
    2x2 blocks, stored as an (2n-1, 3) array of (a, b, c) rows.

    Block order is fixed: the coupling block first, then the y-chain blocks
    in ascending index, then the z-chain blocks in ascending index.
    """

    n: int
    blocks: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInputError("cone index n must be >= 2")
        blocks = np.asarray(self.blocks, dtype=float)
        if blocks.shape != (2 * self.n - 1, 3):
            raise InvalidInputError(
                f"expected {2 * self.n - 1} blocks of 3 entries, got shape {blocks.shape}"
            )
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_blocks(cls, n: int, blocks) -> "BlockSymMatrix":
        rows = np.array([[blk.a, blk.b, blk.c] for blk in blocks], dtype=float)
        return cls(n, rows)

    def block(self, k: int) -> Sym2:
        a, b, c = self.blocks[k]
        return Sym2(float(a), float(b), float(c))

    def block_count(self) -> int:
        return 2 * self.n - 1

    def to_full(self) -> SymMatrix:
        """Assemble the (4n-2) x (4n-2) block-diagonal matrix."""
        d = 4 * self.n - 2
        out = np.zeros((d, d))
        for k, (a, b, c) in enumerate(self.blocks):
            out[2 * k, 2 * k] = a
            out[2 * k, 2 * k + 1] = b
            out[2 * k + 1, 2 * k] = b
            out[2 * k + 1, 2 * k + 1] = c
        return SymMatrix.from_dense(out)

    @classmethod
    def from_full(cls, n: int, mat: SymMatrix) -> "BlockSymMatrix":
        """Extract the 2x2 diagonal blocks of a (4n-2)-dimensional matrix."""
        dense = mat.to_dense()
        if dense.shape[0] != 4 * n - 2:
            raise InvalidInputError("matrix dimension does not match 4n-2")
        rows = np.empty((2 * n - 1, 3))
        for k in range(2 * n - 1):
            rows[k] = (dense[2 * k, 2 * k], dense[2 * k, 2 * k + 1],
                       dense[2 * k + 1, 2 * k + 1])
        return cls(n, rows)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.blocks[:, 0] ** 2
                                    + 2.0 * self.blocks[:, 1] ** 2
                                    + self.blocks[:, 2] ** 2)))

    def inner(self, other: "BlockSymMatrix") -> float:
        """Trace inner product with another block matrix of the same shape."""
        s, o = self.blocks, other.blocks
        return float(np.sum(s[:, 0] * o[:, 0] + 2.0 * s[:, 1] * o[:, 1]
                            + s[:, 2] * o[:, 2]))


def eig2(m: Sym2) -> Spectral2:
    """Closed-form spectral decomposition of a symmetric 2x2 matrix.

    Uses the half-trace +- sqrt(half-difference^2 + b^2) form with the
    larger-magnitude root computed first and the other recovered from the
    determinant, which avoids cancellation near repeated eigenvalues.
    """
    if not m.is_finite():
        raise InvalidInputError("eig2 requires finite entries")
    half_tr = 0.5 * (m.a + m.c)
    half_diff = 0.5 * (m.a - m.c)
    r = math.hypot(half_diff, m.b)
    if r == 0.0:
        return Spectral2(half_tr, half_tr, 0.0)
    # larger-magnitude root directly, the other from the determinant; this
    # keeps the small eigenvalue accurate near repeated or near-singular cases
    if half_tr >= 0.0:
        big = half_tr + r
        small = (m.a * m.c - m.b * m.b) / big if big != 0.0 else half_tr - r
        e1, e2 = big, min(small, big)
    else:
        big = half_tr - r
        small = (m.a * m.c - m.b * m.b) / big
        e1, e2 = max(small, big), big
    # (cos angle, sin angle) spans the eigenspace of half_tr + r, which is
    # always the larger eigenvalue; atan2 lands in (-pi, pi], so angle is
    # already in (-pi/2, pi/2]
    angle = 0.5 * math.atan2(2.0 * m.b, m.a - m.c)
    return Spectral2(e1, e2, angle)


def psd_project_2(m: Sym2) -> Sym2:
    """Metric projection of a symmetric 2x2 matrix onto the PSD cone."""
    spec = eig2(m)
    if spec.eig2 >= 0.0:
        return m
    if spec.eig1 <= 0.0:
        return Sym2(0.0, 0.0, 0.0)
    return Spectral2(spec.eig1, 0.0, spec.angle).reconstruct()


def psd_clip_rows(rows: np.ndarray) -> np.ndarray:
    """Vectorized blockwise PSD projection on an (K, 3) array of (a, b, c) rows.

    Same closed form as :func:`psd_project_2`; used by the solvers' hot loops.
    """
    a = rows[:, 0]
    b = rows[:, 1]
    c = rows[:, 2]
    half_tr = 0.5 * (a + c)
    half_diff = 0.5 * (a - c)
    r = np.hypot(half_diff, b)
    e1 = half_tr + r
    e2 = half_tr - r
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(r > 0.0, e1 / (2.0 * r), 0.0)
    out = np.empty_like(rows)
    out[:, 0] = scale * (r + half_diff)
    out[:, 1] = scale * b
    out[:, 2] = scale * (r - half_diff)
    keep = e2 >= 0.0
    out[keep] = rows[keep]
    out[e1 <= 0.0] = 0.0
    return out


def psd_project_block(mat: BlockSymMatrix) -> BlockSymMatrix:
    """Blockwise PSD projection of a block-diagonal matrix.

    The PSD projection of a block-diagonal matrix decomposes over the
    diagonal blocks, so each 2x2 block is projected independently.
    """
    if not np.all(np.isfinite(mat.blocks)):
        raise InvalidInputError("psd_project_block requires finite entries")
    return BlockSymMatrix(mat.n, psd_clip_rows(mat.blocks))


def _rotate(A: np.ndarray, V: np.ndarray, p: int, q: int) -> None:
    apq = A[p, q]
    tau = (A[q, q] - A[p, p]) / (2.0 * apq)
    t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    col_p = A[:, p].copy()
    col_q = A[:, q].copy()
    A[:, p] = c * col_p - s * col_q
    A[:, q] = s * col_p + c * col_q
    row_p = A[p, :].copy()
    row_q = A[q, :].copy()
    A[p, :] = c * row_p - s * row_q
    A[q, :] = s * row_p + c * row_q
    A[p, q] = 0.0
    A[q, p] = 0.0
    vp = V[:, p].copy()
    vq = V[:, q].copy()
    V[:, p] = c * vp - s * vq
    V[:, q] = s * vp + c * vq


def jacobi_eig(mat, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a full symmetric matrix by cyclic Jacobi sweeps.

    Parameters
    ----------
    mat : SymMatrix or array_like
        Symmetric matrix, dimension at most 200.
    max_sweeps : int
        Sweep budget before declaring non-convergence.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Eigenvalues sorted descending (ties broken by original index order)
        and the matching orthonormal eigenvector columns.
    """
    A = mat.to_dense() if isinstance(mat, SymMatrix) else np.array(mat, dtype=float)
    d = A.shape[0]
    if A.shape != (d, d):
        raise InvalidInputError("jacobi_eig requires a square matrix")
    if d > JACOBI_MAX_DIM:
        raise InvalidInputError(f"jacobi_eig supports dimension <= {JACOBI_MAX_DIM}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("jacobi_eig requires finite entries")
    A = 0.5 * (A + A.T)
    V = np.eye(d)
    norm0 = np.linalg.norm(A)
    if norm0 == 0.0 or d == 1:
        return np.diag(A).copy(), V
    target = 1e-13 * norm0
    for _ in range(max_sweeps):
        # norm of the off-diagonal part, summed directly so it can reach
        # machine floor instead of the rounding floor of ||A||^2 - ||diag||^2
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= target:
            break
        # skip rotations on entries carrying a negligible share of the
        # current off-diagonal mass
        thresh = off / (100.0 * d * d)
        for p in range(d - 1):
            for q in range(p + 1, d):
                if abs(A[p, q]) > thresh:
                    _rotate(A, V, p, q)
    else:
        raise NumericFailureError(
            f"Jacobi sweeps did not converge within {max_sweeps} sweeps"
        )
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def read_symmatrix(text: str) -> SymMatrix:
    """Parse the SymMatrix text format: first line d, then d(d+1)/2 reals."""
    lines = text.strip().splitlines()
    if not lines:
        raise InvalidInputError("empty SymMatrix input")
    try:
        d = int(lines[0].split()[0])
    except (ValueError, IndexError) as exc:
        raise InvalidInputError("first line must hold the dimension d") from exc
    tokens = " ".join(lines[1:]).split()
    expected = d * (d + 1) // 2
    if len(tokens) != expected:
        raise InvalidInputError(f"expected {expected} entries, got {len(tokens)}")
    try:
        vals = np.array([float(tok) for tok in tokens])
    except ValueError as exc:
        raise InvalidInputError("non-numeric entry in SymMatrix input") from exc
    return SymMatrix(d, vals)


def write_symmatrix(mat: SymMatrix) -> str:
    lines = [str(mat.dim)]
    pos = 0
    for row in range(mat.dim):
        chunk = mat.packed[pos:pos + row + 1]
        lines.append(" ".join(format(v, ".17g") for v in chunk))
        pos += row + 1
    return "\n".join(lines) + "\n"


def read_block_matrix(text: str) -> BlockSymMatrix:
    """Parse the BlockSymMatrix text format: first line n, then 3(2n-1) reals."""
    lines = text.strip().splitlines()
    if not lines:
        raise InvalidInputError("empty BlockSymMatrix input")
    try:
        n = int(lines[0].split()[0])
    except (ValueError, IndexError) as exc:
        raise InvalidInputError("first line must hold the cone index n") from exc
    tokens = " ".join(lines[1:]).split()
    expected = 3 * (2 * n - 1)
    if len(tokens) != expected:
        raise InvalidInputError(f"expected {expected} entries, got {len(tokens)}")
    try:
        vals = np.array([float(tok) for tok in tokens]).reshape(-1, 3)
    except ValueError as exc:
        raise InvalidInputError("non-numeric entry in BlockSymMatrix input") from exc
    return BlockSymMatrix(n, vals)


def write_block_matrix(mat: BlockSymMatrix) -> str:
    lines = [str(mat.n)]
    for a, b, c in mat.blocks:
        lines.append(" ".join(format(v, ".17g") for v in (a, b, c)))
    return "\n".join(lines) + "\n"
