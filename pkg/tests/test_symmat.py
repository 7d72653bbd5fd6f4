"""Kernel checks: 2x2 spectral math, blockwise PSD projection, Jacobi oracle."""

import math

import numpy as np
import pytest

from sliceproj import (BlockSymMatrix, InvalidInputError, Sym2, SymMatrix,
                       eig2, jacobi_eig, psd_project_2, psd_project_block,
                       read_block_matrix, read_symmatrix, write_block_matrix,
                       write_symmatrix)


def random_sym2(rng, scale=2.0):
    a, b, c = rng.standard_normal(3) * scale
    return Sym2(a, b, c)


def test_eig2_diagonal():
    spec = eig2(Sym2(2.0, 0.0, 1.0))
    assert spec.eig1 == 2.0
    assert spec.eig2 == 1.0
    assert spec.angle == 0.0


def test_eig2_offdiagonal_symmetric():
    spec = eig2(Sym2(0.0, 1.0, 0.0))
    assert spec.eig1 == pytest.approx(1.0, abs=1e-15)
    assert spec.eig2 == pytest.approx(-1.0, abs=1e-15)


def test_eig2_isotropic_any_angle():
    for a in (3.0, -1.5, 0.0):
        spec = eig2(Sym2(a, 0.0, a))
        assert spec.eig1 == spec.eig2 == a
        rec = spec.reconstruct()
        assert rec.a == pytest.approx(a) and rec.c == pytest.approx(a)
        assert rec.b == pytest.approx(0.0, abs=1e-15)


def test_eig2_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        eig2(Sym2(math.nan, 0.0, 1.0))
    with pytest.raises(InvalidInputError):
        eig2(Sym2(1.0, math.inf, 1.0))


def test_eig2_reconstruction_random():
    rng = np.random.default_rng(7)
    for _ in range(500):
        m = random_sym2(rng, scale=10.0 ** rng.integers(-3, 4))
        spec = eig2(m)
        assert spec.eig1 >= spec.eig2
        assert -0.5 * math.pi < spec.angle <= 0.5 * math.pi
        rec = spec.reconstruct()
        err = math.hypot(rec.a - m.a, math.hypot(rec.b - m.b, rec.c - m.c))
        assert err <= 1e-12 * max(m.norm(), 1e-30)


def test_eig2_near_repeated_eigenvalues():
    # cancellation-prone regime: tiny split on top of a large trace
    spec = eig2(Sym2(1.0, 1e-9, 1.0 + 1e-9))
    rec = spec.reconstruct()
    assert rec.a == pytest.approx(1.0, abs=1e-14)
    assert rec.b == pytest.approx(1e-9, rel=1e-6)


def test_psd_project_2_diagonal_clipping():
    out = psd_project_2(Sym2(2.0, 0.0, -1.0))
    assert (out.a, out.b, out.c) == (2.0, 0.0, 0.0)


def test_psd_project_2_keeps_positive_eigenspace():
    out = psd_project_2(Sym2(0.0, 1.0, 0.0))
    assert out.a == pytest.approx(0.5, abs=1e-15)
    assert out.b == pytest.approx(0.5, abs=1e-15)
    assert out.c == pytest.approx(0.5, abs=1e-15)


def test_psd_project_2_fixes_psd_input():
    rng = np.random.default_rng(11)
    for _ in range(100):
        m = random_sym2(rng)
        proj = psd_project_2(m)
        spec = eig2(proj)
        assert spec.eig2 >= -1e-14 * max(m.norm(), 1e-30)
        again = psd_project_2(proj)
        assert math.isclose(again.a, proj.a, abs_tol=1e-12)
        assert math.isclose(again.b, proj.b, abs_tol=1e-12)
        assert math.isclose(again.c, proj.c, abs_tol=1e-12)


def test_psd_project_2_nonexpansive():
    rng = np.random.default_rng(13)
    for _ in range(200):
        m1, m2 = random_sym2(rng), random_sym2(rng)
        p1, p2 = psd_project_2(m1), psd_project_2(m2)
        d_proj = Sym2(p1.a - p2.a, p1.b - p2.b, p1.c - p2.c).norm()
        d_in = Sym2(m1.a - m2.a, m1.b - m2.b, m1.c - m2.c).norm()
        assert d_proj <= d_in + 1e-12


def test_psd_project_block_trivial_cases():
    n = 3
    psd_rows = np.array([[2.0, 0.5, 1.0]] * (2 * n - 1))  # det 1.75 > 0
    mat = BlockSymMatrix(n, psd_rows)
    out = psd_project_block(mat)
    assert np.array_equal(out.blocks, psd_rows)

    neg = BlockSymMatrix(n, np.array([[-1.0, 0.0, -1.0]] * (2 * n - 1)))
    out = psd_project_block(neg)
    assert np.array_equal(out.blocks, np.zeros((2 * n - 1, 3)))


def test_psd_project_block_matches_scalar_projection():
    rng = np.random.default_rng(17)
    for n in (2, 4):
        mat = BlockSymMatrix(n, rng.standard_normal((2 * n - 1, 3)) * 3.0)
        out = psd_project_block(mat)
        for k in range(2 * n - 1):
            scalar = psd_project_2(mat.block(k))
            assert np.allclose(out.blocks[k],
                               [scalar.a, scalar.b, scalar.c], atol=1e-14)


def test_psd_project_block_agrees_with_full_eigendecomposition():
    # oracle: assemble the block-diagonal matrix, full Jacobi
    # eigendecomposition, clip, compare
    rng = np.random.default_rng(19)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        mat = BlockSymMatrix(n, rng.standard_normal((2 * n - 1, 3)) * 2.0)
        blockwise = psd_project_block(mat).to_full().to_dense()
        w, V = jacobi_eig(mat.to_full())
        full = (V * np.maximum(w, 0.0)) @ V.T
        assert np.linalg.norm(blockwise - full) <= 1e-10


def test_jacobi_identity():
    w, V = jacobi_eig(SymMatrix.from_dense(np.eye(5)))
    assert np.allclose(w, np.ones(5))
    assert np.allclose(V @ V.T, np.eye(5), atol=1e-12)


def test_jacobi_diagonal_with_permutation_basis():
    w, V = jacobi_eig(SymMatrix.from_dense(np.diag([3.0, 1.0, -2.0])))
    assert np.allclose(w, [3.0, 1.0, -2.0])
    assert np.allclose(np.abs(V), np.eye(3), atol=1e-12)


def test_jacobi_random_reconstruction():
    rng = np.random.default_rng(23)
    for _ in range(25):
        raw = rng.standard_normal((8, 8))
        dense = raw + raw.T
        w, V = jacobi_eig(SymMatrix.from_dense(dense))
        norm = np.linalg.norm(dense)
        assert np.linalg.norm((V * w) @ V.T - dense) <= 1e-11 * norm
        assert np.linalg.norm(V @ V.T - np.eye(8)) <= 1e-12
        rotated = V.T @ dense @ V
        off = np.linalg.norm(rotated - np.diag(np.diag(rotated)))
        assert off <= 1e-12 * norm
        assert np.all(np.diff(w) <= 1e-12 * norm)


def test_jacobi_guards():
    with pytest.raises(InvalidInputError):
        jacobi_eig(SymMatrix(201, np.zeros(201 * 202 // 2)))
    with pytest.raises(InvalidInputError):
        jacobi_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(InvalidInputError):
        jacobi_eig(np.zeros((2, 3)))


def test_symmatrix_storage_round_trip():
    rng = np.random.default_rng(29)
    raw = rng.standard_normal((6, 6))
    dense = raw + raw.T
    mat = SymMatrix.from_dense(dense)
    assert mat.packed.shape == (21,)
    assert np.allclose(mat.to_dense(), dense)
    with pytest.raises(InvalidInputError):
        SymMatrix(4, np.zeros(9))


def test_block_matrix_shape_guard():
    with pytest.raises(InvalidInputError):
        BlockSymMatrix(2, np.zeros((4, 3)))
    with pytest.raises(InvalidInputError):
        BlockSymMatrix(1, np.zeros((1, 3)))


def test_block_full_extraction_round_trip():
    rng = np.random.default_rng(31)
    mat = BlockSymMatrix(3, rng.standard_normal((5, 3)))
    back = BlockSymMatrix.from_full(3, mat.to_full())
    assert np.allclose(back.blocks, mat.blocks)
    assert mat.norm() == pytest.approx(mat.to_full().norm(), rel=1e-14)


def test_text_formats_round_trip():
    rng = np.random.default_rng(37)
    sym = SymMatrix.from_dense((lambda r: r + r.T)(rng.standard_normal((4, 4))))
    again = read_symmatrix(write_symmatrix(sym))
    assert again.dim == sym.dim
    assert np.array_equal(again.packed, sym.packed)

    blk = BlockSymMatrix(3, rng.standard_normal((5, 3)))
    again = read_block_matrix(write_block_matrix(blk))
    assert again.n == blk.n
    assert np.array_equal(again.blocks, blk.blocks)


def test_text_format_errors():
    with pytest.raises(InvalidInputError):
        read_symmatrix("")
    with pytest.raises(InvalidInputError):
        read_symmatrix("2\n1.0 2.0")  # needs 3 entries
    with pytest.raises(InvalidInputError):
        read_block_matrix("2\n1 2 3")  # needs 9 entries
    with pytest.raises(InvalidInputError):
        read_block_matrix("2\n" + " ".join(["x"] * 9))
