import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qlip import linalg
from qlip.errors import NotSymmetricError, SingularMatrixError
from qlip.linalg import VectorNorm

EXA32_M1 = np.array([[1.0, 0, -1], [0, 0, 0], [-1, 0, 0]])
EXA32_M12 = np.array([[1.0, 0, -1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, 1, 0, 0]])


def test_lu_solve_identity():
    assert np.array_equal(linalg.lu_solve(np.eye(3), [1, 2, 3]), [1, 2, 3])


def test_lu_solve_singular_bordered_matrix():
    with pytest.raises(SingularMatrixError):
        linalg.lu_solve(EXA32_M1, [1.0, 2.0, 3.0])


def test_lu_solve_recovers_known_solution():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((5, 5)) + 5 * np.eye(5)
    x = rng.standard_normal(5)
    assert np.allclose(linalg.lu_solve(M, M @ x), x, atol=1e-10, rtol=0)


def test_lu_solve_matrix_rhs_and_inverse():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    assert np.allclose(linalg.inverse(M) @ M, np.eye(4), atol=1e-12)


def test_lu_solve_rejects_bad_rhs():
    with pytest.raises(ValueError):
        linalg.lu_solve(np.eye(2), [1.0, 2.0, 3.0])


@pytest.mark.parametrize("M, expected", [
    (EXA32_M12, True),
    (np.zeros((2, 2)), False),
    (np.diag([1.0, 0.0]), False),
    (np.eye(4), True),
])
def test_is_nonsingular(M, expected):
    assert linalg.is_nonsingular(M) is expected


def test_kernel_basis_examples():
    assert linalg.kernel_basis(np.eye(3)) == []
    (v,) = linalg.kernel_basis(np.diag([1.0, 0.0]))
    assert np.allclose(np.abs(v), [0, 1])
    (w,) = linalg.kernel_basis(np.array([[1.0, 1.0], [2.0, 2.0]]))
    assert np.allclose(np.abs(w), [1 / np.sqrt(2)] * 2) and w[0] * w[1] < 0


def test_kernel_basis_is_orthonormal_and_annihilated():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((2, 5))
    K = np.column_stack(linalg.kernel_basis(M))
    assert K.shape == (5, 3)
    assert np.allclose(K.T @ K, np.eye(3), atol=1e-12)
    assert np.allclose(M @ K, 0, atol=1e-12)


def test_solve_consistent():
    M = np.array([[1.0, 1.0], [2.0, 2.0]])
    x, kernel = linalg.solve_consistent(M, [2.0, 4.0])
    assert np.allclose(x, [1, 1]) and len(kernel) == 1
    assert linalg.solve_consistent(M, [1.0, 0.0]) is None


@pytest.mark.parametrize("M, w", [
    (np.eye(3), [1, 1, 1]),
    (np.array([[2.0, 1.0], [1.0, 2.0]]), [3, 1]),
    (np.diag([5.0, -1.0]), [5, -1]),
])
def test_sym_eig_examples(M, w):
    vals, V = linalg.sym_eig(M)
    assert np.allclose(vals, w, atol=1e-12)
    assert np.allclose(V @ np.diag(vals) @ V.T, M, atol=1e-12)


def test_sym_eig_rejects_nonsymmetric():
    with pytest.raises(NotSymmetricError):
        linalg.sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


@pytest.mark.parametrize("v, kind, expected", [
    ([3, 4], VectorNorm.L2, 5.0),
    ([1, -2, 3], VectorNorm.LINF, 3.0),
    ([1, -2, 3], VectorNorm.L1, 6.0),
])
def test_norm_examples(v, kind, expected):
    assert linalg.norm(v, kind) == expected


def test_dual_pairs_and_parse():
    assert VectorNorm.L1.dual is VectorNorm.LINF
    assert VectorNorm.LINF.dual is VectorNorm.L1
    assert VectorNorm.L2.dual is VectorNorm.L2
    assert VectorNorm.parse("LInf") is VectorNorm.LINF
    with pytest.raises(ValueError):
        VectorNorm.parse("l3")


def test_holder_inequality():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        x, y = rng.standard_normal((2, 4))
        for k in VectorNorm:
            assert abs(x @ y) <= linalg.norm(x, k) * linalg.dual_norm(y, k) + 1e-12


def test_lu_and_kernel_verdicts_agree_on_random_and_fixture_matrices():
    rng = np.random.default_rng(4)
    mats = [EXA32_M1, EXA32_M12, np.zeros((2, 2)), np.diag([1.0, 0.0])]
    for _ in range(200):
        n = int(rng.integers(1, 6))
        r = int(rng.integers(0, n + 1))
        mats.append(rng.standard_normal((n, r)) @ rng.standard_normal((r, n)))
    for M in mats:
        assert linalg.is_nonsingular(M) == (linalg.kernel_basis(M) == [])


def test_lu_residual_on_nonsingular_fixtures():
    rng = np.random.default_rng(5)
    for M in (EXA32_M12, np.eye(3), np.array([[1.0, 0, -1], [0, 1, 0], [-1, 0, 0]])):
        rhs = rng.standard_normal(M.shape[0])
        assert np.max(np.abs(M @ linalg.lu_solve(M, rhs) - rhs)) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-10, 10)))
def test_sym_eig_properties(X):
    S = X + X.T
    w, V = linalg.sym_eig(S)
    assert np.allclose(V.T @ V, np.eye(4), atol=1e-8)
    assert abs(w.sum() - np.trace(S)) <= 1e-8 * max(1.0, np.abs(S).max())
    assert np.all(np.diff(w) <= 1e-12)
    assert np.allclose(V @ np.diag(w) @ V.T, S, atol=1e-8 * max(1.0, np.abs(S).max()))


def test_rank_and_row_reduce():
    assert linalg.rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1
    assert linalg.rank(np.zeros((0, 3))) == 0
    R, piv, ratio = linalg.row_reduce(np.array([[0.0, 2.0], [1.0, 0.0]]))
    assert piv == [0, 1] and np.allclose(R, np.eye(2)) and ratio == 0.5
