"""Dense linear algebra for desk-scale problems (n, m up to a few dozen).

Matrices are plain 2-D ``numpy`` arrays; nothing here calls into LAPACK so
that the rank and singularity decisions follow one explicit pivoting rule
(relative threshold ``tol().pivot`` against the largest entry of the input).
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import NotSymmetricError, SingularMatrixError
from .tolerances import tol


class VectorNorm(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def dual(self) -> "VectorNorm":
        return _DUAL[self]

    @classmethod
    def parse(cls, name: str) -> "VectorNorm":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown norm {name!r}; expected l1, l2 or linf") from None


_DUAL = {VectorNorm.L1: VectorNorm.LINF, VectorNorm.L2: VectorNorm.L2, VectorNorm.LINF: VectorNorm.L1}


def norm(v, kind: VectorNorm) -> float:
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    if kind is VectorNorm.L1:
        return float(np.sum(np.abs(v)))
    if kind is VectorNorm.L2:
        return float(math.sqrt(float(v @ v)))
    return float(np.max(np.abs(v)))


def dual_norm(v, kind: VectorNorm) -> float:
    return norm(v, kind.dual)


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
    return M


def _pivot_threshold(M: np.ndarray) -> float:
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    return tol().pivot * scale


def lu_factor(M):
    """LU with partial pivoting. Returns ``(LU, perm)`` with L unit lower
    triangular stored below the diagonal; raises SingularMatrixError when a
    pivot falls below the relative threshold."""
    A = as_matrix(M).copy()
    n, k = A.shape
    if n != k:
        raise ValueError(f"lu_factor needs a square matrix, got {A.shape}")
    thresh = _pivot_threshold(A)
    perm = np.arange(n)
    for j in range(n):
        p = j + int(np.argmax(np.abs(A[j:, j])))
        if not abs(A[p, j]) > thresh:
            raise SingularMatrixError(f"pivot {j} below threshold")
        if p != j:
            A[[j, p]] = A[[p, j]]
            perm[[j, p]] = perm[[p, j]]
        A[j + 1:, j] /= A[j, j]
        A[j + 1:, j + 1:] -= np.outer(A[j + 1:, j], A[j, j + 1:])
    return A, perm


def lu_solve_factored(LU: np.ndarray, perm: np.ndarray, rhs) -> np.ndarray:
    b = np.asarray(rhs, dtype=float)
    y = b[perm].copy()
    n = LU.shape[0]
    for i in range(n):
        y[i] -= LU[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - LU[i, i + 1:] @ y[i + 1:]) / LU[i, i]
    return y


def lu_solve(M, rhs) -> np.ndarray:
    """Solve ``M x = rhs``; raises SingularMatrixError on rank deficiency.

    ``rhs`` may be a vector or a matrix of right-hand sides (columns)."""
    M = as_matrix(M)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != M.shape[0]:
        raise ValueError(f"rhs length {rhs.shape[0]} does not match matrix {M.shape}")
    LU, perm = lu_factor(M)
    if rhs.ndim == 1:
        return lu_solve_factored(LU, perm, rhs)
    return np.column_stack([lu_solve_factored(LU, perm, rhs[:, j]) for j in range(rhs.shape[1])])


def inverse(M) -> np.ndarray:
    M = as_matrix(M)
    return lu_solve(M, np.eye(M.shape[0]))


def is_nonsingular(M) -> bool:
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"is_nonsingular needs a square matrix, got {M.shape}")
    if M.shape[0] == 0:
        return True
    try:
        lu_factor(M)
    except SingularMatrixError:
        return False
    return True


def row_reduce(M):
    """Reduced row echelon form with partial pivoting.

    Returns ``(R, pivot_columns, min_pivot_ratio)`` where the ratio is the
    smallest accepted pivot divided by the largest entry of ``M`` (``inf``
    when no pivot was accepted)."""
    R = as_matrix(M).copy()
    rows, cols = R.shape
    thresh = _pivot_threshold(R)
    scale = float(np.max(np.abs(R))) if R.size else 0.0
    pivots: list[int] = []
    ratio = math.inf
    r = 0
    for j in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(R[r:, j])))
        if not abs(R[p, j]) > thresh:
            R[r:, j] = 0.0
            continue
        ratio = min(ratio, abs(R[p, j]) / scale)
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] /= R[r, j]
        others = np.arange(rows) != r
        R[others] -= np.outer(R[others, j], R[r])
        R[others, j] = 0.0
        pivots.append(j)
        r += 1
    return R, pivots, ratio


def rank(M) -> int:
    M = as_matrix(M)
    if M.size == 0:
        return 0
    return len(row_reduce(M)[1])


def _orthonormalize(vectors: list[np.ndarray]) -> list[np.ndarray]:
    basis: list[np.ndarray] = []
    for v in vectors:
        w = v.astype(float).copy()
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        nrm = math.sqrt(float(w @ w))
        if nrm > 0:
            basis.append(w / nrm)
    return basis


def kernel_basis(M) -> list[np.ndarray]:
    """Orthonormal basis of the null space; empty list iff trivial."""
    M = as_matrix(M)
    cols = M.shape[1]
    if M.shape[0] == 0:
        return [e for e in np.eye(cols)]
    R, pivots, _ = row_reduce(M)
    free = [j for j in range(cols) if j not in pivots]
    raw = []
    for f in free:
        v = np.zeros(cols)
        v[f] = 1.0
        for i, p in enumerate(pivots):
            v[p] = -R[i, f]
        raw.append(v)
    return _orthonormalize(raw)


def solve_consistent(M, rhs):
    """Minimum-norm solution of a possibly singular system ``M x = rhs``.

    Returns ``(x, kernel)`` with ``kernel`` an orthonormal basis of ker M,
    or ``None`` when the system is inconsistent."""
    M = as_matrix(M)
    rhs = np.asarray(rhs, dtype=float)
    rows, cols = M.shape
    aug = np.column_stack([M, rhs]) if rows else np.zeros((0, cols + 1))
    R, pivots, _ = row_reduce(aug)
    if cols in pivots:
        return None
    x = np.zeros(cols)
    for i, p in enumerate(pivots):
        x[p] = R[i, cols]
    kernel = kernel_basis(M)
    for q in kernel:
        x -= (q @ x) * q
    resid = M @ x - rhs if rows else np.zeros(0)
    if resid.size and np.max(np.abs(resid)) > tol().resid * (1.0 + float(np.max(np.abs(rhs)))) * max(1.0, float(np.max(np.abs(M)))):
        return None
    return x, kernel


def is_symmetric(M) -> bool:
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        return False
    if M.size == 0:
        return True
    return float(np.max(np.abs(M - M.T))) <= tol().sym * max(1.0, float(np.max(np.abs(M))))


def sym_eig(M, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(w, V)`` with eigenvalues ``w`` in descending order and
    orthonormal eigenvectors in the columns of ``V``."""
    A = as_matrix(M)
    if not is_symmetric(A):
        raise NotSymmetricError("matrix is not symmetric within tolerance")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    if n == 0:
        return np.zeros(0), V
    total = math.sqrt(float(np.sum(A * A)))
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(A, 1) ** 2)))
        if off <= 1e-15 * total or off == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                if abs(A[p, p]) + g == abs(A[p, p]) and abs(A[q, q]) + g == abs(A[q, q]):
                    A[p, q] = A[q, p] = 0.0
                    continue
                diff = A[q, q] - A[p, p]
                if abs(diff) + g == abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J' A J with the rotation acting on columns/rows p, q
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]
