"""Small dense LP kernel: two-phase primal simplex with Bland's rule.

Every LP in the package is posed as ``minimize c'x s.t. Gx <= h`` with x
free; equalities are passed as pairs of opposite inequalities.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .tolerances import tol

_PIVOT_EPS = 1e-11


class LpStatus(enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    others = np.arange(T.shape[0]) != row
    T[others] -= np.outer(T[others, col], T[row])
    T[others, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _run(T: np.ndarray, basis: list[int], ncols: int, max_iter: int) -> bool:
    """Bland-rule iterations on tableau ``T`` whose last row holds reduced
    costs and last column the right-hand side. Only the first ``ncols``
    columns may enter. Returns False when the objective is unbounded."""
    rows = T.shape[0] - 1
    for _ in range(max_iter):
        cost = T[-1, :ncols]
        scale = max(1.0, float(np.max(np.abs(cost))))
        entering = next((j for j in range(ncols) if cost[j] < -_PIVOT_EPS * scale), None)
        if entering is None:
            return True
        col = T[:rows, entering]
        best = None
        for i in range(rows):
            if col[i] > _PIVOT_EPS:
                ratio = T[i, -1] / col[i]
                if best is None or ratio < best[0] - 1e-13 * (1 + abs(best[0])) or (
                    abs(ratio - best[0]) <= 1e-13 * (1 + abs(best[0])) and basis[i] < basis[best[1]]
                ):
                    best = (ratio, i)
        if best is None:
            return False
        _pivot(T, basis, best[1], entering)
    raise RuntimeError("simplex iteration limit reached")


def simplex_standard(A, b, c):
    """minimize c'y subject to Ay = b, y >= 0.

    Returns ``(status, y)``."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    m, N = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    feas_tol = tol().feas * (1.0 + (float(np.max(np.abs(b))) if m else 0.0))
    max_iter = 200 * (m + N + 10)

    # phase I: artificial basis
    T = np.zeros((m + 1, N + m + 1))
    T[:m, :N] = A
    T[:m, N:N + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :N] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(N, N + m))
    _run(T, basis, N, max_iter)
    if -T[-1, -1] > feas_tol:
        return LpStatus.INFEASIBLE, None

    # drive artificial variables out of the basis, dropping redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= N:
            j = next((j for j in range(N) if abs(T[i, j]) > _PIVOT_EPS), None)
            if j is None:
                continue
            _pivot(T, basis, i, j)
        keep.append(i)
    T2 = np.zeros((len(keep) + 1, N + 1))
    T2[:-1, :N] = T[keep, :N]
    T2[:-1, -1] = np.maximum(T[keep, -1], 0.0)
    basis2 = [basis[i] for i in keep]
    T2[-1, :N] = c
    for i, j in enumerate(basis2):
        T2[-1] -= c[j] * T2[i]
    if not _run(T2, basis2, N, max_iter):
        return LpStatus.UNBOUNDED, None
    y = np.zeros(N)
    for i, j in enumerate(basis2):
        y[j] = T2[i, -1]
    return LpStatus.OPTIMAL, y


def solve_lp(c, G=None, h=None) -> LpResult:
    """minimize c'x subject to Gx <= h over free x."""
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    G = np.zeros((0, n)) if G is None else np.asarray(G, dtype=float).reshape(-1, n)
    h = np.zeros(0) if h is None else np.asarray(h, dtype=float).ravel()
    m = G.shape[0]
    if h.size != m:
        raise ValueError("G and h have inconsistent sizes")
    # x = x+ - x-, slack s: [G, -G, I] (x+, x-, s) = h
    A = np.hstack([G, -G, np.eye(m)])
    cost = np.concatenate([c, -c, np.zeros(m)])
    status, y = simplex_standard(A, h, cost)
    if status is not LpStatus.OPTIMAL:
        return LpResult(status)
    x = y[:n] - y[n:2 * n]
    return LpResult(LpStatus.OPTIMAL, x, float(c @ x))


def _eq_pair(E, e):
    E = np.asarray(E, dtype=float)
    e = np.asarray(e, dtype=float)
    return np.vstack([E, -E]), np.concatenate([e, -e])


def is_feasible(G, h) -> bool:
    G = np.asarray(G, dtype=float)
    return solve_lp(np.zeros(G.shape[1]), G, h).status is LpStatus.OPTIMAL


def slater_holds(A, b) -> bool:
    """True iff some y satisfies every a_i'y < b_i (by a margin above tol_strict)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    # variables (y, t): maximize t s.t. a_i'y + t <= b_i, t <= 1
    G = np.vstack([np.hstack([A, np.ones((m, 1))]), np.hstack([np.zeros((1, n)), np.ones((1, 1))])])
    h = np.concatenate([b, [1.0]])
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    res = solve_lp(cost, G, h)
    if res.status is not LpStatus.OPTIMAL:
        return False
    return res.x[-1] > tol().strict


def zero_in_conv(vectors) -> bool:
    """Is the origin a convex combination of the given vectors? (empty -> False)"""
    V = np.asarray(vectors, dtype=float)
    if V.size == 0:
        return False
    V = V.reshape(V.shape[0], -1)
    k = V.shape[0]
    E = np.vstack([V.T, np.ones((1, k))])
    e = np.concatenate([np.zeros(V.shape[1]), [1.0]])
    G, h = _eq_pair(E, e)
    G = np.vstack([G, -np.eye(k)])
    h = np.concatenate([h, np.zeros(k)])
    return solve_lp(np.zeros(k), G, h).status is LpStatus.OPTIMAL


def in_cone(v, generators):
    """Is ``v`` a nonnegative combination of the rows of ``generators``?

    Returns ``(member, lam)``; ``lam`` is a witness (``None`` when not a
    member). cone of the empty set is {0}."""
    v = np.asarray(v, dtype=float).ravel()
    Gen = np.asarray(generators, dtype=float).reshape(-1, v.size)
    k = Gen.shape[0]
    if k == 0:
        ok = float(np.max(np.abs(v), initial=0.0)) <= tol().feas
        return ok, (np.zeros(0) if ok else None)
    G, h = _eq_pair(Gen.T, v)
    G = np.vstack([G, -np.eye(k)])
    h = np.concatenate([h, np.zeros(k)])
    res = solve_lp(np.zeros(k), G, h)
    if res.status is not LpStatus.OPTIMAL:
        return False, None
    return True, np.maximum(res.x, 0.0)


def optimal_set_is_singleton(inst, p, x_star) -> bool:
    """Decide whether the optimal set of P(c, b) is {x_star}.

    For a convex QP the optimal set is {x in F(b) : Qx = Qx*, c'x = c'x*};
    with d = x - x* it is x* plus {d : Ad <= b - Ax*, Qd = 0, c'd = 0}, and the
    optimal set is a singleton iff every coordinate of d is pinned at 0.
    """
    x_star = np.asarray(x_star, dtype=float).ravel()
    n = inst.n
    slack = np.maximum(p.b - inst.A @ x_star, 0.0) if inst.m else np.zeros(0)
    E = np.vstack([inst.Q, p.c.reshape(1, n)])
    G, h = _eq_pair(E, np.zeros(n + 1))
    G = np.vstack([inst.A, G])
    h = np.concatenate([slack, h])
    t = tol().feas
    for j, sign in itertools.product(range(n), (1.0, -1.0)):
        cost = np.zeros(n)
        cost[j] = -sign
        res = solve_lp(cost, G, h)
        if res.status is LpStatus.UNBOUNDED:
            return False
        if res.status is LpStatus.INFEASIBLE:
            raise ArithmeticError("d = 0 should always be feasible")
        if -res.objective > t * (1.0 + abs(x_star[j])):
            return False
    return True
