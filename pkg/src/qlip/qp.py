"""Exact convex QP solving by enumeration of bordered KKT systems.

For every index set D with linearly independent rows a_i (|D| <= n), in
order of increasing size and lexicographically within a size, the system

    [Q   A_D'] [x]   [-c ]
    [A_D  0  ] [l] = [b_D]

is solved (its whole solution set when the matrix is singular). The first
solution with Ax <= b and l >= 0 is a KKT point and hence optimal.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg, lp
from .errors import InfeasiblePointError, NotOptimalError, SingularMatrixError
from .model import ParamPoint, QpInstance
from .tolerances import tol


class QpStatus(enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED_BELOW = "UNBOUNDED_BELOW"


@dataclass(frozen=True)
class KktCertificate:
    """Index set ``D`` (0-based), multipliers ``lam`` aligned with ``D`` and
    the point ``x``."""

    D: tuple[int, ...]
    lam: np.ndarray
    x: np.ndarray


@dataclass(frozen=True)
class QpSolution:
    status: QpStatus
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    unique: Optional[bool] = None
    certificate: Optional[KktCertificate] = None


def bordered_matrix(Q, A_D) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    A_D = np.asarray(A_D, dtype=float).reshape(-1, Q.shape[0])
    d = A_D.shape[0]
    if d == 0:
        return Q.copy()
    return np.block([[Q, A_D.T], [A_D, np.zeros((d, d))]])


def _feas_slack(A, b) -> np.ndarray:
    return tol().feas * (1.0 + np.abs(b))


def certificate_violations(Q, A, b, c, cert: KktCertificate) -> dict:
    """Scaled residuals of the four certificate invariants (all <= 1 when valid)."""
    t = tol().feas
    x, lam, D = cert.x, cert.lam, list(cert.D)
    out = {}
    A_D = A[D, :].reshape(len(D), x.size)
    out["active"] = float(np.max(np.abs(A_D @ x - b[D]) / (t * (1 + np.abs(b[D]))), initial=0.0))
    out["feasible"] = float(np.max((A @ x - b) / (t * (1 + np.abs(b))), initial=0.0)) if A.shape[0] else 0.0
    grad = Q @ x + c + A_D.T @ lam
    scale = 1.0 + float(np.max(np.abs(Q @ x), initial=0.0)) + float(np.max(np.abs(c), initial=0.0))
    out["stationary"] = float(np.max(np.abs(grad), initial=0.0)) / (t * scale)
    out["dual_feasible"] = float(np.max(-lam, initial=0.0)) / (t * (1 + float(np.max(np.abs(lam), initial=0.0))))
    return out


def _accept(x, lam, A, b) -> bool:
    t = tol().feas
    if A.shape[0] and np.any(A @ x - b > _feas_slack(A, b)):
        return False
    return not (lam.size and np.any(lam < -t * (1.0 + float(np.max(np.abs(lam))))))


def _kkt_point(Q, A, b, c, D):
    """A solution (x, lam) of the bordered system for D that is primal and
    dual feasible, or None."""
    n = Q.shape[0]
    d = len(D)
    A_D = A[list(D), :].reshape(d, n)
    M = bordered_matrix(Q, A_D)
    rhs = np.concatenate([-c, b[list(D)]])
    try:
        z = linalg.lu_solve(M, rhs)
        x, lam = z[:n], z[n:]
        return (x, lam) if _accept(x, lam, A, b) else None
    except SingularMatrixError:
        pass
    sol = linalg.solve_consistent(M, rhs)
    if sol is None:
        return None
    z0, kernel = sol
    x, lam = z0[:n], z0[n:]
    if _accept(x, lam, A, b):
        return x, lam
    if not kernel:
        return None
    # search the affine solution set z0 + N t for a primal/dual feasible point
    N = np.column_stack(kernel)
    Nx, Nl = N[:n], N[n:]
    G = np.vstack([A @ Nx, -Nl]) if A.shape[0] else -Nl
    h = np.concatenate([b - A @ z0[:n], z0[n:]]) if A.shape[0] else z0[n:]
    if G.shape[0] == 0:
        return z0[:n], z0[n:]
    res = lp.solve_lp(np.zeros(N.shape[1]), G, h)
    if res.status is not lp.LpStatus.OPTIMAL:
        return None
    z = z0 + N @ res.x
    x, lam = z[:n], z[n:]
    return (x, lam) if _accept(x, lam, A, b) else None


def _independent_subsets(A, max_size):
    m = A.shape[0]
    for k in range(max_size + 1):
        for D in itertools.combinations(range(m), k):
            if k == 0 or linalg.rank(A[list(D), :]) == k:
                yield D


def solve_kkt_enumeration(Q, A, b, c, first=()):
    """Core solver on raw arrays. ``first`` lists index sets to try before
    the canonical order (a warm-start hint; it never changes x when the
    solution is unique). Returns ``(status, x, cert)``."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    A = np.asarray(A, dtype=float).reshape(-1, n)
    b = np.asarray(b, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    tried = set()
    candidates = itertools.chain(
        (tuple(D) for D in first if linalg.rank(A[list(D), :]) == len(D) or not D),
        _independent_subsets(A, min(A.shape[0], n)),
    )
    for D in candidates:
        if D in tried:
            continue
        tried.add(D)
        found = _kkt_point(Q, A, b, c, D)
        if found is not None:
            x, lam = found
            x = x + 0.0  # drop negative zeros
            return QpStatus.OPTIMAL, x, KktCertificate(tuple(D), lam, x)
    if A.shape[0] and not lp.is_feasible(A, b):
        return QpStatus.INFEASIBLE, None, None
    # feasible but no KKT point: the objective is unbounded below (Frank-Wolfe)
    return QpStatus.UNBOUNDED_BELOW, None, None


def _objective(Q, c, x) -> float:
    return float(0.5 * x @ Q @ x + c @ x)


def solve(inst: QpInstance, p: ParamPoint | None = None, check_unique: bool = True, first=()) -> QpSolution:
    """Solve P(c, b) for the instance's fixed (Q, A) at parameter ``p``
    (nominal when omitted)."""
    p = inst.nominal if p is None else p
    status, x, cert = solve_kkt_enumeration(inst.Q, inst.A, p.b, p.c, first)
    if status is not QpStatus.OPTIMAL:
        return QpSolution(status)
    unique = lp.optimal_set_is_singleton(inst, p, x) if check_unique else None
    return QpSolution(status, x, _objective(inst.Q, p.c, x), unique, cert)


def solve_subproblem(inst: QpInstance, D, c, b_D, check_unique: bool = True) -> QpSolution:
    """Solve P_D(c, b_D): the same objective with only the constraints in D.

    The certificate's index set is expressed in the original numbering."""
    D = tuple(D)
    A_D = inst.A[list(D), :].reshape(len(D), inst.n)
    b_D = np.asarray(b_D, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    status, x, cert = solve_kkt_enumeration(inst.Q, A_D, b_D, c)
    if status is not QpStatus.OPTIMAL:
        return QpSolution(status)
    cert = KktCertificate(tuple(D[i] for i in cert.D), cert.lam, x)
    unique = None
    if check_unique:
        sub = QpInstance(inst.Q, A_D, c, b_D, inst.var_norm)
        unique = lp.optimal_set_is_singleton(sub, sub.nominal, x)
    return QpSolution(status, x, _objective(inst.Q, c, x), unique, cert)


def active_set(A, b, x) -> tuple[int, ...]:
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return ()
    r = A @ x - b
    return tuple(int(i) for i in np.flatnonzero(np.abs(r) <= tol().act * (1.0 + np.abs(b))))


def check_feasible(A, b, x) -> None:
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return
    r = A @ x - b
    bad = np.flatnonzero(r > _feas_slack(A, b))
    if bad.size:
        raise InfeasiblePointError(f"constraints {[int(i) + 1 for i in bad]} are violated")


def verify_kkt(inst: QpInstance, p: ParamPoint | None, x) -> KktCertificate:
    """Certify that ``x`` solves P(c, b); raises NotOptimalError otherwise."""
    p = inst.nominal if p is None else p
    x = np.asarray(x, dtype=float).ravel()
    try:
        check_feasible(inst.A, p.b, x)
    except InfeasiblePointError as exc:
        raise NotOptimalError(str(exc), code="INFEASIBLE_POINT") from None
    active = active_set(inst.A, p.b, x)
    v = -(inst.Q @ x + p.c)
    member, lam = lp.in_cone(v, inst.A[list(active), :].reshape(len(active), inst.n))
    if not member:
        raise NotOptimalError("-(Qx + c) is not in the cone of active gradients", code="STATIONARITY_FAILS")
    keep = [k for k, val in enumerate(lam) if val > tol().feas]
    D = tuple(active[k] for k in keep)
    return KktCertificate(D, lam[keep], x)
