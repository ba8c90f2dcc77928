"""Aubin property and exact Lipschitz modulus of the QP argmin mapping.

At a nominal point with a unique solution x, the argmin mapping has the
Aubin property iff the bordered matrix

    M_D = [[Q, A_D'], [A_D, 0]]        (M_empty = Q)

is nonsingular for every minimal KKT set D, and then its Lipschitz modulus
is the largest of

    || (I_n 0) M_D^{-1} ||

over the extended KKT family, the matrix norm being induced by
max{||alpha||_*, ||beta||_inf} on the parameter side and the chosen
variable norm on the solution side.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import families as fam
from . import linalg, lp, qp
from .errors import (
    AnalysisError,
    DimensionMismatchError,
    InconsistentNumericsError,
    SingularMatrixError,
)
from .linalg import VectorNorm
from .model import QpInstance, projection_instance
from .tolerances import tol

IndexSet = tuple[int, ...]

MAX_BOX_DIM = 20
MAX_VERTEX_BITS = 24


@dataclass(frozen=True)
class BorderedKkt:
    D: IndexSet
    M: np.ndarray


@dataclass(frozen=True)
class OperatorNormResult:
    """``value`` = max ||B1 alpha + B2 beta|| over ||alpha||_* <= 1, ||beta||_inf <= 1,
    attained at (``alpha_star``, ``beta_star``)."""

    value: float
    alpha_star: np.ndarray
    beta_star: np.ndarray


@dataclass(frozen=True)
class PerD:
    nonsingular: bool
    lip_SD: float
    direction: Optional[OperatorNormResult] = None


@dataclass
class ModulusReport:
    aubin: bool
    modulus: float
    x_bar: np.ndarray
    unique: bool
    active: IndexSet
    minimal: tuple[IndexSet, ...]
    extended: tuple[IndexSet, ...]
    per_D: dict[IndexSet, PerD]
    attaining_D: Optional[IndexSet] = None
    attaining_direction: Optional[OperatorNormResult] = None
    warnings: list[str] = field(default_factory=list)
    nurnberger: bool = False
    cross_check: Optional[float] = None


class RestrictedModulus(NamedTuple):
    value: float
    attaining_D: Optional[IndexSet]


@dataclass(frozen=True)
class LinearCaseNorms:
    direct: float
    dual_min: float
    distance_form: float


# ---------------------------------------------------------------------------
# bordered matrices


def assemble_MD(inst: QpInstance, D) -> BorderedKkt:
    D = tuple(D)
    A_D = inst.A[list(D), :].reshape(len(D), inst.n)
    return BorderedKkt(D, qp.bordered_matrix(inst.Q, A_D))


def md_nonsingular(inst: QpInstance, D) -> bool:
    """Nonsingularity of M_D, decided twice: by LU on M_D and by
    ker Q  intersect  ker A_D = {0}. The two verdicts must agree."""
    D = tuple(D)
    by_lu = linalg.is_nonsingular(assemble_MD(inst, D).M)
    stacked = np.vstack([inst.Q, inst.A[list(D), :].reshape(len(D), inst.n)])
    by_kernel = not linalg.kernel_basis(stacked)
    if by_lu != by_kernel:
        raise InconsistentNumericsError(
            f"LU and kernel criteria disagree on M_D for D={_label(D)} (tolerance-boundary instance)"
        )
    return by_lu


# ---------------------------------------------------------------------------
# operator norm over dual-ball x box


def _box_vertices(d: int):
    """Vertices of [-1, 1]^d with the first coordinate fixed to +1."""
    if d == 0:
        yield np.zeros(0)
        return
    for tail in itertools.product((1.0, -1.0), repeat=d - 1):
        yield np.array((1.0,) + tail)


def _secular_root(gamma2: np.ndarray, w: np.ndarray, lo: float, hi: float) -> float:
    """Root in (lo, hi] of sum gamma2 / (mu - w)^2 = 1 (safeguarded Newton on
    1/||alpha(mu)|| - 1, which is increasing in mu)."""
    mu = hi
    for _ in range(200):
        r = mu - w
        s2 = float(np.sum(gamma2 / r**2))
        nrm = math.sqrt(s2)
        psi = 1.0 / nrm - 1.0
        if abs(psi) <= 1e-13:
            return mu
        if psi > 0:
            hi = mu
        else:
            lo = mu
        dpsi = float(np.sum(gamma2 / r**3)) / nrm**3
        step = mu - psi / dpsi if dpsi > 0 else None
        if step is None or not (lo < step < hi):
            step = 0.5 * (lo + hi)
        if abs(step - mu) <= 1e-15 * max(1.0, abs(mu)):
            return step
        mu = step
    return mu


def max_norm_on_ball(B1, v):
    """max ||B1 alpha + v||_2 over ||alpha||_2 <= 1 (trust-region maximization).

    Returns ``(value, alpha)``. With H = B1'B1 = sum w_i q_i q_i' and
    g = B1'v the maximizer lies on the sphere and solves (mu I - H) alpha = g
    for some mu >= max(w); the hard case (g orthogonal to the top
    eigenspace) completes alpha with a top eigenvector."""
    B1 = np.asarray(B1, dtype=float)
    v = np.asarray(v, dtype=float)
    n = B1.shape[1]
    H = B1.T @ B1
    g = B1.T @ v
    w, V = linalg.sym_eig(0.5 * (H + H.T))
    w = np.maximum(w, 0.0)
    gamma = V.T @ g
    wmax = float(w[0])
    top = w >= wmax - 1e-10 * max(1.0, wmax)
    gnorm = float(np.linalg.norm(g))
    hard = float(np.linalg.norm(gamma[top])) <= 1e-12 * max(1.0, gnorm)

    if not hard:
        mu = _secular_root(gamma**2, w, wmax, wmax + gnorm)
        alpha = V @ (gamma / (mu - w))
    else:
        rest = ~top
        coef = np.zeros(n)
        coef[rest] = gamma[rest] / (wmax - w[rest])
        a0 = float(np.linalg.norm(coef))
        if a0 <= 1.0:
            coef[np.flatnonzero(top)[0]] = math.sqrt(max(0.0, 1.0 - a0 * a0))
            alpha = V @ coef
        else:
            g2 = np.where(rest, gamma**2, 0.0)
            mu = _secular_root(g2[rest], w[rest], wmax, wmax + gnorm)
            coef = np.zeros(n)
            coef[rest] = gamma[rest] / (mu - w[rest])
            alpha = V @ coef
    nrm = float(np.linalg.norm(alpha))
    if nrm > 1.0:
        alpha = alpha / nrm
    return float(np.linalg.norm(B1 @ alpha + v)), alpha


def _alpha_vertices(kind: VectorNorm, n: int) -> np.ndarray:
    """Extreme points of the unit ball of ``kind`` (polyhedral kinds only)."""
    if kind is VectorNorm.L1:
        return np.vstack([np.eye(n), -np.eye(n)])
    return np.array(list(itertools.product((1.0, -1.0), repeat=n)))


def operator_norm(B, var_norm: VectorNorm, d: int) -> OperatorNormResult:
    """Exact max of ||B1 alpha + B2 beta||_var over ||alpha||_* <= 1 and
    ||beta||_inf <= 1, where B = [B1 | B2] is n x (n + d).

    A convex function attains its max over a product of convex sets at an
    extreme point; box vertices are enumerated for beta (up to a global
    sign), and for alpha either the extreme points of a polyhedral dual ball
    or, in the Euclidean case, the exact trust-region maximizer."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[1] != B.shape[0] + d or d < 0:
        raise DimensionMismatchError(f"expected an n x (n + {d}) matrix, got {B.shape}")
    n = B.shape[0]
    if d > MAX_BOX_DIM:
        raise DimensionMismatchError(f"box dimension {d} exceeds the enumeration cap {MAX_BOX_DIM}")
    B1, B2 = B[:, :n], B[:, n:]
    dual = var_norm.dual
    if dual is VectorNorm.LINF and n + d > MAX_VERTEX_BITS:
        raise DimensionMismatchError(f"n + d = {n + d} exceeds the vertex enumeration cap {MAX_VERTEX_BITS}")

    best = (-1.0, None, None)
    if dual is VectorNorm.L2:
        for beta in _box_vertices(d):
            value, alpha = max_norm_on_ball(B1, B2 @ beta)
            if value > best[0]:
                best = (value, alpha, beta)
    else:
        alphas = _alpha_vertices(dual, n)
        images = alphas @ B1.T
        for beta in _box_vertices(d):
            vals = np.array([linalg.norm(row, var_norm) for row in images + B2 @ beta])
            k = int(np.argmax(vals))
            if vals[k] > best[0]:
                best = (float(vals[k]), alphas[k].copy(), beta)
    value, alpha, beta = best
    return OperatorNormResult(value, np.asarray(alpha, dtype=float) + 0.0, np.asarray(beta, dtype=float) + 0.0)


def evaluate_direction(B, var_norm: VectorNorm, res: OperatorNormResult) -> float:
    return linalg.norm(np.asarray(B) @ np.concatenate([res.alpha_star, res.beta_star]), var_norm)


# ---------------------------------------------------------------------------
# per-D moduli


def solution_block(inst: QpInstance, D) -> np.ndarray:
    """(I_n 0) M_D^{-1}; raises SingularMatrixError when M_D is singular."""
    M = assemble_MD(inst, D).M
    return linalg.inverse(M)[: inst.n, :]


def lip_SD_detail(inst: QpInstance, D) -> PerD:
    D = tuple(D)
    if not md_nonsingular(inst, D):
        return PerD(False, math.inf, None)
    try:
        B = solution_block(inst, D)
    except SingularMatrixError:
        raise InconsistentNumericsError(f"M_D for D={_label(D)} passed the rank test but LU failed") from None
    res = operator_norm(B, inst.var_norm, len(D))
    return PerD(True, res.value, res)


def lip_SD(inst: QpInstance, D) -> float:
    """Lipschitz modulus of the subproblem mapping S_D: +inf when M_D is
    singular, otherwise the operator norm of (I_n 0) M_D^{-1}."""
    return lip_SD_detail(inst, D).lip_SD


# ---------------------------------------------------------------------------
# the pipeline


def _label(D) -> str:
    return "{" + ",".join(str(i + 1) for i in D) + "}"


def _nominal_solution(inst: QpInstance):
    if not lp.slater_holds(inst.A, inst.b_bar):
        raise AnalysisError("Slater constraint qualification fails at the nominal b", code="SCQ_FAILS")
    sol = qp.solve(inst)
    if sol.status is qp.QpStatus.INFEASIBLE:
        raise AnalysisError("nominal problem is infeasible", code="NOMINAL_INFEASIBLE")
    if sol.status is qp.QpStatus.UNBOUNDED_BELOW:
        raise AnalysisError("nominal problem is unbounded below", code="NOMINAL_UNBOUNDED")
    return sol


def _assemble_report(inst: QpInstance, x_bar, unique: bool, families: fam.IndexFamilies,
                     per_D: dict, warnings: list[str]) -> ModulusReport:
    minimal_ok = all(per_D[D].nonsingular for D in families.minimal)
    extended_ok = all(per_D[D].nonsingular for D in families.extended)
    if minimal_ok != extended_ok:
        warnings.append(
            "INCONSISTENT_NUMERICS: minimal and extended families disagree on nonsingularity"
        )
    for D in families.degenerate:
        warnings.append(f"DEGENERATE_INSTANCE: generators of D={_label(D)} are nearly dependent")
    if not unique:
        warnings.append(
            "NON_UNIQUE_NOMINAL: the nominal optimal set is not a singleton; the Aubin property "
            "forces local single-valuedness, so it fails and the modulus is +inf (derived)"
        )
    aubin = unique and minimal_ok
    report = ModulusReport(
        aubin=aubin,
        modulus=math.inf,
        x_bar=np.asarray(x_bar, dtype=float),
        unique=unique,
        active=families.active,
        minimal=families.minimal,
        extended=families.extended,
        per_D=per_D,
        warnings=warnings,
        nurnberger=families.nurnberger(inst.n),
    )
    if aubin:
        attaining = max(families.extended, key=lambda D: per_D[D].lip_SD)
        report.modulus = per_D[attaining].lip_SD
        report.attaining_D = attaining
        report.attaining_direction = per_D[attaining].direction
    else:
        singular = [D for D in families.minimal if not per_D[D].nonsingular]
        if singular:
            report.warnings.append(
                "singular M_D for minimal D = " + ", ".join(_label(D) for D in singular)
            )
    return report


def lip_modulus(inst: QpInstance) -> ModulusReport:
    """Aubin verdict and Lipschitz modulus of the argmin mapping at the
    nominal parameter. Raises AnalysisError (SCQ_FAILS, NOMINAL_INFEASIBLE,
    NOMINAL_UNBOUNDED)."""
    sol = _nominal_solution(inst)
    x_bar = sol.x
    families = fam.kkt_families(inst, None, x_bar)
    per_D = {D: lip_SD_detail(inst, D) for D in families.extended}
    return _assemble_report(inst, x_bar, bool(sol.unique), families, per_D, [])


def lip_modulus_restricted(inst: QpInstance, D0, report: ModulusReport | None = None) -> RestrictedModulus:
    """Modulus of S_{D0} at the nominal point: the max of lip_SD over the
    extended-family members contained in D0 (+inf if any is singular)."""
    report = lip_modulus(inst) if report is None else report
    D0 = tuple(sorted(D0))
    if D0 not in report.extended:
        raise AnalysisError(f"D0={_label(D0)} is not in the extended family", code="D0_NOT_IN_FAMILY")
    members = [D for D in report.extended if set(D) <= set(D0)]
    if any(not report.per_D[D].nonsingular for D in members):
        return RestrictedModulus(math.inf, None)
    best = max(members, key=lambda D: report.per_D[D].lip_SD)
    return RestrictedModulus(report.per_D[best].lip_SD, best)


# ---------------------------------------------------------------------------
# linear case


def linear_case_norms(inst: QpInstance, D) -> LinearCaseNorms:
    """Three expressions of ||A_D^{-1}|| (operator norm from l_inf to the
    variable norm) for a linear instance and a square nonsingular A_D:

    direct        : max over box vertices beta of ||A_D^{-1} beta||
    dual_min      : 1 / min over the l1 unit sphere of ||A_D' lam||_*
    distance_form : 1 / dual distance from 0 to the boundary of conv{+-a_i}
    """
    D = tuple(D)
    n = inst.n
    if float(np.max(np.abs(inst.Q))) > tol().psd:
        raise AnalysisError("linear_case_norms needs Q = 0", code="NOT_LINEAR")
    if len(D) != n:
        raise AnalysisError(f"A_D must be square; |D| = {len(D)}, n = {n}", code="NOT_SQUARE")
    A_D = inst.A[list(D), :]
    A_inv = linalg.inverse(A_D)
    kind = inst.var_norm
    direct = operator_norm(np.hstack([np.zeros((n, n)), A_inv]), kind, n).value

    # l1 sphere = union of facets {lam : s_i lam_i >= 0, s'lam = 1}; +-s give
    # the same value, so s_1 = +1.
    best = math.inf
    for s in _box_vertices(n):
        best = min(best, _facet_min(A_D, s, kind.dual))
    dual_min = 1.0 / best

    # facet of conv{+-a_i} spanned by {s_i a_i} lies on {y : w'y = 1} with
    # A_D w = s; its dual-norm distance from the origin is 1 / ||w||.
    dist = math.inf
    for s in _box_vertices(n):
        w = linalg.lu_solve(A_D, s)
        dist = min(dist, 1.0 / linalg.norm(w, kind))
    return LinearCaseNorms(direct, dual_min, 1.0 / dist)


def _facet_min(A_D: np.ndarray, s: np.ndarray, dual: VectorNorm) -> float:
    """min ||A_D' lam||_dual over {lam : s_i lam_i >= 0, s'lam = 1}."""
    n = A_D.shape[0]
    sign_rows = -np.diag(s)
    if dual is VectorNorm.L2:
        G = A_D @ A_D.T
        A_c = np.vstack([sign_rows, s, -s])
        b_c = np.concatenate([np.zeros(n), [1.0, -1.0]])
        status, lam, _ = qp.solve_kkt_enumeration(G, A_c, b_c, np.zeros(n))
        if status is not qp.QpStatus.OPTIMAL:
            raise InconsistentNumericsError("facet minimization failed")
        return linalg.norm(A_D.T @ lam, VectorNorm.L2)
    At = A_D.T
    k = At.shape[0]
    if dual is VectorNorm.LINF:
        # variables (lam, t): minimize t, -t <= (A'lam)_j <= t
        cost = np.concatenate([np.zeros(n), [1.0]])
        G = np.vstack([
            np.hstack([At, -np.ones((k, 1))]),
            np.hstack([-At, -np.ones((k, 1))]),
            np.hstack([sign_rows, np.zeros((n, 1))]),
            np.concatenate([s, [0.0]])[None, :],
            np.concatenate([-s, [0.0]])[None, :],
        ])
    else:
        # variables (lam, u): minimize sum u, -u_j <= (A'lam)_j <= u_j
        cost = np.concatenate([np.zeros(n), np.ones(k)])
        G = np.vstack([
            np.hstack([At, -np.eye(k)]),
            np.hstack([-At, -np.eye(k)]),
            np.hstack([sign_rows, np.zeros((n, k))]),
            np.concatenate([s, np.zeros(k)])[None, :],
            np.concatenate([-s, np.zeros(k)])[None, :],
        ])
    h = np.concatenate([np.zeros(2 * k + n), [1.0, -1.0]])
    res = lp.solve_lp(cost, G, h)
    if res.status is not lp.LpStatus.OPTIMAL:
        raise InconsistentNumericsError("facet minimization failed")
    return linalg.norm(At @ res.x[:n], dual)


# ---------------------------------------------------------------------------
# metric projection


def projection_block(A_D: np.ndarray, n: int) -> np.ndarray:
    """(I - A_D'(A_D A_D')^{-1} A_D | A_D'(A_D A_D')^{-1})."""
    if A_D.shape[0] == 0:
        return np.eye(n)
    P = A_D.T @ linalg.inverse(A_D @ A_D.T)
    return np.hstack([np.eye(n) - P @ A_D, P])


def lip_projection(A, b, z) -> ModulusReport:
    """Lipschitz modulus of the Euclidean projection onto {x : Ax <= b} at z.

    Uses the closed-form solution blocks for Q = I and cross-checks the result
    against the generic bordered-matrix path (stored in ``cross_check``)."""
    z = np.asarray(z, dtype=float).ravel()
    A = np.asarray(A, dtype=float).reshape(-1, z.size)
    b = np.asarray(b, dtype=float).ravel()
    if not lp.slater_holds(A, b):
        raise AnalysisError("Slater constraint qualification fails", code="SCQ_FAILS")
    inst = projection_instance(z, A, b)
    sol = _nominal_solution(inst)
    x_bar = sol.x
    active = qp.active_set(A, b, x_bar)
    families = fam.families_for_target(inst, active, z - x_bar)
    per_D = {}
    for D in families.extended:
        A_D = A[list(D), :].reshape(len(D), z.size)
        res = operator_norm(projection_block(A_D, z.size), VectorNorm.L2, len(D))
        per_D[D] = PerD(True, res.value, res)
    report = _assemble_report(inst, x_bar, bool(sol.unique), families, per_D, [])
    generic = lip_modulus(inst)
    report.cross_check = generic.modulus
    if not abs(generic.modulus - report.modulus) <= tol().norm * max(1.0, report.modulus):
        raise InconsistentNumericsError(
            f"closed-form projection modulus {report.modulus!r} != generic value {generic.modulus!r}"
        )
    return report
