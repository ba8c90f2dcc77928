"""Empirical cross-check of the Lipschitz modulus by re-solving perturbed QPs.

Two oracles, both independent of the bordered-matrix formula except for the
choice of probing direction:

estimate_modulus  : random parameter pairs in shrinking balls around the
                    nominal parameter; every ratio is a lower bound for the
                    local Lipschitz constant.
directional_probe : a pair of parameters chosen so that the solution moves
                    along the attaining direction of the formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg, qp
from .errors import AnalysisError, SolverFailure
from .linalg import VectorNorm
from .model import ParamPoint, QpInstance, param_distance
from .modulus import ModulusReport, OperatorNormResult, lip_modulus

DEFAULT_RADII = (1e-2, 1e-3, 1e-4)
DEFAULT_SAMPLES = 2000


@dataclass(frozen=True)
class Sample:
    p1: ParamPoint
    p2: ParamPoint
    x2: np.ndarray
    dist_to_S1: float
    ratio: float
    radius: float


@dataclass
class PerturbationTrace:
    samples: list[Sample] = field(default_factory=list)
    radii: tuple[float, ...] = ()

    @property
    def best_ratio(self) -> float:
        return max((s.ratio for s in self.samples), default=0.0)

    def best_at(self, radius: float) -> float:
        return max((s.ratio for s in self.samples if s.radius == radius), default=0.0)


def _ratio(num: float, den: float) -> float:
    # 0/0 := 0
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def _require_aubin(inst: QpInstance, report: Optional[ModulusReport]) -> ModulusReport:
    report = lip_modulus(inst) if report is None else report
    if not report.aubin:
        raise AnalysisError("the oracle needs an instance with the Aubin property", code="NOT_AUBIN")
    return report


def _solve(inst: QpInstance, p: ParamPoint, sample_info: dict, first=()) -> qp.QpSolution:
    sol = qp.solve(inst, p, check_unique=False, first=first)
    if sol.status is not qp.QpStatus.OPTIMAL:
        raise SolverFailure(f"perturbed problem is {sol.status.value}", sample=sample_info)
    return sol


def sample_ball(rng: np.random.Generator, kind: VectorNorm, dim: int, radius: float) -> np.ndarray:
    """One point uniformly distributed in the ``kind`` ball of the given radius."""
    if dim == 0:
        return np.zeros(0)
    if kind is VectorNorm.LINF:
        return radius * rng.uniform(-1.0, 1.0, dim)
    if kind is VectorNorm.L2:
        g = rng.standard_normal(dim)
        return radius * rng.beta(dim, 1.0) * g / np.linalg.norm(g)
    # l1 ball: Dirichlet(1,...,1) with a slack coordinate, random signs
    e = rng.exponential(size=dim + 1)
    signs = rng.choice((-1.0, 1.0), size=dim)
    return radius * signs * e[:dim] / e.sum()


def _sample_param(rng, inst: QpInstance, radius: float) -> ParamPoint:
    dc = sample_ball(rng, inst.var_norm.dual, inst.n, radius)
    db = sample_ball(rng, VectorNorm.LINF, inst.m, radius)
    return inst.nominal.shifted(dc, db)


def estimate_modulus(inst: QpInstance, radii: Sequence[float] = DEFAULT_RADII,
                     samples_per_radius: int = DEFAULT_SAMPLES, seed: int = 0,
                     report: Optional[ModulusReport] = None) -> PerturbationTrace:
    """Random-pair estimate of the local Lipschitz constant of the argmin map.

    For each radius r, pairs (p1, p2) are drawn independently and uniformly
    in the r-ball around the nominal parameter; the ratio
    ||x2 - x1|| / d(p1, p2) is recorded (0/0 := 0). Solutions are unique
    near the nominal point under the Aubin property, so ||x2 - x1|| is the
    distance from x2 to S(p1). Deterministic given ``seed``."""
    report = _require_aubin(inst, report)
    rng = np.random.default_rng(seed)
    trace = PerturbationTrace(radii=tuple(float(r) for r in radii))
    hint = tuple(report.extended)
    for r in trace.radii:
        for k in range(samples_per_radius):
            p1 = _sample_param(rng, inst, r)
            p2 = _sample_param(rng, inst, r)
            info = {"radius": r, "index": k, "p1": p1, "p2": p2}
            x1 = _solve(inst, p1, info, hint).x
            x2 = _solve(inst, p2, info, hint).x
            dist = linalg.norm(x2 - x1, inst.var_norm)
            trace.samples.append(Sample(p1, p2, x2, dist, _ratio(dist, param_distance(p1, p2, inst)), r))
    return trace


def directional_probe(inst: QpInstance, direction: Optional[OperatorNormResult] = None,
                      D=None, radii: Sequence[float] = DEFAULT_RADII,
                      report: Optional[ModulusReport] = None) -> PerturbationTrace:
    """Probe the argmin map along a direction of the bordered system for D
    (the attaining set and direction by default).

    The base point p1 shifts c by -r * A_D' 1, which makes every multiplier of
    D strictly positive, and relaxes the constraints outside D by r, so the
    solution stays at the nominal one with active set D. The second point
    moves (c, b_D) by t * (-alpha_star, beta_star) with t small enough that
    the active set is unchanged; constraints outside D are relaxed outward by
    [a_j'x2 - b_j]_+ so that the pair stays in the graph."""
    report = _require_aubin(inst, report)
    if D is None:
        D = report.attaining_D
    if direction is None:
        direction = report.per_D[tuple(D)].direction
    D = tuple(D)
    n, d = inst.n, len(D)
    alpha = np.asarray(direction.alpha_star, dtype=float)
    beta = np.asarray(direction.beta_star, dtype=float)
    B = np.linalg.inv(qp.bordered_matrix(inst.Q, inst.A[list(D), :].reshape(d, n)))
    dz = B @ np.concatenate([-alpha, beta])
    dx, dlam = dz[:n], dz[n:]
    outside = [j for j in range(inst.m) if j not in D]
    A_out = inst.A[outside, :]
    growth = 1.0 + float(np.max(np.abs(dlam), initial=0.0)) + float(np.max(np.abs(A_out @ dx), initial=0.0))

    trace = PerturbationTrace(radii=tuple(float(r) for r in radii))
    for r in trace.radii:
        eps = r
        A_D = inst.A[list(D), :].reshape(d, n)
        db1 = np.zeros(inst.m)
        db1[outside] = eps
        p1 = inst.nominal.shifted(-eps * A_D.T @ np.ones(d), db1)
        t = r / (2.0 * growth)
        db2 = np.zeros(inst.m)
        db2[list(D)] = t * beta
        p2 = p1.shifted(-t * alpha, db2)
        info = {"radius": r, "index": 0, "p1": p1, "p2": p2}
        x1 = _solve(inst, p1, info, (D,)).x
        x2 = _solve(inst, p2, info, (D,)).x
        relax = np.zeros(inst.m)
        if outside:
            relax[outside] = np.maximum(A_out @ x2 - p2.b[outside], 0.0)
        if np.any(relax > 0):
            p2 = p2.shifted(db=relax)
            x2 = _solve(inst, p2, info, (D,)).x
        dist = linalg.norm(x2 - x1, inst.var_norm)
        trace.samples.append(Sample(p1, p2, x2, dist, _ratio(dist, param_distance(p1, p2, inst)), r))
    return trace
