"""Active indices and the two families of KKT index sets at a graph point.

minimal  : index sets D of active constraints whose gradients conically
           generate -(Qx + c) and that are minimal under inclusion.
extended : index sets D of active constraints with linearly independent
           gradients that conically generate -(Qx + c); multipliers may vanish.

Index sets are sorted tuples of 0-based constraint indices, listed by size
and then lexicographically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import linalg, lp, qp
from .errors import InfeasiblePointError, NotAGraphPointError, NotOptimalError
from .model import ParamPoint, QpInstance
from .tolerances import tol

IndexSet = tuple[int, ...]


@dataclass(frozen=True)
class IndexFamilies:
    active: IndexSet
    minimal: tuple[IndexSet, ...]
    extended: tuple[IndexSet, ...]
    degenerate: tuple[IndexSet, ...] = field(default=(), compare=False)

    def nurnberger(self, n: int) -> bool:
        """Every minimal set has exactly n elements."""
        return all(len(D) == n for D in self.minimal)


def active_indices(inst: QpInstance, p: ParamPoint | None, x) -> IndexSet:
    p = inst.nominal if p is None else p
    x = np.asarray(x, dtype=float).ravel()
    qp.check_feasible(inst.A, p.b, x)
    return qp.active_set(inst.A, p.b, x)


def _rows(inst: QpInstance, D) -> np.ndarray:
    return inst.A[list(D), :].reshape(len(D), inst.n)


def _gradient_target(inst: QpInstance, p: ParamPoint, x) -> np.ndarray:
    return -(inst.Q @ x + p.c)


def _require_graph_point(inst, p, x) -> None:
    try:
        qp.verify_kkt(inst, p, x)
    except (NotOptimalError, InfeasiblePointError) as exc:
        raise NotAGraphPointError(f"x is not optimal for P(c, b): {exc}") from None


def _subsets(items, max_size):
    for k in range(max_size + 1):
        yield from itertools.combinations(items, k)


def minimal_kkt_family(inst: QpInstance, p: ParamPoint | None, x) -> tuple[IndexSet, ...]:
    p = inst.nominal if p is None else p
    x = np.asarray(x, dtype=float).ravel()
    _require_graph_point(inst, p, x)
    return _minimal_for_target(inst, qp.active_set(inst.A, p.b, x), _gradient_target(inst, p, x))


def _minimal_for_target(inst: QpInstance, active: IndexSet, v) -> tuple[IndexSet, ...]:
    found: list[IndexSet] = []
    # minimal sets have independent generators, hence at most n elements
    for D in _subsets(active, min(len(active), inst.n)):
        if any(set(E) <= set(D) for E in found):
            continue
        if lp.in_cone(v, _rows(inst, D))[0]:
            found.append(D)
    return tuple(found)


def _independent(inst: QpInstance, D) -> tuple[bool, bool]:
    """(independent, near-degenerate) for the generators of D."""
    if not D:
        return True, False
    R, pivots, ratio = linalg.row_reduce(_rows(inst, D))
    near = len(pivots) == len(D) and ratio < 10 * tol().pivot
    return len(pivots) == len(D), near


def extended_kkt_family(inst: QpInstance, p: ParamPoint | None, x) -> tuple[IndexSet, ...]:
    return kkt_families(inst, p, x).extended


def kkt_families(inst: QpInstance, p: ParamPoint | None, x) -> IndexFamilies:
    p = inst.nominal if p is None else p
    x = np.asarray(x, dtype=float).ravel()
    _require_graph_point(inst, p, x)
    active = qp.active_set(inst.A, p.b, x)
    return families_for_target(inst, active, _gradient_target(inst, p, x))


def families_for_target(inst: QpInstance, active: IndexSet, v) -> IndexFamilies:
    """Both families for an explicit cone target ``v`` over the given active
    set (for the metric projection the target is z - x)."""
    extended: list[IndexSet] = []
    degenerate: list[IndexSet] = []
    for D in _subsets(active, min(len(active), inst.n)):
        indep, near = _independent(inst, D)
        if near:
            degenerate.append(D)
        if indep and lp.in_cone(v, _rows(inst, D))[0]:
            extended.append(D)
    return IndexFamilies(active, _minimal_for_target(inst, active, v), tuple(extended), tuple(degenerate))
