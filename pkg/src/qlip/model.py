"""Problem data: the canonically perturbed convex QP

    minimize  1/2 x'Qx + c'x   subject to  Ax <= b

with (Q, A) fixed and (c, b) the parameter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import linalg
from .errors import ValidationError
from .linalg import VectorNorm
from .tolerances import tol

INSTANCE_KEYS = frozenset({"n", "m", "Q", "A", "b", "c", "norm"})


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ParamPoint:
    c: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c", _frozen(np.asarray(self.c, dtype=float).ravel()))
        object.__setattr__(self, "b", _frozen(np.asarray(self.b, dtype=float).ravel()))
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.b))):
            raise ValidationError("parameter point has non-finite entries", code="NONFINITE")

    def shifted(self, dc=None, db=None) -> "ParamPoint":
        c = self.c if dc is None else self.c + np.asarray(dc, dtype=float)
        b = self.b if db is None else self.b + np.asarray(db, dtype=float)
        return ParamPoint(c, b)


@dataclass(frozen=True)
class QpInstance:
    """A validated instance. Build it through :func:`validate`."""

    Q: np.ndarray
    A: np.ndarray
    c_bar: np.ndarray
    b_bar: np.ndarray
    var_norm: VectorNorm = VectorNorm.L2
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def nominal(self) -> ParamPoint:
        return ParamPoint(self.c_bar, self.b_bar)

    def with_nominal(self, p: ParamPoint) -> "QpInstance":
        return QpInstance(self.Q, self.A, _frozen(p.c), _frozen(p.b), self.var_norm, self.meta)

    def restricted(self, D) -> tuple[np.ndarray, np.ndarray]:
        """Rows ``A_D`` and ``b_bar_D`` for a tuple of 0-based indices."""
        idx = list(D)
        return self.A[idx, :].reshape(len(idx), self.n), self.b_bar[idx]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "Q": self.Q.tolist(),
            "A": self.A.tolist(),
            "b": self.b_bar.tolist(),
            "c": self.c_bar.tolist(),
            "norm": self.var_norm.value,
        }


def _matrix(raw, rows: int, cols: int, name: str) -> np.ndarray:
    try:
        M = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not a numeric array: {exc}", code="DIMENSION_MISMATCH") from None
    if rows == 0 or cols == 0:
        M = M.reshape(rows, cols) if M.size == 0 else M
    if M.shape != (rows, cols):
        raise ValidationError(f"{name} has shape {M.shape}, expected {(rows, cols)}", code="DIMENSION_MISMATCH")
    if not np.all(np.isfinite(M)):
        raise ValidationError(f"{name} has non-finite entries", code="NONFINITE")
    return M


def _vector(raw, size: int, name: str) -> np.ndarray:
    try:
        v = np.array(raw, dtype=float).ravel() if raw is not None else None
    except (TypeError, ValueError):
        raise ValidationError(f"{name} is not a numeric array", code="DIMENSION_MISMATCH") from None
    if v is None or v.shape != (size,):
        shape = None if v is None else v.shape
        raise ValidationError(f"{name} has shape {shape}, expected ({size},)", code="DIMENSION_MISMATCH")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} has non-finite entries", code="NONFINITE")
    return v


def validate(Q, A, b, c, norm: VectorNorm | str = VectorNorm.L2, n: int | None = None, m: int | None = None,
             meta: Mapping[str, Any] | None = None) -> QpInstance:
    """Check and freeze raw instance data.

    Q is symmetrized as (Q + Q')/2 once its asymmetry is within tolerance.
    Raises ValidationError with ``code`` NOT_SYMMETRIC, NOT_PSD,
    DIMENSION_MISMATCH or NONFINITE.
    """
    var_norm = VectorNorm.parse(norm) if isinstance(norm, str) else norm
    Qa = np.array(Q, dtype=float) if Q is not None else None
    if Qa is None or Qa.ndim != 2:
        raise ValidationError("Q must be a 2-D array", code="DIMENSION_MISMATCH")
    n = Qa.shape[0] if n is None else int(n)
    if m is None:
        Aa = np.array(A, dtype=float)
        m = Aa.shape[0] if Aa.ndim == 2 else 0
    m = int(m)
    if n < 1 or m < 0:
        raise ValidationError(f"invalid dimensions n={n}, m={m}", code="DIMENSION_MISMATCH")
    Qm = _matrix(Q, n, n, "Q")
    Am = _matrix(A if m else np.zeros((0, n)), m, n, "A")
    bv = _vector(b if m else [], m, "b")
    cv = _vector(c, n, "c")
    t = tol()
    scale = max(1.0, float(np.max(np.abs(Qm))))
    if float(np.max(np.abs(Qm - Qm.T))) > t.sym * scale:
        raise ValidationError("Q is not symmetric", code="NOT_SYMMETRIC")
    Qm = 0.5 * (Qm + Qm.T)
    w, _ = linalg.sym_eig(Qm)
    if w[-1] < -t.psd * max(1.0, float(w[0])):
        raise ValidationError(f"Q is not positive semidefinite (smallest eigenvalue {w[-1]:.3g})", code="NOT_PSD")
    return QpInstance(_frozen(Qm), _frozen(Am), _frozen(cv), _frozen(bv), var_norm, dict(meta or {}))


def from_dict(data: Mapping[str, Any]) -> QpInstance:
    if not isinstance(data, Mapping):
        raise ValidationError("instance must be a JSON object", code="DIMENSION_MISMATCH")
    unknown = set(data) - INSTANCE_KEYS
    if unknown:
        raise ValidationError(f"unknown keys: {sorted(unknown)}", code="UNKNOWN_KEY")
    missing = {"n", "m", "Q", "A", "b", "c"} - set(data)
    if missing:
        raise ValidationError(f"missing keys: {sorted(missing)}", code="MISSING_KEY")
    for key in ("n", "m"):
        if not isinstance(data[key], int) or isinstance(data[key], bool):
            raise ValidationError(f"{key} must be an integer", code="DIMENSION_MISMATCH")
    try:
        norm = VectorNorm.parse(data.get("norm", "l2"))
    except (ValueError, AttributeError):
        raise ValidationError(f"bad norm {data.get('norm')!r}", code="BAD_NORM") from None
    return validate(data["Q"], data["A"], data["b"], data["c"], norm, n=data["n"], m=data["m"])


def loads(text: str) -> QpInstance:
    return from_dict(json.loads(text))


def load(path) -> QpInstance:
    return loads(Path(path).read_text())


def dumps(inst: QpInstance) -> str:
    # repr() of a float is the shortest string that round-trips exactly
    return json.dumps(inst.to_dict(), indent=2)


def param_distance(p1: ParamPoint, p2: ParamPoint, inst: QpInstance) -> float:
    """max{ ||c2 - c1||_*, ||b2 - b1||_inf } with ||.||_* dual to the variable norm."""
    if p1.c.shape != p2.c.shape or p1.b.shape != p2.b.shape:
        raise ValueError("parameter points have different dimensions")
    dc = linalg.dual_norm(p2.c - p1.c, inst.var_norm)
    db = linalg.norm(p2.b - p1.b, VectorNorm.LINF)
    return max(dc, db)


def projection_instance(z, A, b) -> QpInstance:
    """Euclidean projection of ``z`` onto {x : Ax <= b} as a QP: Q = I, c = -z."""
    z = np.asarray(z, dtype=float).ravel()
    n = z.size
    A = np.asarray(A, dtype=float).reshape(-1, n)
    return validate(np.eye(n), A, b, -z, VectorNorm.L2)
