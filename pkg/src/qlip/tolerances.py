"""Numerical thresholds shared by every module.

All values are multiplied by the ``QLIP_TOLERANCE_SCALE`` environment
variable (default 1), which is read on every call so that a CLI run or a
test can rescale them without reloading the package.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

ENV_VAR = "QLIP_TOLERANCE_SCALE"


@dataclass(frozen=True)
class Tolerances:
    pivot: float = 1e-10
    resid: float = 1e-9
    sym: float = 1e-9
    eig: float = 1e-8
    psd: float = 1e-9
    feas: float = 1e-9
    strict: float = 1e-9
    act: float = 1e-9
    norm: float = 1e-8

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(**{k: v * factor for k, v in self.__dict__.items()})


_BASE = Tolerances()


def scale_factor() -> float:
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return 1.0
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_VAR} must be a positive number, got {raw!r}") from exc
    if not value > 0:
        raise ValueError(f"{ENV_VAR} must be a positive number, got {raw!r}")
    return value


def tol() -> Tolerances:
    factor = scale_factor()
    return _BASE if factor == 1.0 else _BASE.scaled(factor)
