"""Aubin property and Lipschitz modulus of the argmin mapping of a convex QP
under simultaneous perturbation of the linear objective term and the
right-hand side of the inequality constraints."""

from .errors import QlipError
from .linalg import VectorNorm
from .model import ParamPoint, QpInstance, load, loads, param_distance, validate
from .modulus import ModulusReport, lip_modulus, lip_modulus_restricted, lip_projection, lip_SD, operator_norm
from .qp import solve

__all__ = [
    "QlipError",
    "VectorNorm",
    "ParamPoint",
    "QpInstance",
    "load",
    "loads",
    "param_distance",
    "validate",
    "ModulusReport",
    "lip_modulus",
    "lip_modulus_restricted",
    "lip_projection",
    "lip_SD",
    "operator_norm",
    "solve",
]
