"""Exception types. Each carries a machine-readable ``code``."""

from __future__ import annotations


class QlipError(Exception):
    code = "ERROR"

    def __init__(self, message: str = "", code: str | None = None):
        if code is not None:
            self.code = code
        super().__init__(message or self.code)


class SingularMatrixError(QlipError, ArithmeticError):
    code = "SINGULAR"


class NotSymmetricError(QlipError, ValueError):
    code = "NOT_SYMMETRIC"


class ValidationError(QlipError, ValueError):
    """Rejected instance data; ``code`` is one of NOT_SYMMETRIC, NOT_PSD,
    DIMENSION_MISMATCH, NONFINITE, UNKNOWN_KEY, MISSING_KEY, BAD_NORM."""

    code = "VALIDATION_ERROR"


class InfeasiblePointError(QlipError, ValueError):
    code = "INFEASIBLE_POINT"


class NotOptimalError(QlipError):
    """Raised by KKT verification; ``code`` is INFEASIBLE_POINT or
    STATIONARITY_FAILS."""

    code = "NOT_OPTIMAL"


class NotAGraphPointError(QlipError):
    code = "NOT_A_GRAPH_POINT"


class AnalysisError(QlipError):
    """Precondition failures of the modulus pipeline: SCQ_FAILS,
    NOMINAL_INFEASIBLE, NOMINAL_UNBOUNDED, D0_NOT_IN_FAMILY, NOT_LINEAR,
    NOT_SQUARE, NOT_AUBIN."""

    code = "ANALYSIS_ERROR"


class InconsistentNumericsError(QlipError, ArithmeticError):
    code = "INCONSISTENT_NUMERICS"


class SolverFailure(QlipError):
    code = "SOLVER_FAILURE"

    def __init__(self, message: str, sample=None):
        super().__init__(message)
        self.sample = sample


class DimensionMismatchError(QlipError, ValueError):
    code = "DIMENSION_MISMATCH"
