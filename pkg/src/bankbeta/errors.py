"""Exception hierarchy.

Three branches matter to callers: configuration problems, data problems, and
numerical failures. The CLI maps each branch to a distinct exit code, so new
error types should subclass the branch whose exit code they deserve.
"""

from __future__ import annotations


class BankBetaError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(BankBetaError):
    """Invalid or missing configuration (bad key, unreadable input path)."""


class DataError(BankBetaError):
    """Input data violates a documented requirement."""


class SchemaError(DataError):
    """A file's header or field layout does not match its documented schema."""


class AlignmentError(DataError):
    """Series cannot be aligned (calendar gaps, missing coverage)."""


class InsufficientDataError(DataError):
    """Too few observations or too small a cross-section for the operation."""


class InsufficientVariationError(DataError):
    """A series is constant where variation is required."""


class NumericalError(BankBetaError):
    """A numerical procedure failed or produced a degenerate quantity."""


class SingularDesignError(NumericalError):
    """Design matrix is rank deficient."""


class DegenerateStartError(NumericalError):
    """Leading subdesign for recursive residuals is singular; advance the start index."""


class CovarianceDegeneracyError(NumericalError):
    """Innovation variance collapsed below the floor after the burn-in period."""


class OptimizationError(NumericalError):
    """Every optimizer start failed to converge.

    Attributes
    ----------
    best : object or None
        Best point found across starts, if any, so callers can inspect or
        resume from it.
    """

    def __init__(self, message: str, best: object | None = None):
        super().__init__(message)
        self.best = best
