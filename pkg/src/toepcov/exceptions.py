"""Exception types shared across the package."""


class ToepcovError(Exception):
    """Base class for all package errors."""


class DomainError(ToepcovError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(ToepcovError, ArithmeticError):
    """A series or iteration failed to converge.

    ``partial`` holds the last partial result and ``terms`` the number of
    terms (or iterations) spent when available.
    """

    def __init__(self, message, partial=None, terms=None):
        super().__init__(message)
        self.partial = partial
        self.terms = terms


class RangeError(ToepcovError, OverflowError):
    """A result would overflow double precision."""


class SingularMatrixError(ToepcovError, ZeroDivisionError):
    """A triangular matrix has a zero diagonal."""


class NumericError(ToepcovError, ArithmeticError):
    """Quadrature or another numerical routine missed its tolerance.

    ``achieved`` carries the error estimate that was actually reached.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class BracketError(ToepcovError, ValueError):
    """The supplied bracket does not straddle the target value."""


class ConfigError(ToepcovError, ValueError):
    """A run configuration failed schema or semantic validation."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])
