"""Exception types shared by the numerical modules."""


class RelkinError(Exception):
    """Base class for all package errors."""


class DomainError(RelkinError, ValueError):
    """Argument outside the mathematical domain of a function."""


class UsageError(RelkinError, ValueError):
    """Inconsistent or invalid call (mismatched light speeds, bad shapes)."""


class NumericError(RelkinError, ArithmeticError):
    """A quantity that must be nonnegative came out negative beyond tolerance."""


class ConvergenceError(RelkinError, RuntimeError):
    """Root finding, quadrature or an iterative solve failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class AccuracyError(RelkinError, RuntimeError):
    """A discretization is too coarse for the requested tolerance."""


class BlowUpError(RelkinError, RuntimeError):
    """A time integration left the admissible state region."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
