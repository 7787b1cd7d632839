"""Exception hierarchy shared by all modules."""


class LevySPDEError(Exception):
    """Base class for library errors."""


class ParameterError(LevySPDEError, ValueError):
    """A parameter lies outside its admissible domain."""


class ResourceError(LevySPDEError, MemoryError):
    """A request would exceed addressable resources (e.g. too many cells)."""


class NumericalDomainError(LevySPDEError, ArithmeticError):
    """An integrand produced a non-finite value where a finite one is required."""


class UnsupportedEvaluation(LevySPDEError, NotImplementedError):
    """The requested evaluation is not defined for this object."""


class RefusedError(LevySPDEError):
    """The requested solution does not exist for this (equation, d, alpha)."""


class AccuracyError(LevySPDEError, ArithmeticError):
    """Quadrature or extrapolation did not reach the requested accuracy.

    The best estimate and its error bound are kept on the exception so that
    callers can still inspect them.
    """

    def __init__(self, message, estimate=None, error_bound=None, diagnostics=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
        self.diagnostics = diagnostics or {}


class UnsupportedRefusal(RefusedError, UnsupportedEvaluation):
    """Refused because the kernel is not a function (wave, d >= 3)."""
