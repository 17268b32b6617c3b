"""Exception hierarchy shared by all ginprod modules."""


class GinprodError(Exception):
    """Base class. ``code`` is a stable machine-readable identifier."""

    code = "ginprod.error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ParameterError(GinprodError, ValueError):
    code = "param.invalid"


class DomainError(GinprodError, ValueError):
    code = "domain"


class ConvergenceError(GinprodError, ArithmeticError):
    """Raised when an iterative method runs out of budget.

    ``best`` holds the best available estimate (or None).
    """

    code = "numeric.convergence"

    def __init__(self, message, best=None, code=None):
        super().__init__(message, code)
        self.best = best


class TruncationError(ConvergenceError):
    code = "numeric.truncation"


class GeometryError(GinprodError, ValueError):
    code = "contour.geometry"


class PrecisionError(GinprodError, ArithmeticError):
    code = "numeric.precision"


class DiagonalGuardError(GinprodError, ValueError):
    code = "kernel.diagonal"
