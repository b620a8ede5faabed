"""Exception hierarchy shared by every module."""


class TricfracError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(TricfracError, ValueError):
    """Input failed a precondition (non-finite entry, bad parameter)."""


class DimensionError(ValidationError):
    """Array lengths are inconsistent with the declared truncation size."""


class NumericalError(TricfracError, ArithmeticError):
    """A numerical procedure failed (non-convergence, singular pivot)."""


class PoleError(NumericalError):
    """A continued-fraction denominator vanished.

    The shift sits numerically on a pole of some trailing submatrix.
    ``index`` is the 1-based position at which the recurrence broke down.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularityError(NumericalError):
    """A matrix or determinant is singular to working precision."""


class InconsistencyError(NumericalError):
    """Fixed-point theory and direct iteration disagree.

    Both results are attached so the caller can inspect the case.
    """

    def __init__(self, message, report=None, trace=None):
        super().__init__(message)
        self.report = report
        self.trace = trace
