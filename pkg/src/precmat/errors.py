"""Exception hierarchy shared by all precmat modules."""


class PrecmatError(Exception):
    """Base class for errors raised by precmat."""


class NotPositiveDefinite(PrecmatError):
    """A matrix expected to be positive definite failed to factor."""


class ConvergenceFailure(PrecmatError):
    """An iterative kernel (eigensolver) did not converge."""


class MaxRestartsExceeded(PrecmatError):
    """A solver shrank its step size more times than allowed."""


class NonFiniteObjective(PrecmatError):
    """The objective became NaN, which only happens with corrupted input."""


class InvalidSchedule(PrecmatError, ValueError):
    """A step-size, batch or averaging schedule violates its summability conditions."""


class DegenerateRate(PrecmatError, ValueError):
    """Contraction factor is undefined for the given spectral box."""


class DimensionMismatch(PrecmatError, ValueError):
    pass


class NotSymmetric(PrecmatError, ValueError):
    pass


class ParseError(PrecmatError, ValueError):
    """Malformed matrix file. Carries 1-based ``line`` and ``column`` when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
