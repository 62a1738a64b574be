"""Exception hierarchy shared by every module of the package."""


class PureJumpError(Exception):
    """Base class for all package errors."""


class DomainError(PureJumpError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class DegenerateStatisticError(PureJumpError, ArithmeticError):
    """A ratio statistic has an empty (zero) denominator.

    The raw counts are kept on the exception so callers can report them.
    """

    def __init__(self, message, **counts):
        super().__init__(message)
        self.counts = counts


class LoadError(PureJumpError, ValueError):
    """Input data could not be parsed; ``lines`` lists the offending line numbers."""

    def __init__(self, message, lines=()):
        super().__init__(message)
        self.lines = list(lines)


class ConsistencyWarning(UserWarning):
    """Tuning parameters violate a condition needed for consistency under the alternative."""
