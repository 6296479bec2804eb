"""Exception hierarchy.

Every error raised by the library derives from :class:`StressTestError`, which
is also a ``ValueError`` so callers validating user input can catch either.
"""


class StressTestError(ValueError):
    """Base class for all library errors."""


class ParameterError(StressTestError):
    """A numeric parameter is outside its admissible range."""


class GridError(StressTestError):
    """A support grid is malformed (unsorted, duplicated, negative, too short)."""


class DomainError(StressTestError):
    """A lifetime argument is outside the domain of the operation."""


class IncompatibleError(StressTestError):
    """Two objects that must share a grid or mission time do not."""


class DegenerateBetError(StressTestError):
    """The quoted probability is 0 or 1, so no two-sided bet exists."""


class DegeneracyError(StressTestError):
    """Rescaling a stress function pushed it below the positivity floor."""


class PreconditionError(StressTestError):
    """An operation was called on inputs that violate its precondition."""


class SupportError(StressTestError):
    """A pmf puts mass where the reference pmf has none."""


class InfeasibleError(StressTestError):
    """A design problem admits no normalized stress function."""


class NoSolutionError(StressTestError):
    """Every candidate of a parametric search was rejected."""


class ProblemTooLargeError(StressTestError):
    """An exhaustive search was refused because of combinatorial growth."""


class ShapeError(StressTestError):
    """A payoff curve does not have the monotone shape a threshold rule needs."""


class ArityError(StressTestError):
    """The number of observations does not match the certification policy."""


class UnachievableError(StressTestError):
    """The requested certitude cannot be reached."""
