"""Exception hierarchy shared by all modules."""


class ExtPhaseError(Exception):
    """Base class for errors raised by this package."""


class InvalidMatrix(ExtPhaseError, ValueError):
    """A matrix argument is not square or contains non-finite entries."""


class DimensionError(ExtPhaseError, ValueError):
    """Operands have incompatible shapes."""


class LogDomainError(ExtPhaseError, ArithmeticError):
    """Matrix logarithm requested too far from the identity.

    Raised by the projection method when ``h * A(t)`` leaves the domain of the
    truncated logarithm series, i.e. the step size is too large.
    """


class SeriesDivergence(ExtPhaseError, ArithmeticError):
    """A truncated power series did not reach its tolerance within its term cap."""


class StageSolveError(ExtPhaseError, ArithmeticError):
    """The linear stage system of an implicit method is singular."""


class NonConvergence(ExtPhaseError, ArithmeticError):
    """An iteration or a convergence study failed to converge."""


class NotSymplectic(ExtPhaseError, ValueError):
    """A step matrix expected to lie in Sp(2n) does not."""


class NotApplicable(ExtPhaseError):
    """A diagnostic was requested for a method that lacks the needed component."""


class EmptyInput(ExtPhaseError, ValueError):
    """An operation received an empty series."""


class ConfigError(ExtPhaseError, ValueError):
    """An experiment configuration is malformed or inconsistent."""
