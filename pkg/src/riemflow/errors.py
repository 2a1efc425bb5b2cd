"""Exception types shared across the package."""


class RiemflowError(Exception):
    """Base class for all package errors."""


class DomainError(RiemflowError):
    """A point lies outside the metric's coordinate domain."""


class DegenerateError(RiemflowError):
    """Evaluation at a point where the metric weight vanishes."""


class DegenerateElement(RiemflowError):
    """A polygonal element has (numerically) zero or ambiguous length."""


class UnsupportedSplit(RiemflowError):
    """No convexity splitting is available for this metric family."""


class UnsupportedBoundary(RiemflowError):
    """Degenerate-axis boundary data requested for an incompatible metric."""


class SolveError(RiemflowError):
    """The reduced linear system is singular or the solve failed."""


class NewtonDiverged(RiemflowError):
    """Newton iteration failed to converge within the allowed iterations."""


class AssumptionViolated(RiemflowError):
    """A well-posedness assumption on the current mesh failed."""


class ConfigError(RiemflowError):
    """Invalid scenario configuration; the message carries the field path."""


class GeneratorError(RiemflowError):
    """Inconsistent initial-curve specification."""
