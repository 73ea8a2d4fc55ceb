"""Exception types shared across the toolkit."""


class TomoError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(TomoError, ValueError):
    """A parameter combination that can never produce a valid object."""


class DomainError(TomoError, ValueError):
    """Input values outside the physical or numerical domain of an operation."""


class ShapeError(TomoError, ValueError):
    """Array dimensions that do not match between coupled inputs."""


class SolverError(TomoError, RuntimeError):
    """A linear solve that failed or did not reach the required residual."""
