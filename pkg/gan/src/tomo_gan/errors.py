"""Exception types for the enhancer package."""


class GanError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(GanError, ValueError):
    """A parameter combination that can never produce a valid model."""


class DataError(GanError, ValueError):
    """A corpus, manifest, or image that cannot be used as given."""


class TrainingError(GanError, RuntimeError):
    """Optimization broke down; the message names the epoch and step."""


class CheckpointError(GanError, RuntimeError):
    """A saved model that this version cannot load."""
