"""Exception types shared across the package."""


class HetmnlError(Exception):
    """Base class for every error this package raises deliberately."""


class ConfigError(HetmnlError):
    """Invalid model specification, configuration, or dimension mismatch."""


class DataError(HetmnlError):
    """Input data violates the long-format contract."""


class EvaluationError(HetmnlError):
    """A likelihood quantity could not be evaluated to a finite value."""

    def __init__(self, message: str, chooser_id: str | None = None):
        super().__init__(message)
        self.chooser_id = chooser_id


class NonIdentifiedError(HetmnlError):
    """The observed information is singular (or indefinite) at the requested point."""


class ServiceError(HetmnlError):
    """A remote service call failed or was rejected."""
