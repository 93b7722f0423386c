"""Exception hierarchy shared across the package."""


class MhdWaveError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MhdWaveError):
    """Invalid configuration: bad grid/parameter combination, malformed config
    document, unknown key, or out-of-range value."""

    def __init__(self, message, path=None):
        self.path = path
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class DomainError(MhdWaveError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class StepSizeError(MhdWaveError):
    """Time step violates the advective CFL restriction."""

    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message)


class BlowUpError(MhdWaveError):
    """Non-finite values appeared during integration."""

    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message)


class DataError(MhdWaveError, ValueError):
    """Series data unusable for the requested analysis (e.g. nonpositive
    values passed to a log-log fit)."""


class WindowError(MhdWaveError, ValueError):
    """Fit window empty, inverted, or holding too few samples."""


class UsageError(MhdWaveError):
    """Operation applied to an object that does not satisfy its contract
    (e.g. a linear-run diagnostic applied to a nonlinear trajectory)."""
