"""Exception types raised across the package."""


class AxyError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(AxyError, ValueError):
    pass


class DomainError(AxyError, ValueError):
    pass


class DegenerateModeError(AxyError, ValueError):
    pass


class ScheduleInfeasibleError(AxyError):
    """Two finite-width pulses on the same channel overlap."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class TruncationError(AxyError):
    """Population leaked to the edge of a truncated Fock space or thermal sum."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DesignInfeasibleError(AxyError):
    """No timing in the searched range meets the tolerances."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class UnsupportedPathError(AxyError):
    pass


class DegenerateFitError(AxyError):
    pass


class FitFailureError(AxyError):
    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class ConfigError(AxyError):
    pass
