"""Exception types shared across the package."""


class GlflowError(Exception):
    """Base class for package errors."""


class ConfigurationError(GlflowError):
    """Invalid parameters, config keys, or unsupported combinations."""


class SolvabilityError(GlflowError):
    """Poisson right-hand side violates the mean-zero compatibility condition."""


class ResolutionError(GlflowError):
    """Field too rough for the grid (plaquette phase saturates the principal branch)."""


class BlowUpError(GlflowError):
    """Non-finite value produced during time stepping."""

    def __init__(self, message, step_index=None, t=None):
        super().__init__(message)
        self.step_index = step_index
        self.t = t


class FormatError(GlflowError):
    """Corrupt or mismatched file content."""


class InsufficientDataError(GlflowError):
    """Not enough valid samples for a requested fit."""
