"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the domain where the operation is defined."""


class InsufficientDecayError(ValueError):
    """A truncated integral leaves a tail larger than the requested tolerance."""


class CalibrationError(RuntimeError):
    """A calibrated constant failed its round-trip validation."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class GridMismatchError(ValueError):
    """Fields that must share a grid do not."""
