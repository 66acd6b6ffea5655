"""Exception hierarchy shared by every module."""


class SKGError(Exception):
    """Base class for all package errors."""


class ParameterError(SKGError, ValueError):
    """A physical or numerical parameter is out of its admissible range."""


class ShapeError(SKGError, ValueError):
    """An array does not match the grid or mode set it is used with."""


class NumericError(SKGError, RuntimeError):
    """Quadrature, propagation or another numerical routine failed."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class StepSizeError(NumericError):
    """The energy guard of a time integrator tripped."""


class ResourceError(SKGError, RuntimeError):
    """A requested basis or mode set is too large."""


class TruncationError(SKGError, ValueError):
    """A Fock-space operation would leave the reliable part of the truncated basis."""


class ConfigError(SKGError, ValueError):
    """Invalid run configuration."""
