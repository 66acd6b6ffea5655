"""Dressed Yukawa field model: renormalized energies, dressing maps, flows and their quantization."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    NumericError,
    ParameterError,
    ResourceError,
    ShapeError,
    SKGError,
    StepSizeError,
    TruncationError,
)
from .fields import ClassicalState, ExternalPotential  # noqa: E402
from .renorm import INF, RenormParams  # noqa: E402
from .spectral import Grid  # noqa: E402

__all__ = [
    "ClassicalState", "ConfigError", "ExternalPotential", "Grid", "INF", "NumericError", "ParameterError",
    "RenormParams", "ResourceError", "SKGError", "ShapeError", "StepSizeError", "TruncationError",
]
