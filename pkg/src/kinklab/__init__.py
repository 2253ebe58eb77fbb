"""Numerical laboratory for the odd-sector dynamics of a relativistic
Ginzburg-Landau kink: construction, linear spectrum, normal-form constants,
time evolution and decay-law diagnostics."""

from .errors import (
    KinklabError,
    InvalidArgument,
    DegeneratePotential,
    SpectralConditionViolated,
    FGRConditionViolated,
    WindowError,
    NearSingular,
    BlowupError,
)

__version__ = "0.1.0"

__all__ = [
    "KinklabError",
    "InvalidArgument",
    "DegeneratePotential",
    "SpectralConditionViolated",
    "FGRConditionViolated",
    "WindowError",
    "NearSingular",
    "BlowupError",
]
