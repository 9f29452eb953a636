"""Fractional and imaginary powers of sectorial matrices, and numerical
checks of the Heinz-Kato inequality with explicit constants."""

from hkcheck.errors import (
    HKError,
    SingularMatrix,
    NonDiagonalizable,
    ResolventSingular,
    InvalidExponent,
    ExponentNotNegative,
    AlphaOutOfRange,
    SpectrumOnCut,
    RegularizerOrderTooLow,
    StructureUnknown,
    EmptySamples,
)

__version__ = "0.1.0"

__all__ = [
    "HKError",
    "SingularMatrix",
    "NonDiagonalizable",
    "ResolventSingular",
    "InvalidExponent",
    "ExponentNotNegative",
    "AlphaOutOfRange",
    "SpectrumOnCut",
    "RegularizerOrderTooLow",
    "StructureUnknown",
    "EmptySamples",
]
