"""Weil-Petersson volumes, trace-inequality certificates and spectral-gap bounds for cusped surfaces."""

from .errors import (CertificateError, ComplexityCapError, ComputationError, InputFileError,
                     MissingVolumeError, ParseError, PreconditionError, UsageError, WPGapError)

__version__ = "0.1.0"

__all__ = [
    "CertificateError",
    "ComplexityCapError",
    "ComputationError",
    "InputFileError",
    "MissingVolumeError",
    "ParseError",
    "PreconditionError",
    "UsageError",
    "WPGapError",
    "__version__",
]
