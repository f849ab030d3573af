"""Exception hierarchy shared by the library and the command-line front end.

Each class carries an ``exit_code`` so the CLI can map failures to distinct
process statuses without inspecting messages.
"""


class WPGapError(Exception):
    """Base class for all package errors."""

    exit_code = 1
    kind = "error"


class UsageError(WPGapError):
    """Malformed command line."""

    exit_code = 2
    kind = "usage"


class InputFileError(WPGapError):
    exit_code = 3
    kind = "file_not_found"


class ParseError(WPGapError):
    exit_code = 4
    kind = "parse_error"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PreconditionError(WPGapError, ValueError):
    exit_code = 5
    kind = "precondition"


class MissingVolumeError(PreconditionError, KeyError):
    kind = "missing_volume"

    def __init__(self, missing):
        self.missing = sorted(set(missing))
        names = ", ".join(f"V_{{{g},{n}}}" for g, n in self.missing)
        super().__init__(f"volume table lacks {names}")

    def __str__(self):
        return self.args[0]


class ComplexityCapError(PreconditionError):
    kind = "complexity_cap"


class ComputationError(WPGapError, ArithmeticError):
    """Quadrature or truncation failed to reach the requested tolerance."""

    exit_code = 6
    kind = "computation"


class CertificateError(ComputationError):
    """The positivity defect is negative, so no certificate can be issued."""

    exit_code = 7
    kind = "invalid_certificate"
