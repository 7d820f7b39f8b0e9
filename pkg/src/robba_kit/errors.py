"""Exception hierarchy.

Every error raised by the library derives from :class:`RobbaError`; the CLI
maps the class name into the ``"error"`` field of its JSON output.
"""
from __future__ import annotations


class RobbaError(Exception):
    """Base class for all library errors."""

    #: exit status used by the command line front end
    exit_code = 3


class NotAUnit(RobbaError):
    pass


class PrecisionExhausted(RobbaError):
    pass


class WindowEmpty(RobbaError):
    pass


class WindowOverflow(RobbaError):
    pass


class UncertifiedWindow(RobbaError):
    pass


class ZeroAtPrecision(RobbaError):
    pass


class LeadingCoeffNotUnit(RobbaError):
    pass


class NoContraction(RobbaError):
    exit_code = 4


class BadCalibration(RobbaError):
    pass


class JMaxExceeded(RobbaError):
    pass


class NotInvertibleAtPrecision(RobbaError):
    pass


class LambdaIsUnit(RobbaError):
    pass


class NoUnitLeadingEntry(RobbaError):
    pass


class DegreeStuck(RobbaError):
    """Raised when the degree descent cannot make progress.

    ``retry_precision`` carries the suggested precision for a second attempt.
    """

    def __init__(self, message: str, retry_precision: int | None = None):
        super().__init__(message)
        self.retry_precision = retry_precision


class IncompatibleOperands(RobbaError):
    pass


class ParseError(RobbaError):
    exit_code = 2
