"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: input/validation problems map to 1,
contract violations and broken internal invariants map to 2.
"""


class DriveStyleError(Exception):
    """Base class for all package errors."""


class TrajectoryParseError(DriveStyleError):
    """A trajectory or annotation file could not be parsed.

    Carries the 1-based line number of the offending row when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(DriveStyleError):
    """Structurally valid input that violates a documented precondition."""


class ContractViolationError(DriveStyleError):
    """A caller broke an API contract (programming error, not bad data)."""


class InsufficientDataError(DriveStyleError):
    """Too few samples for the requested fit."""


class ConditioningError(DriveStyleError):
    """The regression system is numerically singular without regularization."""
