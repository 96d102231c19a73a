"""Exception hierarchy shared across the package.

Every error class carries a distinct CLI exit code so script callers can
branch on failure kind without parsing messages.
"""


class NewscastError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParseError(NewscastError):
    """Malformed input record; message names the file and line number."""

    exit_code = 3

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class ValidationError(NewscastError):
    """An invariant on loaded or constructed data does not hold."""

    exit_code = 4


class ReferentialIntegrityError(ValidationError):
    """A record references an entity that does not exist."""

    exit_code = 5


class DomainError(NewscastError):
    """Operation called outside its precondition."""

    exit_code = 6


class LookupError_(DomainError):
    """Unknown article or topic identifier."""

    exit_code = 7


class UndefinedStatisticError(DomainError):
    """A statistic (correlation, shelf-life) is undefined for this input."""

    exit_code = 8


class ConvergenceError(NewscastError):
    """Iterative solver failed to reach tolerance; carries the residual."""

    exit_code = 9

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class SnapshotError(NewscastError):
    """Snapshot directory is missing, corrupt, or has a mismatched version."""

    exit_code = 10
