"""Exception hierarchy shared by every module."""


class KMJumpError(Exception):
    """Base class for all package errors."""


class DomainError(KMJumpError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateDataError(KMJumpError, ValueError):
    """Data carries no usable variation (e.g. all samples identical)."""


class InsufficientDataError(KMJumpError, ValueError):
    """Too few samples for the requested computation."""


class CSVFormatError(KMJumpError):
    """Malformed CSV input; ``line`` is the 1-based line number, if known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f"{', ' if where else ''}line {line}"
        super().__init__(f"{where}: {message}" if where else message)
