"""Exception types shared across the package."""


class UsageError(ValueError):
    """An operation was called with arguments outside its contract."""


class DomainError(ValueError):
    """Input data violates a mathematical precondition (e.g. mass <= 0)."""


class TableRangeError(ValueError):
    """A pair separation falls outside the tabulated kernel range."""


class TruncationError(ValueError):
    """Series truncation error too large for the requested kernel."""


class ConfigError(ValueError):
    """Bad run configuration; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
