"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class InputError(ValueError):
    """Input data with the wrong shape, arity or non-finite values."""


class DatasetParseError(ValueError):
    """Malformed dataset file. ``line`` is the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
