"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid user-supplied value (p-value, threshold, dimension, ...)."""


class ParseError(InputError):
    """Malformed input file; carries file path and line number when known."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = f"{path}: " if line is None else f"{path}:{line}: "
        super().__init__(f"{loc}{message}")
        self.path = path
        self.line = line


class PersistError(ValueError):
    """Corrupt, truncated, or version-incompatible structure file."""
