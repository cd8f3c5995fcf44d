"""Exception types shared across the package."""


class CrosseraError(Exception):
    """Base class for all package errors."""


class ParseError(CrosseraError):
    """A file failed to parse. Carries the offending path and line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc = f" [{loc}]"
        super().__init__(f"{message}{loc}")


class ValidationError(CrosseraError):
    """An input violated a documented invariant."""


class EmptyInputError(ValidationError):
    """An operation that requires non-empty input received an empty one."""


class ConfigError(CrosseraError):
    """A configuration value is missing, malformed, or inconsistent."""


class MappingError(CrosseraError):
    """Embedding-space alignment could not proceed (e.g. empty dictionary)."""


class StageError(CrosseraError):
    """A pipeline stage failed; the run manifest records which one."""
