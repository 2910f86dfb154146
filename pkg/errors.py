"""
Exception hierarchy for themeflow.

Every error raised by the library derives from ThemeFlowError and carries a
short, stable ``code`` that the command-line interface prints in front of the
message (for example ``empty-corpus``).
"""

from typing import Optional


class ThemeFlowError(Exception):
    """Base class for all themeflow errors."""

    code = "themeflow-error"


class ParseError(ThemeFlowError, ValueError):
    """Input could not be decoded or does not match the declared format."""

    code = "parse-error"

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyCorpusError(ThemeFlowError):
    """No valid record survived parsing."""

    code = "empty-corpus"


class ValidationError(ThemeFlowError, ValueError):
    """A domain object or table violates its invariants."""

    code = "validation-error"


class ParameterError(ThemeFlowError, ValueError):
    """A numeric parameter lies outside its documented range."""

    code = "parameter-error"


class EmptyPartitionError(ThemeFlowError):
    """An operation needs at least one cluster but the partition is empty."""

    code = "empty-partition"


class ConfigError(ThemeFlowError, ValueError):
    """The run configuration is invalid or cannot be read."""

    code = "config-error"


class StageError(ThemeFlowError):
    """
    Wraps an error raised inside a pipeline stage.

    Args:
        stage: Name of the failing stage (ingest, detect, link, export)
        cause: The original error
    """

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.code = getattr(cause, "code", "internal-error")
        super().__init__(f"[{stage}] {self.code}: {cause}")
