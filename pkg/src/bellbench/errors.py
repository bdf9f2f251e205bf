"""Exception types shared across the package."""

from __future__ import annotations


class ParameterError(ValueError):
    """A physical or geometric parameter is outside its valid range."""


class ConfigError(ValueError):
    """A config file could not be parsed or describes an invalid bench."""

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EventFileError(Exception):
    """Base class for event-file format violations."""


class BadMagicError(EventFileError):
    """The file does not start with the event-file magic bytes."""


class BadVersionError(EventFileError):
    """The file declares a format version this reader does not support."""


class TruncatedFileError(EventFileError):
    """The file ends in the middle of the header or of a record."""

    def __init__(self, message: str, *, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class RecordOrderError(EventFileError):
    """Records are not sorted by (run, tick)."""


class CorruptRecordError(EventFileError):
    """A record carries a field value that cannot be decoded."""
