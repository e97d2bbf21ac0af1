"""
Exception types shared across the toolkit.

Validation problems (bad arguments, bad values, malformed payloads) derive
from ``ValueError``; problems with files on disk derive from ``OSError``.
The CLI maps the two families to distinct exit codes.
"""


class VblcError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(VblcError, ValueError):
    """An argument or data value is out of its documented domain."""


class ConfigError(ValidationError):
    """A configuration file or option could not be accepted."""


class ShapeError(ValidationError):
    """Array shapes or dimensions do not agree."""


class CodecError(ValidationError):
    """A PPM/PGM byte stream is malformed, truncated or out of range."""


class DataFileError(VblcError, OSError):
    """A file is missing, unreadable or corrupt. The message names the file."""


class UsageError(ValidationError):
    """The command line could not be parsed."""

    def __init__(self, message: str, usage: str = ''):
        super().__init__(message)
        self.usage = usage
