"""Exception hierarchy shared by all pipeline stages.

Each class carries the process exit code the CLI reports for it.
"""

from __future__ import annotations


class WikinamesError(Exception):
    exit_code = 2


class ConfigError(WikinamesError):
    """Invalid configuration or command-line usage."""

    exit_code = 1


class PrerequisiteError(ConfigError):
    """A stage was requested before the artifacts it depends on exist."""


class DataError(WikinamesError):
    exit_code = 2


class UnrecognizedCompressionError(DataError):
    pass


class MalformedLineError(DataError):
    def __init__(self, lineno: int | None, reason: str):
        self.lineno = lineno
        self.reason = reason
        where = f"line {lineno}" if lineno is not None else "line"
        super().__init__(f"{where}: {reason}")


class MissingIdError(DataError):
    pass


class StoreIOError(WikinamesError):
    exit_code = 3
