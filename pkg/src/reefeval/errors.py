"""Exception types shared across the toolkit."""

from __future__ import annotations


class ParseError(ValueError):
    """An input file or stream could not be parsed.

    Carries the 1-based line number when the failure is tied to one line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
