"""Exception types shared across the engine.

Callers that need to distinguish failure classes (the service maps them to
HTTP statuses, the CLI to exit codes) catch these; messages carry the
specifics (offending line, row, model id, ...).
"""


class EngineError(Exception):
    """Base class for all engine failures."""


class ValidationError(EngineError):
    """An input value violates a documented invariant or precondition."""


class ParseError(EngineError):
    """A text input file is malformed; message names the line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)
        self.line = line


class FormatError(EngineError):
    """A binary file does not match its documented layout."""


class HashMismatchError(EngineError):
    """A file's corpus digest does not match the co-loaded manifest."""


class ContractError(EngineError):
    """Two components disagree (model ids, dimensions, unknown models)."""


class TransportError(EngineError):
    """A remote encoder endpoint could not be reached or timed out."""
