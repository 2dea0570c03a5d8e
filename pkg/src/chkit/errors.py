"""Structured error types shared across the toolkit."""


class ChkitError(Exception):
    """Base class for every error raised deliberately by chkit."""


class DomainError(ChkitError):
    """A value lies outside the domain an operation is defined on."""


class ArgumentError(ChkitError):
    """An argument has an illegal value (for example a non-positive scale)."""


class StructureError(ChkitError):
    """An object is malformed: wrong lengths, bad indices, mass not 1."""


class IndeterminateError(ChkitError):
    """A simulation was asked about a configuration outside its regime."""


class InconsistentSolutionError(ChkitError):
    """A claimed solution contradicts a structural guarantee."""


class AmbiguousCutError(ChkitError):
    """A necklace cut coincides with a bead."""


class InternalInvariantError(ChkitError):
    """An internal audit failed; carries a diagnostic payload."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ParseError(ChkitError):
    """A text file could not be parsed; message names the line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
