"""Exception hierarchy shared across the toolkit."""


class SeglitError(Exception):
    """Base class for all data/validation errors raised by seglit."""


class ParseError(SeglitError):
    """Malformed external input (CoNLL-U, lexicon TSV, bank JSON, ...)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(SeglitError):
    """An invariant on a domain object does not hold."""


class AnalysisError(SeglitError):
    """A statistical routine was called on a degenerate input."""
