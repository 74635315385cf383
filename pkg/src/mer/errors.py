"""Exception hierarchy shared across the pipeline.

The CLI maps :class:`ValidationError` (and subclasses) to exit code 1 and
:class:`DataError` (and subclasses) to exit code 2.
"""


class MerError(Exception):
    """Base class for all pipeline errors."""


class ValidationError(MerError, ValueError):
    """Input violates a documented contract (bad shape, duplicate key, ...)."""


class FormatError(ValidationError):
    """A file does not follow its expected layout."""


class ParseError(ValidationError):
    """An AU code string could not be parsed."""

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class DataError(MerError):
    """Data could not be produced or found (missing cache, extraction failure)."""


class ExtractionError(DataError):
    """A descriptor could not be computed for a clip."""


class TrainingError(DataError):
    """A classifier could not be trained on the supplied data."""


class MerWarning(UserWarning):
    """Non-fatal condition worth surfacing (empty manifest, skipped fold, ...)."""
