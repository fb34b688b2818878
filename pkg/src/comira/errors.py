"""Exception types shared across the pipeline.

The CLI maps these onto process exit codes (see cli.py): corpus/input
problems exit 3, fingerprint mismatches exit 4, generation-service
failures exit 5.
"""


class ComiraError(Exception):
    """Base class for all package errors."""


class CorpusError(ComiraError):
    """A corpus file cannot be opened or read."""


class CorruptCorpusError(CorpusError):
    """More than half of the records in a corpus were malformed."""


class EmptyCorpusError(CorpusError):
    """An operation that needs at least one valid document got none."""


class VocabularyFormatError(ComiraError):
    """A vocabulary file does not conform to the on-disk format."""


class TableFormatError(ComiraError):
    """A pair-count table file is truncated, corrupted, or mis-versioned."""


class FingerprintMismatchError(ComiraError):
    """Two pipeline artifacts were built with different configurations."""

    def __init__(self, expected: str, actual: str, context: str = ""):
        self.expected = expected
        self.actual = actual
        where = f" ({context})" if context else ""
        super().__init__(
            f"pipeline mismatch{where}: expected fingerprint {expected}, got {actual}"
        )


class UnknownConceptError(ComiraError):
    """A lemma or concept id is not present in the vocabulary."""


class UndefinedScoreError(ComiraError):
    """An example has fewer than two in-vocabulary concepts."""


class UndefinedCorrelationError(ComiraError):
    """Pearson correlation is undefined (zero variance in x or y)."""


class GenerationClientError(ComiraError):
    """The external generation endpoint failed at the transport level."""
