"""Typed errors raised across the pipeline."""


class PipelineError(Exception):
    """Base class for every error raised by this package."""


class OutOfRangeError(PipelineError, ValueError):
    """A numeric value violates its documented range or shape."""


class UnknownLabelError(PipelineError, KeyError):
    """A label is not part of the configured taxonomy."""


class EmptyInputError(PipelineError, ValueError):
    """An operation received empty input where content is required."""


class MalformedPayloadError(PipelineError):
    """A remote service returned a response that violates the wire contract."""


class RemoteTimeoutError(PipelineError):
    """A remote service was unreachable or exceeded its timeout budget."""


class TooManyListsError(PipelineError, ValueError):
    """Requested more inverted lists than there are stored embeddings."""


class DuplicateIdError(PipelineError, ValueError):
    """Two embeddings share a clip id within one index."""


class DegenerateEmbeddingError(PipelineError, ValueError):
    """A vector with (near-)zero norm cannot be L2-normalized."""


class DegenerateDataError(PipelineError, ValueError):
    """A statistic is undefined for the given sample (too small or constant)."""


class FileFormatError(PipelineError, ValueError):
    """A config or snapshot file does not match its documented format."""
