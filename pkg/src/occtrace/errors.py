"""Exception types shared across the pipeline.

Every operational failure raised by this package derives from PipelineError,
so the CLI can map them to a non-zero exit status in one place.
"""


class PipelineError(Exception):
    """Base class for all errors raised by occtrace operations."""


class TraceParseError(PipelineError):
    """A trace file or stream could not be parsed (empty, or a bad token)."""

    def __init__(self, message, *, offset=None, path=None):
        detail = message
        if offset is not None:
            detail = f"{detail} (offset {offset})"
        if path is not None:
            detail = f"{path}: {detail}"
        super().__init__(detail)
        self.offset = offset
        self.path = path


class DatasetError(PipelineError):
    """Dataset directory missing, empty, or violating a layout/role rule."""


class DimensionError(PipelineError):
    """Incompatible array shapes or lengths."""


class NotEnoughDataError(PipelineError):
    """An operation received fewer data points than it requires."""


class SingleClassError(PipelineError):
    """Both class labels are required but only one is present."""


class NonSymmetricError(PipelineError):
    """Matrix handed to the symmetric eigensolver is not symmetric."""


class NonConvergenceError(PipelineError):
    """Iterative solver exhausted its iteration budget."""


class ProbabilityRangeError(PipelineError):
    """A probability argument fell outside its valid open interval."""


class NotFittedError(PipelineError):
    """Estimator or model used before fit()."""


class ModelFormatError(PipelineError):
    """Model file is unreadable or has an unsupported format/version."""
