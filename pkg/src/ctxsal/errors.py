"""Exception types raised across the package.

Every error is a subclass of :class:`CtxsalError` so callers (notably the
CLI) can catch one base type and report a diagnostic with context.
"""


class CtxsalError(Exception):
    """Base class for all errors raised by this package."""


class MissingFile(CtxsalError):
    """A file referenced by a manifest entry does not exist."""


class MissingDirectory(CtxsalError):
    """A proposal directory does not exist."""


class DimensionMismatch(CtxsalError):
    """Two rasters that must share dimensions do not."""


class ModelDimensionMismatch(DimensionMismatch):
    """A feature vector does not match the dimensionality a model was trained on."""


class EmptyMask(CtxsalError):
    """An operation requires a mask with at least one set pixel."""


class EmptyContext(CtxsalError):
    """An operation requires a non-empty context mask."""


class DegenerateContext(CtxsalError):
    """Context features were requested for an empty context proposal."""


class EmptyGroundTruth(CtxsalError):
    """Evaluation requires every ground-truth mask to have nonzero area."""


class InsufficientData(CtxsalError):
    """Not enough rows to fit statistics or train a model."""


class NonFiniteInput(CtxsalError):
    """Training data contains NaN or infinite values."""


class CorruptModel(CtxsalError):
    """A model file failed validation (bad magic, version, or truncation)."""


class CorruptTensor(CtxsalError):
    """A feature tensor file failed validation (bad magic, version, or size)."""
