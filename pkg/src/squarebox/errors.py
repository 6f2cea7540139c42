"""Exception types shared across the package."""


class SquareboxError(Exception):
    """Base class for all package errors."""


class ShapeMismatchError(SquareboxError):
    """Array shapes do not compose (projection operands, model inputs, ...)."""


class ModelError(SquareboxError):
    """Base class for model loading/validation failures."""


class ManifestError(ModelError):
    """Model manifest is malformed or its layer shapes do not compose."""


class UnknownLayerError(ModelError):
    """Manifest declares a layer kind the engine does not implement."""


class WeightCountError(ModelError):
    """Weight blob length does not match what the manifest requires."""


class DatasetError(SquareboxError):
    """Base class for dataset loading/validation failures."""


class TruncatedBlobError(DatasetError):
    """Image blob is shorter than the manifest declares."""


class LabelError(DatasetError):
    """Labels/targets are missing, mis-sized, or out of range."""


class RemoteError(SquareboxError):
    """Base class for remote-classifier failures."""


class RemoteTransportError(RemoteError):
    """Network-level failure (connection refused, timeout, ...)."""


class RemoteStatusError(RemoteError):
    """Server answered with a non-success HTTP status."""


class RemoteDecodeError(RemoteError):
    """Response body is not the expected JSON shape."""


class RemoteLengthError(RemoteError):
    """Returned logits length differs from the declared number of classes."""


class AttackInterrupted(SquareboxError):
    """A classifier query failed mid-attack; carries the queries spent so far."""

    def __init__(self, message: str, queries_used: int):
        super().__init__(message)
        self.queries_used = queries_used
