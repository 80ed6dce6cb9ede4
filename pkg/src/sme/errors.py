"""Shared exception types."""


class DimensionError(ValueError):
    """A vector or matrix argument has the wrong shape."""


class EpisodeError(RuntimeError):
    """An episode operation was issued in an invalid lifecycle state."""


class ManifestError(ValueError):
    """An environment manifest is malformed, outdated, or corrupted."""


class DatasetFormatError(ValueError):
    """A dataset file violates the binary format or its manifest."""


class ShellSamplingError(RuntimeError):
    """Rejection sampling for an evaluation shell exhausted its retry cap."""
