"""Exception hierarchy shared by all dynamask modules."""


class DynamaskError(Exception):
    """Base class for all errors raised by this package."""


class ImageIoError(DynamaskError):
    """A file could not be read or written."""


class DecodeError(DynamaskError):
    """A file exists but does not decode as a supported image."""


class DimensionError(DynamaskError):
    """An image is too small or has invalid dimensions."""


class DimensionMismatch(DynamaskError):
    """Two rasters that must share dimensions do not."""


class ClipMismatch(DynamaskError):
    """Frames from different clips were combined."""


class EmptyFrameSetError(DynamaskError):
    """An operation requiring at least one frame received none."""


class CountError(DynamaskError):
    """A frame count or sample count is out of range."""


class SceneSpecError(DynamaskError):
    """A synthetic scene description is invalid."""


class ConfigError(DynamaskError):
    """A configuration file or value is invalid."""
