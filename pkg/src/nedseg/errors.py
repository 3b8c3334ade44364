"""Exception types raised across the package."""


class NedsegError(ValueError):
    """Base class for all invalid-input errors raised by nedseg."""


class DimensionError(NedsegError):
    """Pixel or label count does not match ``width * height``."""


class PixelRangeError(NedsegError):
    """A pixel value lies outside ``[0, levels - 1]``."""


class LevelsError(NedsegError):
    """The number of gray levels is not a power of two >= 2."""


class ShapeMismatchError(NedsegError):
    """Two operands differ in width, height or levels."""


class DegenerateNormalizationError(NedsegError):
    """NPRI is undefined because the expected PRI equals 1."""


class EmptyGroundTruthError(NedsegError):
    """A ground-truth set with no members was supplied."""


class FormatError(NedsegError):
    """Base class for file-format problems."""


class UnsupportedFormatError(FormatError):
    pass


class MalformedHeaderError(FormatError):
    pass


class TruncatedDataError(FormatError):
    pass


class ZeroMaxvalError(FormatError):
    pass
