"""Exception hierarchy shared by every pipeline stage."""


class EcgdError(Exception):
    """Base class for all errors raised by this package."""


class ImageReadError(EcgdError):
    pass


class UnreadableFileError(ImageReadError):
    """The file is missing or cannot be opened."""


class UnsupportedFormatError(ImageReadError):
    """Container recognized but the pixel layout / bit depth is not handled."""


class CorruptStreamError(ImageReadError):
    """Truncated or otherwise malformed image data."""


class ImageWriteError(EcgdError):
    pass


class DimensionMismatchError(EcgdError, ValueError):
    pass


class DegenerateHistogramError(EcgdError):
    """Thresholding asked of an image with fewer than two distinct levels."""


class NoGridError(DegenerateHistogramError):
    """No colored millimeter grid could be separated from the page."""


class TooFewLinesError(EcgdError):
    pass


class NonSquareGridError(EcgdError):
    pass


class NoTraceError(DegenerateHistogramError):
    """The grid-free page holds no ink at all."""


class NoCurvesError(EcgdError):
    pass


class EmptyRoiError(EcgdError):
    pass


class EmptyImageError(EcgdError, ValueError):
    pass


class MissingSamplesError(EcgdError, ValueError):
    pass


class RenderError(EcgdError, ValueError):
    """A synthetic sheet layout cannot be drawn as requested."""


class StageError(EcgdError):
    """Wraps a failure with the pipeline stage and input it came from."""

    def __init__(self, stage, path, cause):
        self.stage = stage
        self.path = path
        self.cause = cause
        super().__init__(f"{path}: stage {stage} failed: {cause}")
