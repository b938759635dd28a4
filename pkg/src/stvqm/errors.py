"""Exception types raised by the stvqm pipeline.

Every error condition a caller may want to handle separately gets its own
class; all inherit from StvqmError so `except StvqmError` catches anything
the library raises on bad input or unusable data.
"""


class StvqmError(Exception):
    """Base class for all stvqm errors."""


# --- video ingestion ---

class SizeMismatchError(StvqmError):
    """Raw video file size is not a whole number of frames."""


class DimensionTooSmallError(StvqmError):
    """Frame dimensions below the 64x64 minimum."""


class InvalidFrameDimensionsError(StvqmError):
    """Dimensions unusable for planar 4:2:0 (odd width or height)."""


class UnsupportedBitDepthError(StvqmError):
    """Only 8-bit samples are supported."""


class LengthMismatchError(StvqmError):
    """Sequences or vectors differ in length."""


class DimensionMismatchError(StvqmError):
    """Frames, sequences or vectors differ in dimensions."""


# --- keypoints / patches ---

class BorderProximityError(StvqmError):
    """Point too close to the frame border for a 35x35 patch."""


# --- codebook ---

class CorpusTooSmallError(StvqmError):
    """A corpus class has too few examples to train on."""


class InvalidCodebookError(StvqmError):
    """Codebook fails structural validation."""


class CorruptCodebookFileError(StvqmError):
    """Codebook file unreadable or truncated."""


class VersionMismatchError(StvqmError):
    """Codebook file format version unsupported by this reader."""


# --- scoring ---

class InsufficientMatchesError(StvqmError):
    """Fewer filtered matches than the configured minimum; frame unscorable."""


class AllFramesUnscorableError(StvqmError):
    """No frame in the sequence produced a score."""


class TooShortSequenceError(StvqmError):
    """Temporal scoring needs at least two frames."""


class NoOverlappingComponentsError(StvqmError):
    """Temporal vectors have no index where both components are scored."""


# --- fitting / evaluation ---

class DegenerateDesignError(StvqmError):
    """Constant predictor column or constant target; fit would be meaningless."""


class ConstantObjectiveError(StvqmError):
    """Objective scores are constant; logistic mapping undefined."""


class FitDivergenceError(StvqmError):
    """Nonlinear fit failed to converge."""


class ZeroVarianceError(StvqmError):
    """Correlation undefined on zero-variance input."""


class MissingRawScoresError(StvqmError):
    """Pair classification needs per-observer raw scores."""


class RegionOutOfBoundsError(StvqmError):
    """Distortion region falls outside the frame."""
