"""Full-reference video quality toolkit for synthesized / free-viewpoint video."""

from .video_io import (
    Frame,
    PairedSequences,
    Sequence,
    load_yuv_sequence,
    sequence_from_arrays,
    validate_pair,
    write_yuv_sequence,
)

__version__ = "0.1.0"
