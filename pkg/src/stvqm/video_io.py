"""Raw video ingestion: planar YUV 4:2:0 files into in-memory luma sequences.

Chroma is read past and discarded; every downstream stage operates on luma
only. Dimensions and frame rate are always supplied by the caller, never
inferred from file names.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    DimensionTooSmallError,
    InvalidFrameDimensionsError,
    LengthMismatchError,
    SizeMismatchError,
    UnsupportedBitDepthError,
)

MIN_DIMENSION = 64  # one interior 35x35 patch plus margins


@dataclass(frozen=True)
class Frame:
    """A single 8-bit luma raster."""

    luma: np.ndarray
    width: int
    height: int
    index: int

    def __post_init__(self):
        if self.width < MIN_DIMENSION or self.height < MIN_DIMENSION:
            raise DimensionTooSmallError(
                f"frame {self.width}x{self.height} below minimum "
                f"{MIN_DIMENSION}x{MIN_DIMENSION}"
            )
        if self.luma.dtype != np.uint8:
            raise UnsupportedBitDepthError(
                f"luma must be 8-bit, got dtype {self.luma.dtype}"
            )
        if self.luma.shape != (self.height, self.width):
            raise DimensionMismatchError(
                f"luma shape {self.luma.shape} != (height, width) "
                f"({self.height}, {self.width})"
            )


@dataclass(frozen=True)
class Sequence:
    """Ordered luma frames sharing one geometry."""

    frames: list[Frame]
    fps: float
    label: str = ""

    def __post_init__(self):
        dims = {(f.width, f.height) for f in self.frames}
        if len(dims) > 1:
            raise DimensionMismatchError(f"mixed frame dimensions in sequence: {dims}")
        for i, f in enumerate(self.frames):
            if f.index != i:
                raise LengthMismatchError(
                    f"frame at position {i} carries index {f.index}"
                )

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height


@dataclass(frozen=True)
class PairedSequences:
    reference: Sequence
    test: Sequence


def _check_dims(width: int, height: int) -> None:
    if width < MIN_DIMENSION or height < MIN_DIMENSION:
        raise DimensionTooSmallError(
            f"{width}x{height} below minimum {MIN_DIMENSION}x{MIN_DIMENSION}"
        )
    if width % 2 or height % 2:
        raise InvalidFrameDimensionsError(
            f"planar 4:2:0 requires even dimensions, got {width}x{height}"
        )


def load_yuv_sequence(
    path: str | os.PathLike,
    width: int,
    height: int,
    fps: float,
    bit_depth: int = 8,
    label: str = "",
) -> Sequence:
    """Load a raw planar YUV 4:2:0 8-bit file, keeping only the Y planes.

    The file must contain a whole number of frames at the given geometry
    (frame stride is 1.5 * width * height bytes); anything else raises
    SizeMismatchError.
    """
    if bit_depth != 8:
        raise UnsupportedBitDepthError(f"only 8-bit input supported, got {bit_depth}")
    _check_dims(width, height)

    y_size = width * height
    frame_size = y_size * 3 // 2
    file_size = os.path.getsize(path)
    if file_size % frame_size != 0:
        raise SizeMismatchError(
            f"{path}: {file_size} bytes is not a multiple of the "
            f"{frame_size}-byte frame stride for {width}x{height} 4:2:0"
        )
    n_frames = file_size // frame_size

    frames = []
    with open(path, "rb") as fh:
        for i in range(n_frames):
            plane = np.frombuffer(fh.read(y_size), dtype=np.uint8)
            fh.seek(frame_size - y_size, os.SEEK_CUR)  # skip U and V
            frames.append(
                Frame(
                    luma=plane.reshape(height, width).copy(),
                    width=width,
                    height=height,
                    index=i,
                )
            )
    return Sequence(frames=frames, fps=fps, label=label or str(path))


def write_yuv_sequence(seq: Sequence, path: str | os.PathLike) -> None:
    """Write a sequence as planar YUV 4:2:0 with neutral (128) chroma planes."""
    c_size = (seq.width // 2) * (seq.height // 2)
    chroma = np.full(c_size, 128, dtype=np.uint8).tobytes()
    with open(path, "wb") as fh:
        for f in seq.frames:
            fh.write(f.luma.tobytes())
            fh.write(chroma)
            fh.write(chroma)


def sequence_from_arrays(lumas, fps: float = 30.0, label: str = "") -> Sequence:
    """Build a Sequence from an iterable of uint8 (height, width) arrays."""
    frames = []
    for i, arr in enumerate(lumas):
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        h, w = arr.shape
        frames.append(Frame(luma=arr, width=w, height=h, index=i))
    return Sequence(frames=frames, fps=fps, label=label)


def validate_pair(reference: Sequence, test: Sequence) -> PairedSequences:
    """Pair a reference and a test sequence, enforcing equal geometry."""
    if len(reference) != len(test):
        raise LengthMismatchError(
            f"frame counts differ: reference {len(reference)} vs test {len(test)}"
        )
    if (reference.width, reference.height) != (test.width, test.height):
        raise DimensionMismatchError(
            f"dimensions differ: reference {reference.width}x{reference.height} "
            f"vs test {test.width}x{test.height}"
        )
    return PairedSequences(reference=reference, test=test)
