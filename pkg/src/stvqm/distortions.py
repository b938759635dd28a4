"""Controlled synthetic degradations and procedural test scenes.

The degradation kinds emulate the artifact classes this metric targets:
consistent horizontal object shift, local geometric warping, regional
luminance flicker, and plain blur/noise. Everything is deterministic for a
given (input, spec) so ladders of increasing magnitude are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates

from .errors import RegionOutOfBoundsError
from .video_io import Frame, Sequence, sequence_from_arrays


class DistortionKind(Enum):
    GLOBAL_SHIFT = "global_shift"  # magnitude: px (horizontal, edge clamp)
    LOCAL_WARP = "local_warp"      # magnitude: px (peak displacement)
    FLICKER = "flicker"            # magnitude: gray levels, per period-frame block
    BLUR = "blur"                  # magnitude: gaussian sigma
    NOISE = "noise"                # magnitude: gaussian sigma, gray levels


@dataclass(frozen=True)
class DistortionSpec:
    kind: DistortionKind
    magnitude: float
    region: tuple[int, int, int, int] | None = None  # (x, y, w, h)
    period: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("magnitude must be >= 0")
        if self.period < 1:
            raise ValueError("period must be >= 1")


def _check_region(region, width, height):
    if region is None:
        return (0, 0, width, height)
    x, y, w, h = region
    if x < 0 or y < 0 or w <= 0 or h <= 0 or x + w > width or y + h > height:
        raise RegionOutOfBoundsError(f"region {region} outside {width}x{height} frame")
    return region


def inject_distortion(seq: Sequence, spec: DistortionSpec) -> Sequence:
    """Apply one degradation to a sequence; magnitude 0 is the identity."""
    region = _check_region(spec.region, seq.width, seq.height)
    if spec.magnitude == 0.0:
        return sequence_from_arrays(
            [f.luma.copy() for f in seq.frames], fps=seq.fps, label=seq.label
        )
    out = []
    rng = np.random.default_rng(spec.seed)
    warp_field = None
    if spec.kind is DistortionKind.LOCAL_WARP:
        warp_field = _warp_field(seq.height, seq.width, region, spec.magnitude, rng)
    for i, f in enumerate(seq.frames):
        if spec.kind is DistortionKind.GLOBAL_SHIFT:
            out.append(_shift(f.luma, spec.magnitude))
        elif spec.kind is DistortionKind.LOCAL_WARP:
            out.append(_warp(f.luma, warp_field))
        elif spec.kind is DistortionKind.FLICKER:
            out.append(_flicker(f.luma, i, spec.magnitude, spec.period, region))
        elif spec.kind is DistortionKind.BLUR:
            out.append(_blur(f.luma, spec.magnitude, region))
        elif spec.kind is DistortionKind.NOISE:
            out.append(_noise(f.luma, spec.magnitude, region, rng))
        else:
            raise ValueError(f"unknown distortion kind {spec.kind}")
    return Sequence(
        frames=[
            Frame(luma=a, width=seq.width, height=seq.height, index=i)
            for i, a in enumerate(out)
        ],
        fps=seq.fps,
        label=f"{seq.label}+{spec.kind.value}({spec.magnitude:g})",
    )


def _shift(luma: np.ndarray, magnitude: float) -> np.ndarray:
    dx = int(round(magnitude))
    cols = np.clip(np.arange(luma.shape[1]) - dx, 0, luma.shape[1] - 1)
    return luma[:, cols].copy()


def _warp_field(height, width, region, magnitude, rng):
    """Smooth displacement bump peaking at `magnitude` px inside the region."""
    x, y, w, h = region
    cx = rng.uniform(x + 0.25 * w, x + 0.75 * w)
    cy = rng.uniform(y + 0.25 * h, y + 0.75 * h)
    sigma = max(min(w, h) / 4.0, 4.0)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    bump = magnitude * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * sigma ** 2))
    return bump * np.cos(theta), bump * np.sin(theta)  # (dx, dy) fields


def _warp(luma: np.ndarray, field) -> np.ndarray:
    dx, dy = field
    yy, xx = np.mgrid[0:luma.shape[0], 0:luma.shape[1]].astype(np.float64)
    warped = map_coordinates(
        luma.astype(np.float64), [yy - dy, xx - dx], order=1, mode="nearest"
    )
    return np.clip(np.rint(warped), 0, 255).astype(np.uint8)


def _flicker(luma, frame_index, magnitude, period, region):
    """Offset region luma on alternating period-frame blocks.

    Even blocks stay untouched; odd blocks get +magnitude and -magnitude in
    alternation, so every block boundary is a comparable luminance step.
    """
    block = frame_index // period
    if block % 2 == 0:
        return luma.copy()
    sign = 1.0 if (block // 2) % 2 == 0 else -1.0
    x, y, w, h = region
    out = luma.astype(np.int16).copy()
    out[y:y + h, x:x + w] += int(round(sign * magnitude))
    return np.clip(out, 0, 255).astype(np.uint8)


def _blur(luma, sigma, region):
    x, y, w, h = region
    out = luma.copy()
    sm = gaussian_filter(luma[y:y + h, x:x + w].astype(np.float64), sigma, mode="nearest")
    out[y:y + h, x:x + w] = np.clip(np.rint(sm), 0, 255).astype(np.uint8)
    return out


def _noise(luma, sigma, region, rng):
    x, y, w, h = region
    out = luma.astype(np.float64)
    out[y:y + h, x:x + w] += rng.normal(0.0, sigma, (h, w))
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


class SceneKind(Enum):
    CHECKER = "checker"
    BLOB_FIELD = "blob_field"
    TEXTURED_OBJECTS = "textured_objects"


def synth_test_scene(
    kind: SceneKind,
    dims: tuple[int, int] = (320, 240),
    n_frames: int = 30,
    seed: int = 0,
) -> Sequence:
    """Procedural sequence with enough blob response for dense detection."""
    width, height = dims
    if width < 64 or height < 64:
        raise ValueError(f"dims must be at least 64x64, got {dims}")
    if n_frames < 2:
        raise ValueError("need at least 2 frames")
    rng = np.random.default_rng(seed)
    if kind is SceneKind.CHECKER:
        frames = _checker_frames(width, height, n_frames, rng)
    elif kind is SceneKind.BLOB_FIELD:
        frames = _blob_frames(width, height, n_frames, rng)
    elif kind is SceneKind.TEXTURED_OBJECTS:
        frames = _textured_frames(width, height, n_frames, rng)
    else:
        raise ValueError(f"unknown scene kind {kind}")
    return sequence_from_arrays(frames, fps=30.0, label=f"{kind.value}-{seed}")


def _checker_frames(width, height, n_frames, rng, period=16):
    yy, xx = np.mgrid[0:height, 0:width]
    checker = (((yy // period) + (xx // period)) % 2).astype(np.float64)
    # low-frequency gain keeps corner descriptors from being carbon copies
    gain = gaussian_filter(rng.standard_normal((height, width)), period * 2)
    gain = 1.0 + 0.25 * gain / max(np.abs(gain).max(), 1e-9)
    img = np.clip(40 + 170 * checker * gain, 0, 255).astype(np.uint8)
    return [img.copy() for _ in range(n_frames)]


def _blob_frames(width, height, n_frames, rng, n_blobs=130, margin=22):
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.full((height, width), 128.0)
    for _ in range(n_blobs):
        cx = rng.uniform(margin, width - margin)
        cy = rng.uniform(margin, height - margin)
        s = rng.uniform(2.5, 5.0)
        amp = rng.uniform(0.35, 0.8) * (1.0 if rng.random() < 0.5 else -1.0) * 255.0
        img += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * s * s))
    img = np.clip(img, 0, 255).astype(np.uint8)
    return [img.copy() for _ in range(n_frames)]


def _textured_frames(width, height, n_frames, rng, n_objects=6):
    base = gaussian_filter(rng.normal(128.0, 40.0, (height, width)), 6.0)
    objs = []
    for _ in range(n_objects):
        ow = int(rng.uniform(30, 60))
        oh = int(rng.uniform(30, 60))
        tex = gaussian_filter(rng.normal(128.0, 70.0, (oh, ow)), 1.5)
        x0 = rng.uniform(20, width - ow - 20)
        y0 = rng.uniform(20, height - oh - 20)
        vx = rng.uniform(-1.0, 1.0)
        vy = rng.uniform(-0.3, 0.3)
        objs.append((tex, x0, y0, vx, vy, ow, oh))
    frames = []
    for t in range(n_frames):
        img = base.copy()
        for tex, x0, y0, vx, vy, ow, oh in objs:
            x = int(round(np.clip(x0 + vx * t, 0, width - ow)))
            y = int(round(np.clip(y0 + vy * t, 0, height - oh)))
            img[y:y + oh, x:x + ow] = tex
        frames.append(np.clip(img, 0, 255).astype(np.uint8))
    return frames
