"""Low-level channel features for 35x35 luma patches.

Eleven per-pixel channels: raw luma, gradient magnitude at two blur scales,
and four oriented gradient-derivative magnitudes at each blur scale. All
channels are computed inside the patch itself so that standalone training
patches and patches cropped out of frames go through exactly the same code.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .errors import BorderProximityError
from .video_io import Frame

PATCH_SIZE = 35
PATCH_MARGIN = 17


@dataclass(frozen=True)
class FeatureConfig:
    patch_size: int = PATCH_SIZE
    blur_sigmas: tuple[float, ...] = (0.0, 1.5)
    orientations_deg: tuple[float, ...] = (0.0, 45.0, 90.0, 135.0)

    @property
    def n_channels(self) -> int:
        return 1 + len(self.blur_sigmas) * (1 + len(self.orientations_deg))

    @property
    def length(self) -> int:
        return self.patch_size * self.patch_size * self.n_channels

    def to_dict(self) -> dict:
        return {
            "patch_size": self.patch_size,
            "blur_sigmas": list(self.blur_sigmas),
            "orientations_deg": list(self.orientations_deg),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        return cls(
            patch_size=int(d["patch_size"]),
            blur_sigmas=tuple(float(s) for s in d["blur_sigmas"]),
            orientations_deg=tuple(float(o) for o in d["orientations_deg"]),
        )


DEFAULT_FEATURE_CONFIG = FeatureConfig()


def rounded_center(x: float, y: float) -> tuple[int, int]:
    """Half-up rounding of a sub-pixel center to the patch anchor pixel."""
    return int(np.floor(x + 0.5)), int(np.floor(y + 0.5))


def crop_patch(frame: Frame, center: tuple[float, float], margin: int = PATCH_MARGIN) -> np.ndarray:
    """35x35 luma patch around a (sub-pixel) center, or BorderProximityError."""
    cx, cy = rounded_center(*center)
    if not (margin <= cx <= frame.width - 1 - margin and margin <= cy <= frame.height - 1 - margin):
        raise BorderProximityError(
            f"patch center ({center[0]:.1f}, {center[1]:.1f}) within {margin} px of a border"
        )
    half = PATCH_SIZE // 2
    return frame.luma[cy - half:cy + half + 1, cx - half:cx + half + 1]


def patch_features(patches: np.ndarray, config: FeatureConfig = DEFAULT_FEATURE_CONFIG) -> np.ndarray:
    """Channel features for a stack of patches.

    patches: (K, 35, 35) uint8 (a single (35, 35) patch is also accepted).
    Returns float32 (K, config.length); channel blocks are concatenated in
    declaration order: luma, then per blur sigma the gradient magnitude
    followed by the oriented channels.
    """
    patches = np.asarray(patches)
    single = patches.ndim == 2
    if single:
        patches = patches[None]
    k, h, w = patches.shape
    if (h, w) != (config.patch_size, config.patch_size):
        raise ValueError(f"expected {config.patch_size}x{config.patch_size} patches, got {h}x{w}")

    luma = patches.astype(np.float32) / 255.0
    blocks = [luma.reshape(k, -1)]
    for sigma in config.blur_sigmas:
        if sigma > 0:
            sm = gaussian_filter1d(luma, sigma, axis=1, mode="nearest")
            sm = gaussian_filter1d(sm, sigma, axis=2, mode="nearest")
        else:
            sm = luma
        gy, gx = np.gradient(sm, axis=(1, 2))
        blocks.append(np.hypot(gx, gy).reshape(k, -1))
        for deg in config.orientations_deg:
            th = np.deg2rad(deg)
            oriented = np.abs(np.cos(th) * gx + np.sin(th) * gy)
            blocks.append(oriented.reshape(k, -1))
    feats = np.concatenate(blocks, axis=1).astype(np.float32)
    return feats[0] if single else feats


def extract_channel_features(
    frame: Frame,
    center: tuple[float, float],
    config: FeatureConfig = DEFAULT_FEATURE_CONFIG,
) -> np.ndarray:
    """Channel features of the 35x35 patch around `center` in a frame."""
    return patch_features(crop_patch(frame, center), config)
