"""Synthetic labeled contour patches for training the token codebook.

The pretrained contour model this toolkit was designed around is not
redistributable, so the codebook is trained on a parametric family of 150
contour classes plus a textureless class. The family, in class-id order:

  ids   1-24   straight lines: 12 orientations (15 degree steps) x 2
               perpendicular offsets (0 px, 5 px)
  ids  25-60   circular arcs through the patch center: 12 orientations x 3
               radii (10, 16, 26 px)
  ids  61-96   corners (two rays from the center): 12 orientations x 3
               opening angles (60, 90, 120 degrees)
  ids  97-108  T-junctions (full bar plus perpendicular stem): 12 orientations
  ids 109-120  X-crossings (two full lines 60 degrees apart): 12 orientations
  ids 121-132  Y-forks (rays at +0, +110, +235 degrees): 12 orientations
  ids 133-144  parallel line pairs (8 px apart): 12 orientations
  ids 145-150  thick bars (5 px wide): 6 orientations (30 degree steps)
  id  151      textureless: flat background, no stroke

Patches are rendered with a smooth anti-aliased stroke profile, randomized
background level, stroke contrast and polarity, additive Gaussian noise, and
a small geometric jitter (sub-2 px center shift, sub-3 degree rotation) so
the trained classifiers generalize beyond pixel-exact geometry.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import CorpusTooSmallError

N_CLASSES = 151
BLANK_CLASS = 151
PATCH_SIZE = 35

# id of the centered vertical line (orientation 90 degrees, offset 0)
VERTICAL_LINE_CLASS = 13

_THIN = 0.7   # half-width of thin strokes, px
_BAR = 2.5    # half-width of thick bars, px
_REACH = 27.0 # stroke extent from the center, covers the patch diagonal


@dataclass(frozen=True)
class ContourClass:
    class_id: int
    kind: str
    angle_deg: float
    params: tuple

    def describe(self) -> str:
        return f"{self.class_id}: {self.kind} angle={self.angle_deg:g} params={self.params}"


def class_definitions() -> list[ContourClass]:
    """The 151 classes in id order; geometry parameters, jitter excluded."""
    defs: list[ContourClass] = []
    angles12 = [15.0 * k for k in range(12)]
    for ang in angles12:
        for off in (0.0, 5.0):
            defs.append(ContourClass(len(defs) + 1, "line", ang, (off,)))
    for ang in angles12:
        for radius in (10.0, 16.0, 26.0):
            defs.append(ContourClass(len(defs) + 1, "arc", ang, (radius,)))
    for ang in angles12:
        for opening in (60.0, 90.0, 120.0):
            defs.append(ContourClass(len(defs) + 1, "corner", ang, (opening,)))
    for ang in angles12:
        defs.append(ContourClass(len(defs) + 1, "tjunction", ang, ()))
    for ang in angles12:
        defs.append(ContourClass(len(defs) + 1, "xcross", ang, (60.0,)))
    for ang in angles12:
        defs.append(ContourClass(len(defs) + 1, "yfork", ang, (110.0, 235.0)))
    for ang in angles12:
        defs.append(ContourClass(len(defs) + 1, "parallel", ang, (4.0,)))
    for ang in [30.0 * k for k in range(6)]:
        defs.append(ContourClass(len(defs) + 1, "bar", ang, ()))
    assert len(defs) == 150
    defs.append(ContourClass(151, "blank", 0.0, ()))
    return defs


@dataclass(frozen=True)
class LabeledPatchCorpus:
    """Training patches with class labels in [1, 151]."""

    patches: np.ndarray  # (N, 35, 35) uint8
    labels: np.ndarray   # (N,) int32

    def __post_init__(self):
        if self.patches.shape[0] != self.labels.shape[0]:
            raise ValueError("patches and labels disagree in length")
        present = set(np.unique(self.labels).tolist())
        if not present <= set(range(1, N_CLASSES + 1)):
            raise ValueError(f"labels outside [1, {N_CLASSES}]: {sorted(present)[:5]}...")
        missing = set(range(1, N_CLASSES + 1)) - present
        if missing:
            raise ValueError(f"{len(missing)} classes unrepresented, e.g. {sorted(missing)[:5]}")

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def require_min_per_class(self, minimum: int) -> None:
        counts = np.bincount(self.labels, minlength=N_CLASSES + 1)[1:]
        if counts.min() < minimum:
            worst = int(np.argmin(counts)) + 1
            raise CorpusTooSmallError(
                f"class {worst} has {counts.min()} examples, need >= {minimum}"
            )


def _rot(deg: float) -> np.ndarray:
    th = np.deg2rad(deg)
    return np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])


def _segment(origin, direction, t0, t1, step=0.35):
    ts = np.arange(t0, t1 + step, step)
    return origin[None, :] + ts[:, None] * direction[None, :]


def _strokes(kind: str, angle_deg: float, params: tuple) -> list[tuple[np.ndarray, float]]:
    """Stroke point chains (in centered coordinates) plus half-widths."""
    d = np.array([np.cos(np.deg2rad(angle_deg)), np.sin(np.deg2rad(angle_deg))])
    n = np.array([-d[1], d[0]])
    c = np.zeros(2)
    out = []
    if kind == "line":
        (off,) = params
        out.append((_segment(c + off * n, d, -_REACH, _REACH), _THIN))
    elif kind == "arc":
        (radius,) = params
        s = np.arange(-_REACH, _REACH + 0.35, 0.35)
        phi = s / radius
        pts = (radius * np.sin(phi))[:, None] * d[None, :] + (radius * (1 - np.cos(phi)))[:, None] * n[None, :]
        out.append((pts, _THIN))
    elif kind == "corner":
        (opening,) = params
        d2 = _rot(opening) @ d
        out.append((_segment(c, d, 0.0, _REACH), _THIN))
        out.append((_segment(c, d2, 0.0, _REACH), _THIN))
    elif kind == "tjunction":
        stem = _rot(90.0) @ d
        out.append((_segment(c, d, -_REACH, _REACH), _THIN))
        out.append((_segment(c, stem, 0.0, _REACH), _THIN))
    elif kind == "xcross":
        (cross,) = params
        d2 = _rot(cross) @ d
        out.append((_segment(c, d, -_REACH, _REACH), _THIN))
        out.append((_segment(c, d2, -_REACH, _REACH), _THIN))
    elif kind == "yfork":
        a2, a3 = params
        out.append((_segment(c, d, 0.0, _REACH), _THIN))
        out.append((_segment(c, _rot(a2) @ d, 0.0, _REACH), _THIN))
        out.append((_segment(c, _rot(a3) @ d, 0.0, _REACH), _THIN))
    elif kind == "parallel":
        (gap,) = params
        out.append((_segment(c + gap * n, d, -_REACH, _REACH), _THIN))
        out.append((_segment(c - gap * n, d, -_REACH, _REACH), _THIN))
    elif kind == "bar":
        out.append((_segment(c, d, -_REACH, _REACH), _BAR))
    elif kind == "blank":
        pass
    else:
        raise ValueError(f"unknown contour kind {kind!r}")
    return out


_GRID = np.stack(
    np.meshgrid(
        np.arange(PATCH_SIZE, dtype=np.float64),
        np.arange(PATCH_SIZE, dtype=np.float64),
        indexing="xy",
    ),
    axis=-1,
).reshape(-1, 2)  # (1225, 2) as (x, y)


def render_patch(
    spec: ContourClass,
    rng: np.random.Generator,
    center_jitter: float = 1.2,
    angle_jitter: float = 2.5,
) -> np.ndarray:
    """One randomized uint8 rendering of a contour class."""
    bg = rng.uniform(70.0, 180.0)
    contrast = rng.uniform(55.0, 75.0) * (1.0 if rng.random() < 0.5 else -1.0)
    noise_sigma = rng.uniform(1.0, 3.0)
    jx = rng.uniform(-center_jitter, center_jitter)
    jy = rng.uniform(-center_jitter, center_jitter)
    ja = rng.uniform(-angle_jitter, angle_jitter)

    img = np.full(PATCH_SIZE * PATCH_SIZE, bg)
    if spec.kind != "blank":
        cx = (PATCH_SIZE - 1) / 2.0 + jx
        cy = (PATCH_SIZE - 1) / 2.0 + jy
        coverage = np.zeros(PATCH_SIZE * PATCH_SIZE)
        for pts, hw in _strokes(spec.kind, spec.angle_deg + ja, spec.params):
            world = pts + np.array([cx, cy])[None, :]
            dist, _ = cKDTree(world).query(_GRID, k=1)
            # sigmoid edge profile: ~1 inside the stroke, smooth 1 px falloff
            cov = 1.0 / (1.0 + np.exp((dist - hw) / 0.35))
            np.maximum(coverage, cov, out=coverage)
        img = img + contrast * coverage
    img = img + rng.normal(0.0, noise_sigma, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8).reshape(PATCH_SIZE, PATCH_SIZE)


def generate_synthetic_corpus(
    n_classes: int = N_CLASSES,
    n_per_class: int = 200,
    seed: int = 0,
) -> LabeledPatchCorpus:
    """Uniform corpus of n_per_class renderings of each class, reproducible by seed."""
    if n_classes != N_CLASSES:
        raise ValueError(f"the class family is fixed at {N_CLASSES} classes")
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    defs = class_definitions()
    patches = np.empty((n_classes * n_per_class, PATCH_SIZE, PATCH_SIZE), dtype=np.uint8)
    labels = np.empty(n_classes * n_per_class, dtype=np.int32)
    i = 0
    for spec in defs:
        for _ in range(n_per_class):
            patches[i] = render_patch(spec, rng)
            labels[i] = spec.class_id
            i += 1
    return LabeledPatchCorpus(patches=patches, labels=labels)
