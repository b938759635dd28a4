"""Interest-point detection, description and matching on luma frames.

The detector finds maxima of an approximated Hessian determinant computed
with integral-image box filters over a scale pyramid (octaves of growing
filter sizes, subsampled grids). Descriptors are upright 64-component
Haar-wavelet summaries; view sweeps are horizontal, so rotation invariance
is deliberately left out in favor of determinism.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BorderProximityError
from .video_io import Frame

# Margin (px) keeping a 35x35 patch centered on a point inside the frame.
PATCH_MARGIN = 17
PATCH_SIZE = 35

# Determinant response of a unit-contrast sigma=3 Gaussian blob peaks near
# 3e-2 in normalized luma units; 8e-4 keeps blobs down to ~0.2 contrast while
# rejecting flat regions.
DEFAULT_THRESHOLD = 8e-4


@dataclass(frozen=True)
class DetectorConfig:
    octaves: int = 3
    intervals: int = 4
    threshold: float = DEFAULT_THRESHOLD
    max_points: int | None = None


@dataclass(frozen=True)
class InterestPoint:
    x: float
    y: float
    scale: float
    response: float
    sign: int  # Laplacian sign, +1 or -1


@dataclass(frozen=True)
class MatchPair:
    ref_point: tuple[float, float]
    test_point: tuple[float, float]
    descriptor_distance: float
    ref_index: int = -1
    test_index: int = -1


@dataclass(frozen=True)
class MatchingMatrix:
    pairs: list[MatchPair]

    @property
    def N(self) -> int:
        return len(self.pairs)


def integral_image(luma: np.ndarray) -> np.ndarray:
    """Summed-area table with a zero top row and left column.

    Input is uint8 luma; sums are over luma/255 in float64.
    """
    h, w = luma.shape
    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(np.cumsum(luma.astype(np.float64) / 255.0, axis=0), axis=1, out=ii[1:, 1:])
    return ii


def _box(ii, r0, c0, r1, c1):
    """Sum over the half-open pixel window rows [r0, r1), cols [c0, c1)."""
    return ii[r1, c1] - ii[r0, c1] - ii[r1, c0] + ii[r0, c0]


def _filter_size(octave: int, interval: int) -> int:
    return 6 * (2 ** octave) * (interval + 1) + 3


def _sigma_of(filter_size: float) -> float:
    return 1.2 * filter_size / 9.0


def _hessian_grid(ii, rows, cols, lobe):
    """Normalized Dxx, Dyy, Dxy box responses on a sample grid.

    rows/cols are 1-D pixel coordinates; responses come back with shape
    (len(rows), len(cols)). All windows must fit inside the image.
    """
    r = rows[:, None]
    c = cols[None, :]
    l = lobe
    half = (3 * l - 1) // 2  # filter border

    # Dyy: (3l x 2l-1) window minus three times its central l-row band
    all_yy = _box(ii, r - half, c - l + 1, r + half + 1, c + l)
    mid_yy = _box(ii, r - (l - 1) // 2, c - l + 1, r + (l - 1) // 2 + 1, c + l)
    dyy = all_yy - 3.0 * mid_yy

    all_xx = _box(ii, r - l + 1, c - half, r + l, c + half + 1)
    mid_xx = _box(ii, r - l + 1, c - (l - 1) // 2, r + l, c + (l - 1) // 2 + 1)
    dxx = all_xx - 3.0 * mid_xx

    # Dxy: four l x l quadrant blocks with a one-pixel cross gap
    tl = _box(ii, r - l, c - l, r, c)
    br = _box(ii, r + 1, c + 1, r + l + 1, c + l + 1)
    tr = _box(ii, r - l, c + 1, r, c + l + 1)
    bl = _box(ii, r + 1, c - l, r + l + 1, c)
    dxy = (tl + br) - (tr + bl)

    inv_area = 1.0 / float((3 * l) ** 2)
    return dxx * inv_area, dyy * inv_area, dxy * inv_area


def _octave_responses(ii, height, width, octave, intervals):
    """Determinant and trace-sign stacks for one octave on its sample grid."""
    stride = 2 ** octave
    rows = np.arange(0, height, stride)
    cols = np.arange(0, width, stride)
    det = np.zeros((intervals, len(rows), len(cols)), dtype=np.float64)
    lap = np.zeros_like(det)
    borders = []
    for i in range(intervals):
        size = _filter_size(octave, i)
        lobe = size // 3
        b = (3 * lobe - 1) // 2
        borders.append(b)
        rmask = (rows >= b) & (rows <= height - 1 - b)
        cmask = (cols >= b) & (cols <= width - 1 - b)
        if not rmask.any() or not cmask.any():
            continue
        rr = rows[rmask]
        cc = cols[cmask]
        dxx, dyy, dxy = _hessian_grid(ii, rr, cc, lobe)
        d = dxx * dyy - (0.9 * dxy) ** 2
        sl = np.ix_(np.flatnonzero(rmask), np.flatnonzero(cmask))
        det[i][sl] = d
        lap[i][sl] = dxx + dyy
    return det, lap, rows, cols, borders


def _refine(det, i, r, c):
    """Quadratic sub-cell refinement; returns (di, dr, dc) offsets or zeros."""
    g = np.array(
        [
            (det[i + 1, r, c] - det[i - 1, r, c]) / 2.0,
            (det[i, r + 1, c] - det[i, r - 1, c]) / 2.0,
            (det[i, r, c + 1] - det[i, r, c - 1]) / 2.0,
        ]
    )
    v = det[i, r, c]
    hii = det[i + 1, r, c] + det[i - 1, r, c] - 2 * v
    hrr = det[i, r + 1, c] + det[i, r - 1, c] - 2 * v
    hcc = det[i, r, c + 1] + det[i, r, c - 1] - 2 * v
    hir = (det[i + 1, r + 1, c] - det[i + 1, r - 1, c]
           - det[i - 1, r + 1, c] + det[i - 1, r - 1, c]) / 4.0
    hic = (det[i + 1, r, c + 1] - det[i + 1, r, c - 1]
           - det[i - 1, r, c + 1] + det[i - 1, r, c - 1]) / 4.0
    hrc = (det[i, r + 1, c + 1] - det[i, r + 1, c - 1]
           - det[i, r - 1, c + 1] + det[i, r - 1, c - 1]) / 4.0
    hess = np.array([[hii, hir, hic], [hir, hrr, hrc], [hic, hrc, hcc]])
    try:
        off = -np.linalg.solve(hess, g)
    except np.linalg.LinAlgError:
        return np.zeros(3)
    if np.any(np.abs(off) > 1.0) or not np.all(np.isfinite(off)):
        return np.zeros(3)
    return off


def detect_interest_points(frame: Frame, config: DetectorConfig = DetectorConfig()) -> list[InterestPoint]:
    """Detect blob-like interest points, strongest response first.

    A point is a strict maximum of the box-filter Hessian determinant over
    its 3x3x3 scale-space neighborhood within an octave, above the
    configured threshold. Near-coincident detections from overlapping
    octaves are merged, keeping the stronger response.
    """
    if config.intervals < 3:
        return []
    ii = integral_image(frame.luma)
    h, w = frame.height, frame.width
    raw: list[InterestPoint] = []
    for octave in range(config.octaves):
        stride = 2 ** octave
        det, lap, rows, cols, borders = _octave_responses(ii, h, w, octave, config.intervals)
        for i in range(1, config.intervals - 1):
            # candidate must clear the next interval's border so the whole
            # 3x3x3 neighborhood was computed
            b = borders[i + 1]
            lo_r = int(np.searchsorted(rows, b + stride))
            hi_r = int(np.searchsorted(rows, h - 1 - b - stride, side="right"))
            lo_c = int(np.searchsorted(cols, b + stride))
            hi_c = int(np.searchsorted(cols, w - 1 - b - stride, side="right"))
            if hi_r - lo_r < 1 or hi_c - lo_c < 1:
                continue
            center = det[i, lo_r:hi_r, lo_c:hi_c]
            above = center > config.threshold
            if not above.any():
                continue
            neigh = np.full_like(center, -np.inf)
            for di in (-1, 0, 1):
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        if di == 0 and dr == 0 and dc == 0:
                            continue
                        block = det[i + di, lo_r + dr:hi_r + dr, lo_c + dc:hi_c + dc]
                        np.maximum(neigh, block, out=neigh)
            is_max = above & (center > neigh)
            for rr, cc in zip(*np.nonzero(is_max)):
                r = rr + lo_r
                c = cc + lo_c
                off = _refine(det, i, r, c)
                y = (rows[r] + off[1] * stride)
                x = (cols[c] + off[2] * stride)
                size = _filter_size(octave, i) + off[0] * 6 * (2 ** octave)
                raw.append(
                    InterestPoint(
                        x=float(np.clip(x, 0.0, w - 1.0)),
                        y=float(np.clip(y, 0.0, h - 1.0)),
                        scale=float(_sigma_of(size)),
                        response=float(det[i, r, c]),
                        sign=1 if lap[i, r, c] >= 0 else -1,
                    )
                )
    points = _dedupe(raw)
    points.sort(key=lambda p: (-p.response, p.y, p.x))
    if config.max_points is not None:
        points = points[: config.max_points]
    return points


def _dedupe(points: list[InterestPoint], radius: float = 1.5, scale_ratio: float = 1.6):
    """Merge near-coincident detections from overlapping octaves."""
    points = sorted(points, key=lambda p: (-p.response, p.y, p.x))
    kept: list[InterestPoint] = []
    for p in points:
        dup = False
        for q in kept:
            if abs(p.x - q.x) <= radius and abs(p.y - q.y) <= radius:
                hi, lo = max(p.scale, q.scale), min(p.scale, q.scale)
                if hi / lo <= scale_ratio:
                    dup = True
                    break
        if not dup:
            kept.append(p)
    return kept


# 20x20 sample lattice in units of the point scale, and its Gaussian weights
_DESC_OFF = np.arange(-10, 10) + 0.5
_DESC_U, _DESC_V = np.meshgrid(_DESC_OFF, _DESC_OFF)  # [v, u] layout
_DESC_W = np.exp(-(_DESC_U ** 2 + _DESC_V ** 2) / (2.0 * 3.3 ** 2))


def compute_descriptors(frame: Frame, points: list[InterestPoint], ii: np.ndarray | None = None) -> np.ndarray:
    """Upright 64-component descriptors for all points, shape (len(points), 64).

    Haar responses are sampled on a 20x20 lattice scaled by each point's
    scale, Gaussian-weighted, then pooled into 4x4 subregions as
    (sum dx, sum |dx|, sum dy, sum |dy|) and L2-normalized. Samples whose
    wavelet support would leave the frame are clamped to the border.
    """
    if ii is None:
        ii = integral_image(frame.luma)
    h, w = frame.height, frame.width
    n = len(points)
    out = np.zeros((n, 64), dtype=np.float64)
    if n == 0:
        return out

    xs = np.array([p.x for p in points])
    ys = np.array([p.y for p in points])
    sc = np.array([p.scale for p in points])
    hr = np.maximum(1, np.rint(sc).astype(np.int64))  # haar half-size

    u = _DESC_U.ravel()
    v = _DESC_V.ravel()
    px = np.rint(xs[:, None] + u[None, :] * sc[:, None]).astype(np.int64)
    py = np.rint(ys[:, None] + v[None, :] * sc[:, None]).astype(np.int64)
    px = np.clip(px, hr[:, None], w - hr[:, None])
    py = np.clip(py, hr[:, None], h - hr[:, None])
    hrb = np.broadcast_to(hr[:, None], px.shape)

    dx = _box(ii, py - hrb, px, py + hrb, px + hrb) - _box(ii, py - hrb, px - hrb, py + hrb, px)
    dy = _box(ii, py, px - hrb, py + hrb, px + hrb) - _box(ii, py - hrb, px - hrb, py, px + hrb)

    wgt = _DESC_W.ravel()[None, :]
    dxw = (dx * wgt).reshape(n, 4, 5, 4, 5)
    dyw = (dy * wgt).reshape(n, 4, 5, 4, 5)
    feats = np.stack(
        [
            dxw.sum(axis=(2, 4)),
            np.abs(dxw).sum(axis=(2, 4)),
            dyw.sum(axis=(2, 4)),
            np.abs(dyw).sum(axis=(2, 4)),
        ],
        axis=-1,
    ).reshape(n, 64)
    norms = np.linalg.norm(feats, axis=1, keepdims=True)
    np.divide(feats, norms, out=out, where=norms > 1e-12)
    return out


def compute_descriptor(frame: Frame, point: InterestPoint) -> np.ndarray:
    """Descriptor for a single point at least PATCH_MARGIN px from borders."""
    if not _inside_margin(point.x, point.y, frame.width, frame.height, PATCH_MARGIN):
        raise BorderProximityError(
            f"point ({point.x:.1f}, {point.y:.1f}) within {PATCH_MARGIN} px of a border"
        )
    return compute_descriptors(frame, [point])[0]


def _inside_margin(x: float, y: float, width: int, height: int, margin: int) -> bool:
    cx = int(np.floor(x + 0.5))
    cy = int(np.floor(y + 0.5))
    return margin <= cx <= width - 1 - margin and margin <= cy <= height - 1 - margin


def match_points(
    ref: list[tuple[InterestPoint, np.ndarray]],
    test: list[tuple[InterestPoint, np.ndarray]],
    ratio: float = 0.7,
    cross_check: bool = False,
) -> list[MatchPair]:
    """One-directional nearest-neighbor matching with a ratio test.

    Each reference point takes its nearest test descriptor (L2) provided the
    Laplacian signs agree and the nearest/second-nearest distance ratio is
    below `ratio`. With `cross_check`, the test point must also name the
    reference point as its own same-sign nearest neighbor.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    if not ref or not test:
        return []
    ref_pts, ref_desc = zip(*ref)
    test_pts, test_desc = zip(*test)
    rd = np.asarray(ref_desc, dtype=np.float64)
    td = np.asarray(test_desc, dtype=np.float64)
    rs = np.array([p.sign for p in ref_pts])
    ts = np.array([p.sign for p in test_pts])

    d2 = (
        np.sum(rd ** 2, axis=1)[:, None]
        + np.sum(td ** 2, axis=1)[None, :]
        - 2.0 * rd @ td.T
    )
    np.maximum(d2, 0.0, out=d2)
    dist = np.sqrt(d2)
    dist[rs[:, None] != ts[None, :]] = np.inf

    pairs: list[MatchPair] = []
    nearest_of_test = np.argmin(dist, axis=0) if cross_check else None
    for i in range(dist.shape[0]):
        row = dist[i]
        j = int(np.argmin(row))
        d1 = row[j]
        if not np.isfinite(d1):
            continue
        rest = np.delete(row, j)
        d2nd = float(rest.min()) if rest.size else np.inf
        if not (d1 < ratio * d2nd):
            continue
        if cross_check and nearest_of_test[j] != i:
            continue
        p, q = ref_pts[i], test_pts[j]
        pairs.append(
            MatchPair(
                ref_point=(p.x, p.y),
                test_point=(q.x, q.y),
                # recompute directly: exact 0.0 for identical descriptors,
                # which the Gram-matrix form cannot guarantee
                descriptor_distance=float(np.linalg.norm(rd[i] - td[j])),
                ref_index=i,
                test_index=j,
            )
        )
    return pairs


def filter_matches(
    matches: list[MatchPair],
    frame_dims: tuple[int, int],
    limits: tuple[float, float] = (60.0, 10.0),
    margin: int = PATCH_MARGIN,
) -> MatchingMatrix:
    """Drop implausible correspondences and border-adjacent points.

    View synthesis displaces content mostly horizontally, so the default
    displacement limits are loose in x and tight in y. Both endpoints must
    sit at least `margin` px from every border so the analysis patch fits.
    """
    if margin < PATCH_MARGIN:
        raise ValueError(f"margin must be >= {PATCH_MARGIN}, got {margin}")
    width, height = frame_dims
    dx_max, dy_max = limits
    kept = []
    for m in matches:
        xr, yr = m.ref_point
        xm, ym = m.test_point
        if abs(xr - xm) > dx_max or abs(yr - ym) > dy_max:
            continue
        if not _inside_margin(xr, yr, width, height, margin):
            continue
        if not _inside_margin(xm, ym, width, height, margin):
            continue
        kept.append(m)
    return MatchingMatrix(pairs=kept)
