"""Per-frame spatial quality scoring over matched sensitive regions.

A frame pair is scored by detecting interest points in both frames, matching
reference points to test points, filtering implausible correspondences, and
measuring the Jensen-Shannon divergence between the token vectors of each
matched patch pair. Per-frame pooling is a Minkowski mean that emphasizes
the worst regions, divided by the match count:

    score = (sum_i d_i^beta)^(1/beta) / N

which for N equal distances d collapses to d * N^((1-beta)/beta).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import keypoints
from .channels import PATCH_MARGIN, patch_features, rounded_center
from .codebook import STCodebook, infer_vectors
from .divergence import jsd
from .errors import AllFramesUnscorableError, DimensionMismatchError, InsufficientMatchesError
from .keypoints import DetectorConfig, MatchingMatrix
from .video_io import Frame, PairedSequences, Sequence

DEFAULT_BETA = 4.0


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the matching pipeline needs besides the codebook and beta."""

    detector: DetectorConfig = field(default_factory=DetectorConfig)
    ratio: float = 0.7
    dx_max: float = 60.0
    dy_max: float = 10.0
    margin: int = PATCH_MARGIN
    n_min: int = 5
    cross_check: bool = False
    # consecutive-frame scoring: widen the horizontal limit for motion, or
    # skip matching entirely and compare co-located patches
    temporal_dx_scale: float = 2.0
    temporal_colocated: bool = False

    def temporal_variant(self) -> "PipelineConfig":
        return replace(self, dx_max=self.dx_max * self.temporal_dx_scale)


DEFAULT_CONFIG = PipelineConfig()


@dataclass(frozen=True)
class FrameScore:
    value: float
    n_matches: int
    frame_index: int


@dataclass(frozen=True)
class SpatialScore:
    value: float
    per_frame: list[FrameScore]
    skipped_frames: list[int]


@dataclass
class FrameAnalysis:
    """Reusable per-frame products: keypoints, descriptors, token vectors."""

    frame: Frame
    points: list[keypoints.InterestPoint]
    descriptors: np.ndarray
    margin_ok: np.ndarray      # (K,) bool, patch fits at the point
    token_vectors: np.ndarray  # (K, 151) float64, NaN rows where margin_ok is False


def analyze_frame(frame: Frame, codebook: STCodebook, cfg: PipelineConfig = DEFAULT_CONFIG) -> FrameAnalysis:
    """Detect, describe and token-encode a frame once, for reuse across pairs."""
    pts = keypoints.detect_interest_points(frame, cfg.detector)
    desc = keypoints.compute_descriptors(frame, pts)
    k = len(pts)
    margin_ok = np.zeros(k, dtype=bool)
    vectors = np.full((k, 151), np.nan)
    half = 17
    patches = []
    idx = []
    for i, p in enumerate(pts):
        cx, cy = rounded_center(p.x, p.y)
        if cfg.margin <= cx <= frame.width - 1 - cfg.margin and cfg.margin <= cy <= frame.height - 1 - cfg.margin:
            margin_ok[i] = True
            patches.append(frame.luma[cy - half:cy + half + 1, cx - half:cx + half + 1])
            idx.append(i)
    if patches:
        feats = patch_features(np.stack(patches), codebook.feature_config)
        vectors[idx] = infer_vectors(codebook, feats)
    return FrameAnalysis(frame=frame, points=pts, descriptors=desc, margin_ok=margin_ok, token_vectors=vectors)


def minkowski_pool(distances, beta: float = DEFAULT_BETA) -> float:
    """(sum d^beta)^(1/beta) / N over a non-empty distance collection."""
    if beta < 1.0:
        raise ValueError(f"beta must be >= 1, got {beta}")
    d = np.asarray(distances, dtype=np.float64)
    if d.size == 0:
        raise ValueError("cannot pool an empty distance collection")
    return float(np.power(np.sum(np.power(d, beta)), 1.0 / beta) / d.size)


def _match_analyses(ref: FrameAnalysis, test: FrameAnalysis, cfg: PipelineConfig) -> MatchingMatrix:
    pairs = keypoints.match_points(
        list(zip(ref.points, ref.descriptors)),
        list(zip(test.points, test.descriptors)),
        ratio=cfg.ratio,
        cross_check=cfg.cross_check,
    )
    return keypoints.filter_matches(
        pairs,
        (ref.frame.width, ref.frame.height),
        limits=(cfg.dx_max, cfg.dy_max),
        margin=cfg.margin,
    )


def _colocated_matrix(ref: FrameAnalysis, cfg: PipelineConfig) -> MatchingMatrix:
    """Self-pairs at every margin-valid reference keypoint (no matching)."""
    pairs = [
        keypoints.MatchPair(
            ref_point=(p.x, p.y),
            test_point=(p.x, p.y),
            descriptor_distance=0.0,
            ref_index=i,
            test_index=i,
        )
        for i, p in enumerate(ref.points)
        if ref.margin_ok[i]
    ]
    return MatchingMatrix(pairs=pairs)


def vectors_at_centers(frame: Frame, codebook: STCodebook, centers) -> np.ndarray:
    """Token vectors for the 35x35 patches around margin-valid centers."""
    half = 17
    patches = np.empty((len(centers), 35, 35), dtype=frame.luma.dtype)
    for k, (x, y) in enumerate(centers):
        cx, cy = rounded_center(x, y)
        patches[k] = frame.luma[cy - half:cy + half + 1, cx - half:cx + half + 1]
    return infer_vectors(codebook, patch_features(patches, codebook.feature_config))


def score_analyses(
    ref: FrameAnalysis,
    test: FrameAnalysis,
    codebook: STCodebook,
    beta: float = DEFAULT_BETA,
    cfg: PipelineConfig = DEFAULT_CONFIG,
    frame_index: int = 0,
    colocated: bool = False,
) -> FrameScore:
    """Score a frame pair from precomputed analyses."""
    matrix = _colocated_matrix(ref, cfg) if colocated else _match_analyses(ref, test, cfg)
    if matrix.N < max(cfg.n_min, 1):
        raise InsufficientMatchesError(
            f"frame {frame_index}: {matrix.N} matches below minimum {cfg.n_min}"
        )
    ref_vecs = ref.token_vectors[[m.ref_index for m in matrix.pairs]]
    if colocated:
        # the test frame is sampled at the reference coordinates, which its
        # own keypoint cache knows nothing about
        test_vecs = vectors_at_centers(test.frame, codebook, [m.test_point for m in matrix.pairs])
    else:
        test_vecs = test.token_vectors[[m.test_index for m in matrix.pairs]]
    distances = np.empty(matrix.N)
    for k in range(matrix.N):
        distances[k] = jsd(ref_vecs[k], test_vecs[k])
    return FrameScore(value=minkowski_pool(distances, beta), n_matches=matrix.N, frame_index=frame_index)


def st_iqm_frame(
    ref: Frame,
    test: Frame,
    codebook: STCodebook,
    beta: float = DEFAULT_BETA,
    cfg: PipelineConfig = DEFAULT_CONFIG,
) -> FrameScore:
    """Spatial score for one reference/test frame pair."""
    if (ref.width, ref.height) != (test.width, test.height):
        raise DimensionMismatchError(
            f"frame dimensions differ: {ref.width}x{ref.height} vs {test.width}x{test.height}"
        )
    return score_analyses(
        analyze_frame(ref, codebook, cfg),
        analyze_frame(test, codebook, cfg),
        codebook,
        beta,
        cfg,
        frame_index=ref.index,
    )


def st_iqm_sequence(
    pair: PairedSequences,
    codebook: STCodebook,
    beta: float = DEFAULT_BETA,
    cfg: PipelineConfig = DEFAULT_CONFIG,
    ref_analyses: list[FrameAnalysis] | None = None,
    test_analyses: list[FrameAnalysis] | None = None,
) -> SpatialScore:
    """Mean of per-frame scores over all scorable aligned frames.

    Frames with too few filtered matches are skipped (and reported), never
    imputed; if nothing is scorable the whole sequence is unscorable.
    """
    ref_analyses = ref_analyses or [analyze_frame(f, codebook, cfg) for f in pair.reference.frames]
    test_analyses = test_analyses or [analyze_frame(f, codebook, cfg) for f in pair.test.frames]
    scores: list[FrameScore] = []
    skipped: list[int] = []
    for i in range(len(pair.reference)):
        try:
            scores.append(score_analyses(ref_analyses[i], test_analyses[i], codebook, beta, cfg, frame_index=i))
        except InsufficientMatchesError:
            skipped.append(i)
    if not scores:
        raise AllFramesUnscorableError(
            f"all {len(pair.reference)} frames had fewer than {cfg.n_min} matches"
        )
    value = float(np.mean([s.value for s in scores]))
    return SpatialScore(value=value, per_frame=scores, skipped_frames=skipped)
