"""Temporal inconsistency scoring from consecutive-frame structure change.

Each sequence is summarized by a vector of consecutive-frame spatial scores
(frame i against frame i+1, same matching pipeline, wider horizontal limit
for motion). The temporal dissimilarity between a reference and a test
sequence is the Euclidean distance between their vectors. Unscorable
consecutive pairs stay in the vector as explicit gaps; matching gap indices
are excluded pairwise from the distance, and low overlap flags the result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .codebook import STCodebook
from .errors import (
    InsufficientMatchesError,
    LengthMismatchError,
    NoOverlappingComponentsError,
    TooShortSequenceError,
)
from .spatial import DEFAULT_BETA, DEFAULT_CONFIG, FrameAnalysis, PipelineConfig, analyze_frame, score_analyses
from .video_io import Sequence

LOW_CONFIDENCE_COVERAGE = 0.8


@dataclass(frozen=True)
class TemporalVector:
    """Consecutive-frame scores; None marks a pair that could not be scored."""

    values: list[float | None]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def n_gaps(self) -> int:
        return sum(1 for v in self.values if v is None)


@dataclass(frozen=True)
class TemporalComparison:
    value: float
    n_used: int
    coverage: float
    low_confidence: bool


def temporal_vector(
    seq: Sequence,
    codebook: STCodebook,
    beta: float = DEFAULT_BETA,
    cfg: PipelineConfig = DEFAULT_CONFIG,
    analyses: list[FrameAnalysis] | None = None,
) -> TemporalVector:
    """Vector of F-1 consecutive-frame scores within one sequence."""
    if len(seq) < 2:
        raise TooShortSequenceError(f"need at least 2 frames, got {len(seq)}")
    tcfg = cfg.temporal_variant()
    analyses = analyses or [analyze_frame(f, codebook, cfg) for f in seq.frames]
    values: list[float | None] = []
    for i in range(len(seq) - 1):
        try:
            s = score_analyses(
                analyses[i],
                analyses[i + 1],
                codebook,
                beta,
                tcfg,
                frame_index=i,
                colocated=cfg.temporal_colocated,
            )
            values.append(s.value)
        except InsufficientMatchesError:
            values.append(None)
    return TemporalVector(values=values)


def compare_temporal(ref_tem: TemporalVector, test_tem: TemporalVector) -> TemporalComparison:
    """Euclidean distance over indices scored in both vectors, with coverage."""
    if len(ref_tem) != len(test_tem):
        raise LengthMismatchError(
            f"temporal vectors differ in length: {len(ref_tem)} vs {len(test_tem)}"
        )
    kept = [
        (a, b)
        for a, b in zip(ref_tem.values, test_tem.values)
        if a is not None and b is not None
    ]
    if not kept:
        raise NoOverlappingComponentsError("no index is scored in both temporal vectors")
    sq = math.fsum((a - b) ** 2 for a, b in kept)
    coverage = len(kept) / len(ref_tem)
    return TemporalComparison(
        value=math.sqrt(sq),
        n_used=len(kept),
        coverage=coverage,
        low_confidence=coverage < LOW_CONFIDENCE_COVERAGE,
    )


def st_t(ref_tem: TemporalVector, test_tem: TemporalVector) -> float:
    """Temporal dissimilarity score (the distance alone)."""
    return compare_temporal(ref_tem, test_tem).value
