"""Fusing spatial and temporal scores into one video quality number.

The fused score is affine in the two rescaled inputs:

    st_vqm = w_S * (spatial * spatial_scale) + w_T * (temporal * temporal_scale) + gamma

Raw spatial scores sit around 1e-10 and temporal scores around 1e-5 on
typical content, so the fixed scale factors bring both into a unit range
before weighting; they change nothing but the magnitude of the weights.

Weights are fitted by repeated random 80/20 splits: an ordinary least
squares fit per split, each parameter rounded to two decimals, and the most
frequent value across splits chosen per parameter.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDesignError

SPATIAL_SCALE = 1e10
TEMPORAL_SCALE = 1e5


@dataclass(frozen=True)
class FusionParams:
    w_s: float
    w_t: float
    gamma: float
    spatial_scale: float = SPATIAL_SCALE
    temporal_scale: float = TEMPORAL_SCALE

    def __post_init__(self):
        if self.spatial_scale <= 0 or self.temporal_scale <= 0:
            raise ValueError("scale factors must be strictly positive")


# Reference weights shipped as a convenience default; refit with fit_params
# for any new dataset or codebook.
DEFAULT_FUSION_PARAMS = FusionParams(w_s=0.28, w_t=-0.43, gamma=3.26)


@dataclass(frozen=True)
class SplitFit:
    params: FusionParams
    test_pcc: float


@dataclass(frozen=True)
class FitReport:
    chosen: FusionParams
    per_split: list[SplitFit]
    histogram: dict[str, dict[float, int]]
    seed: int

    def to_dict(self) -> dict:
        return {
            "chosen": {
                "w_s": self.chosen.w_s,
                "w_t": self.chosen.w_t,
                "gamma": self.chosen.gamma,
                "spatial_scale": self.chosen.spatial_scale,
                "temporal_scale": self.chosen.temporal_scale,
            },
            "n_splits": len(self.per_split),
            "seed": self.seed,
            "histogram": {
                name: {f"{v:.2f}": c for v, c in sorted(vals.items())}
                for name, vals in self.histogram.items()
            },
            "test_pcc_mean": float(np.nanmean([s.test_pcc for s in self.per_split])),
        }


def st_vqm(spatial: float, temporal: float, params: FusionParams = DEFAULT_FUSION_PARAMS) -> float:
    """Fused score; scaling is applied to the raw inputs before weighting."""
    return (
        params.w_s * (spatial * params.spatial_scale)
        + params.w_t * (temporal * params.temporal_scale)
        + params.gamma
    )


def _mode_rounded(values: np.ndarray) -> float:
    """Most frequent 2-decimal value; ties prefer smaller magnitude, then value."""
    rounded = np.round(values, 2) + 0.0  # normalize -0.0 to 0.0
    counts = Counter(rounded.tolist())
    best = max(counts.items(), key=lambda kv: (kv[1], -abs(kv[0]), -kv[0]))
    return float(best[0])


def fit_params(
    scores: list[tuple[float, float]],
    subjective: list[float],
    n_splits: int = 1000,
    train_frac: float = 0.8,
    seed: int = 0,
    spatial_scale: float = SPATIAL_SCALE,
    temporal_scale: float = TEMPORAL_SCALE,
) -> FitReport:
    """Repeated-split least-squares fit of the fusion weights.

    scores: per-sequence (spatial, temporal) raw values; subjective: aligned
    quality ratings. Each split fits on the training portion and reports the
    Pearson correlation of its predictions on the held-out portion.
    """
    s = np.asarray([sc[0] for sc in scores], dtype=np.float64) * spatial_scale
    t = np.asarray([sc[1] for sc in scores], dtype=np.float64) * temporal_scale
    y = np.asarray(subjective, dtype=np.float64)
    n = len(y)
    if len(scores) != n:
        raise ValueError("scores and subjective lists differ in length")
    if n < 10:
        raise ValueError(f"need at least 10 samples, got {n}")
    if np.ptp(s) == 0.0 or np.ptp(t) == 0.0:
        raise DegenerateDesignError("a predictor column is constant")
    if np.ptp(y) == 0.0:
        raise DegenerateDesignError("subjective scores are constant")

    design = np.column_stack([s, t, np.ones(n)])
    n_train = max(3, int(round(train_frac * n)))
    n_train = min(n_train, n - 1)  # keep at least one test sample

    rng = np.random.default_rng(seed)
    per_split: list[SplitFit] = []
    coef_rows = np.empty((n_splits, 3))
    for k in range(n_splits):
        perm = rng.permutation(n)
        tr, te = perm[:n_train], perm[n_train:]
        coef, *_ = np.linalg.lstsq(design[tr], y[tr], rcond=None)
        coef_rows[k] = coef
        pred = design[te] @ coef
        if te.size >= 2 and np.ptp(pred) > 0 and np.ptp(y[te]) > 0:
            pcc = float(np.corrcoef(pred, y[te])[0, 1])
        else:
            pcc = float("nan")
        per_split.append(
            SplitFit(
                params=FusionParams(
                    w_s=round(float(coef[0]), 2),
                    w_t=round(float(coef[1]), 2),
                    gamma=round(float(coef[2]), 2),
                    spatial_scale=spatial_scale,
                    temporal_scale=temporal_scale,
                ),
                test_pcc=pcc,
            )
        )

    histogram = {
        "w_s": _hist(coef_rows[:, 0]),
        "w_t": _hist(coef_rows[:, 1]),
        "gamma": _hist(coef_rows[:, 2]),
    }
    chosen = FusionParams(
        w_s=_mode_rounded(coef_rows[:, 0]),
        w_t=_mode_rounded(coef_rows[:, 1]),
        gamma=_mode_rounded(coef_rows[:, 2]),
        spatial_scale=spatial_scale,
        temporal_scale=temporal_scale,
    )
    return FitReport(chosen=chosen, per_split=per_split, histogram=histogram, seed=seed)


def _hist(values: np.ndarray) -> dict[float, int]:
    rounded = np.round(values, 2) + 0.0
    return dict(sorted(Counter(rounded.tolist()).items()))
