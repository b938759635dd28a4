"""Benchmarking objective scores against subjective data.

Three layers, matching how quality metrics are conventionally reported:

  * a monotone four-parameter logistic mapping from objective scores to the
    subjective scale, fitted by least squares;
  * Pearson / Spearman / RMSE between mapped scores and subjective scores;
  * a pairwise analysis over same-configuration sequence pairs rendered
    along different trajectories: a Welch t-test on per-observer scores
    labels each pair Different or Similar (with a direction when Different),
    and ROC areas measure how well objective score differences separate
    those categories (AUC-DS over all pairs, AUC-BW and the correct-
    classification rate over the Different ones).

The pair analysis replaces objective scores with their average ranks before
differencing, so all of its outputs depend only on the ordering of the
scores and are exactly invariant under strictly monotone transforms.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import optimize, stats

from .errors import (
    ConstantObjectiveError,
    FitDivergenceError,
    LengthMismatchError,
    MissingRawScoresError,
    ZeroVarianceError,
)


# --- dataset manifest ---

@dataclass(frozen=True)
class ManifestEntry:
    id: str
    src: str
    hrc_baseline: str
    hrc_rp: str
    hrt: str
    ref_path: str
    test_path: str
    mos: float
    dmos: float | None = None
    raw_scores: tuple[float, ...] | None = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: list[ManifestEntry]

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("manifest ids are not unique")
        for e in self.entries:
            if not 1.0 <= e.mos <= 5.0:
                raise ValueError(f"{e.id}: mos {e.mos} outside [1, 5]")
        lengths = {len(e.raw_scores) for e in self.entries if e.raw_scores is not None}
        if len(lengths) > 1:
            raise ValueError(f"raw_scores panels differ in size: {sorted(lengths)}")

    def __len__(self) -> int:
        return len(self.entries)


MANIFEST_COLUMNS = [
    "id", "src", "hrc_baseline", "hrc_rp", "hrt",
    "ref_path", "test_path", "mos", "dmos", "raw_scores",
]


def load_manifest(path) -> DatasetManifest:
    """Read the CSV manifest format (raw_scores as a |-separated list)."""
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: manifest missing columns {sorted(missing)}")
        for row in reader:
            raw = row["raw_scores"].strip()
            dmos = row["dmos"].strip()
            entries.append(
                ManifestEntry(
                    id=row["id"],
                    src=row["src"],
                    hrc_baseline=row["hrc_baseline"],
                    hrc_rp=row["hrc_rp"],
                    hrt=row["hrt"],
                    ref_path=row["ref_path"],
                    test_path=row["test_path"],
                    mos=float(row["mos"]),
                    dmos=float(dmos) if dmos else None,
                    raw_scores=tuple(float(x) for x in raw.split("|")) if raw else None,
                )
            )
    return DatasetManifest(entries=entries)


def save_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for e in manifest.entries:
            writer.writerow([
                e.id, e.src, e.hrc_baseline, e.hrc_rp, e.hrt,
                e.ref_path, e.test_path,
                repr(e.mos),
                "" if e.dmos is None else repr(e.dmos),
                "" if e.raw_scores is None else "|".join(repr(x) for x in e.raw_scores),
            ])


# --- logistic mapping and correlation statistics ---

def _logistic(o, b1, b2, b3, b4):
    z = np.clip(b2 * (o - b3), -500.0, 500.0)
    return b1 * (0.5 - 1.0 / (1.0 + np.exp(z))) + b4


def logistic_fit(objective, subjective) -> tuple[np.ndarray, np.ndarray]:
    """Fit the monotone 4-parameter logistic and return (mapped, params).

    Initialization is deterministic: b1 = range(subjective),
    b2 = 1 / std(objective), b3 = median(objective), b4 = mean(subjective).
    """
    o = np.asarray(objective, dtype=np.float64)
    s = np.asarray(subjective, dtype=np.float64)
    if o.shape != s.shape:
        raise LengthMismatchError(f"lengths differ: {o.shape} vs {s.shape}")
    if o.size < 5:
        raise ValueError(f"need at least 5 points, got {o.size}")
    sd = float(np.std(o))
    if sd == 0.0:
        raise ConstantObjectiveError("objective scores are constant")
    p0 = [
        float(np.ptp(s)) or 1.0,
        1.0 / sd,
        float(np.median(o)),
        float(np.mean(s)),
    ]
    try:
        params, _ = optimize.curve_fit(_logistic, o, s, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        resid = s - _logistic(o, *p0)
        raise FitDivergenceError(
            f"logistic fit did not converge (initial residual rms "
            f"{float(np.sqrt(np.mean(resid ** 2))):.4g}): {exc}"
        ) from exc
    return _logistic(o, *params), params


def correlation_stats(mapped, subjective) -> tuple[float, float, float]:
    """(pcc, srocc, rmse) with average-rank handling of ties in the SROCC."""
    m = np.asarray(mapped, dtype=np.float64)
    s = np.asarray(subjective, dtype=np.float64)
    if m.shape != s.shape:
        raise LengthMismatchError(f"lengths differ: {m.shape} vs {s.shape}")
    if m.size < 3:
        raise ValueError(f"need at least 3 points, got {m.size}")
    if np.ptp(m) == 0.0 or np.ptp(s) == 0.0:
        raise ZeroVarianceError("correlation undefined on zero-variance input")
    pcc = float(stats.pearsonr(m, s)[0])
    srocc = float(stats.spearmanr(m, s)[0])
    rmse = float(np.sqrt(np.mean((m - s) ** 2)))
    return pcc, srocc, rmse


# --- pairwise significance and ROC analysis ---

class Significance(Enum):
    DIFFERENT = "different"
    SIMILAR = "similar"


class Direction(Enum):
    A_BETTER = "a_better"
    B_BETTER = "b_better"
    NONE = "none"


@dataclass(frozen=True)
class PairLabel:
    pair: tuple[str, str]
    significance: Significance
    direction: Direction


def welch_p_value(a, b) -> float:
    """Two-sided Welch t-test p-value with a defined zero-variance edge.

    When both panels have zero variance the t statistic is undefined; the
    label is then decided by the means alone (p = 0 if they differ, 1 if
    they are equal).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.var(ddof=1) == 0.0 and b.var(ddof=1) == 0.0:
        return 0.0 if a.mean() != b.mean() else 1.0
    return float(stats.ttest_ind(a, b, equal_var=False).pvalue)


def pair_same_config_different_hrt(manifest: DatasetManifest) -> list[tuple[str, str]]:
    """Default pairing: same source/baseline/rate-point, different trajectory."""
    groups: dict[tuple, list[ManifestEntry]] = {}
    for e in manifest.entries:
        groups.setdefault((e.src, e.hrc_baseline, e.hrc_rp), []).append(e)
    pairs = []
    for key in sorted(groups):
        members = groups[key]
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if members[i].hrt != members[j].hrt:
                    pairs.append((members[i].id, members[j].id))
    return pairs


def classify_pairs(
    manifest: DatasetManifest,
    pairing_rule=pair_same_config_different_hrt,
    alpha: float = 0.05,
) -> list[PairLabel]:
    """Label every pair Different/Similar from per-observer scores."""
    by_id = {e.id: e for e in manifest.entries}
    labels = []
    for id_a, id_b in pairing_rule(manifest):
        ea, eb = by_id[id_a], by_id[id_b]
        if ea.raw_scores is None or eb.raw_scores is None:
            raise MissingRawScoresError(
                f"pair ({id_a}, {id_b}) lacks per-observer raw scores"
            )
        p = welch_p_value(ea.raw_scores, eb.raw_scores)
        if p < alpha:
            direction = (
                Direction.A_BETTER
                if float(np.mean(ea.raw_scores)) > float(np.mean(eb.raw_scores))
                else Direction.B_BETTER
            )
            labels.append(PairLabel((id_a, id_b), Significance.DIFFERENT, direction))
        else:
            labels.append(PairLabel((id_a, id_b), Significance.SIMILAR, Direction.NONE))
    return labels


def _roc_auc(scores: np.ndarray, positive: np.ndarray) -> float:
    """Mann-Whitney AUC (average ranks on ties) of scores for the positive class."""
    ranks = stats.rankdata(scores)
    n1 = int(positive.sum())
    n0 = positive.size - n1
    u = float(ranks[positive].sum()) - n1 * (n1 + 1) / 2.0
    return u / (n1 * n0)


@dataclass(frozen=True)
class KrasulaResult:
    auc_ds: float | None
    auc_bw: float | None
    cc: float | None
    n_pairs: int
    n_different: int


def krasula_analysis(pairs: list[PairLabel], objective_scores: dict[str, float]) -> KrasulaResult:
    """Rank-based pairwise discrimination analysis.

    AUC-DS separates Different from Similar pairs by |delta|; AUC-BW and the
    correct-classification rate measure, over Different pairs only, how well
    the signed delta tracks the subjective direction. Categories with no
    pairs leave their statistics absent rather than zero.
    """
    if not pairs:
        return KrasulaResult(None, None, None, 0, 0)
    ids = sorted({i for p in pairs for i in p.pair})
    values = np.array([objective_scores[i] for i in ids], dtype=np.float64)
    rank_of = dict(zip(ids, stats.rankdata(values)))

    delta = np.array([rank_of[p.pair[0]] - rank_of[p.pair[1]] for p in pairs])
    different = np.array([p.significance is Significance.DIFFERENT for p in pairs])

    auc_ds = None
    if 0 < different.sum() < len(pairs):
        auc_ds = _roc_auc(np.abs(delta), different)

    auc_bw = None
    cc = None
    n_diff = int(different.sum())
    if n_diff:
        d_delta = delta[different]
        a_better = np.array(
            [p.direction is Direction.A_BETTER for p in pairs if p.significance is Significance.DIFFERENT]
        )
        if 0 < a_better.sum() < n_diff:
            auc_bw = _roc_auc(d_delta, a_better)
        # else: only one direction present, the ROC area is undefined
        correct = np.where(a_better, d_delta > 0, d_delta < 0)
        cc = float(np.mean(correct))
    return KrasulaResult(auc_ds=auc_ds, auc_bw=auc_bw, cc=cc, n_pairs=len(pairs), n_different=n_diff)


# --- top-level report ---

@dataclass(frozen=True)
class EvalReport:
    pcc: float
    srocc: float
    rmse: float
    logistic_params: tuple[float, float, float, float]
    auc_ds: float | None
    auc_bw: float | None
    cc: float | None
    n_pairs: int
    n_different: int

    def to_dict(self) -> dict:
        return {
            "pcc": self.pcc,
            "srocc": self.srocc,
            "rmse": self.rmse,
            "logistic_params": list(self.logistic_params),
            "auc_ds": self.auc_ds,
            "auc_bw": self.auc_bw,
            "cc": self.cc,
            "n_pairs": self.n_pairs,
            "n_different": self.n_different,
        }


def evaluate(
    manifest: DatasetManifest,
    objective_scores: dict[str, float],
    alpha: float = 0.05,
    pairing_rule=pair_same_config_different_hrt,
) -> EvalReport:
    """Full benchmark: logistic mapping, correlations, and pair analysis.

    The pair analysis consumes the mapped scores, so metric polarity follows
    the fitted mapping; it is skipped (fields left absent) when the manifest
    offers no pairable entries with raw observer scores.
    """
    missing = [e.id for e in manifest.entries if e.id not in objective_scores]
    if missing:
        raise ValueError(f"manifest ids without objective scores: {missing[:5]}")
    objective = [objective_scores[e.id] for e in manifest.entries]
    subjective = [e.mos for e in manifest.entries]

    mapped, params = logistic_fit(objective, subjective)
    pcc, srocc, rmse = correlation_stats(mapped, subjective)

    mapped_by_id = {e.id: float(m) for e, m in zip(manifest.entries, mapped)}
    pair_ids = pairing_rule(manifest)
    by_id = {e.id: e for e in manifest.entries}
    have_raw = all(
        by_id[a].raw_scores is not None and by_id[b].raw_scores is not None
        for a, b in pair_ids
    )
    if pair_ids and have_raw:
        labels = classify_pairs(manifest, pairing_rule, alpha)
        kr = krasula_analysis(labels, mapped_by_id)
    else:
        kr = KrasulaResult(None, None, None, 0, 0)

    return EvalReport(
        pcc=pcc,
        srocc=srocc,
        rmse=rmse,
        logistic_params=tuple(float(p) for p in params),
        auc_ds=kr.auc_ds,
        auc_bw=kr.auc_bw,
        cc=kr.cc,
        n_pairs=kr.n_pairs,
        n_different=kr.n_different,
    )


def format_report_table(report: EvalReport, label: str = "metric") -> str:
    """Aligned plain-text tables in the conventional benchmark layout."""
    def cell(v):
        return "  --  " if v is None else f"{v:.4f}"

    lines = [
        f"{'':12s} {'PCC':>8s} {'SCC':>8s} {'RMSE':>8s}",
        f"{label:12s} {report.pcc:8.4f} {report.srocc:8.4f} {report.rmse:8.4f}",
        "",
        f"{'':12s} {'AUC-DS':>8s} {'AUC-BW':>8s} {'CC':>8s}   (pairs: {report.n_pairs}, different: {report.n_different})",
        f"{label:12s} {cell(report.auc_ds):>8s} {cell(report.auc_bw):>8s} {cell(report.cc):>8s}",
    ]
    return "\n".join(lines)
