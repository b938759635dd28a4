"""Contour-token codebook: forest training, serialization, and inference.

The codebook is a random forest over channel features of 35x35 patches.
Training delegates to scikit-learn (Gini splits over bootstrap samples);
everything after training runs on this module's own flattened tree arrays,
so a codebook loaded from file behaves identically to a freshly trained one
with no scikit-learn involvement at inference time.

Inference produces a 151-component probability vector: components 1..150
average the leaf histograms across trees and the textureless component 151
is the complement 1 - sum(p_1..p_150), floored at zero and renormalized.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .channels import DEFAULT_FEATURE_CONFIG, FeatureConfig, crop_patch, patch_features
from .corpus import N_CLASSES, LabeledPatchCorpus
from .errors import (
    CorruptCodebookFileError,
    InvalidCodebookError,
    VersionMismatchError,
)
from .video_io import Frame

FORMAT_VERSION = 1

_FEATURE_CHUNK = 4096  # patches per feature-extraction chunk, bounds memory


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 25
    max_depth: int = 20
    min_leaf: int = 1
    feature_subsample: str | int | float = "sqrt"

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "feature_subsample": self.feature_subsample,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestConfig":
        return cls(
            n_trees=int(d["n_trees"]),
            max_depth=int(d["max_depth"]),
            min_leaf=int(d["min_leaf"]),
            feature_subsample=d["feature_subsample"],
        )


@dataclass
class Tree:
    """One decision tree as flat arrays.

    Internal node i tests feature[i] <= threshold[i]; child entries are
    either another internal node index, or -(leaf_index + 1) for a leaf.
    Children always carry a larger internal index than their parent, which
    rules out cycles. Leaves hold probability histograms over all 151
    classes, each summing to 1.
    """

    feature: np.ndarray    # (S,) int32
    threshold: np.ndarray  # (S,) float64
    left: np.ndarray       # (S,) int32
    right: np.ndarray      # (S,) int32
    leaves: np.ndarray     # (L, 151) float64


@dataclass
class STCodebook:
    trees: list[Tree]
    feature_config: FeatureConfig
    forest_config: ForestConfig
    train_seed: int
    n_classes: int = N_CLASSES
    version: int = FORMAT_VERSION

    def validate(self) -> None:
        if self.n_classes != N_CLASSES:
            raise InvalidCodebookError(f"n_classes must be {N_CLASSES}, got {self.n_classes}")
        if not self.trees:
            raise InvalidCodebookError("codebook has no trees")
        flen = self.feature_config.length
        for t_idx, t in enumerate(self.trees):
            n_splits = len(t.feature)
            n_leaves = len(t.leaves)
            if n_leaves == 0:
                raise InvalidCodebookError(f"tree {t_idx} has no leaves")
            if t.leaves.shape[1] != N_CLASSES:
                raise InvalidCodebookError(
                    f"tree {t_idx} leaf histograms have {t.leaves.shape[1]} bins, expected {N_CLASSES}"
                )
            sums = t.leaves.sum(axis=1)
            if not np.all(np.abs(sums - 1.0) < 1e-9):
                raise InvalidCodebookError(f"tree {t_idx} has a leaf histogram not summing to 1")
            if np.any(t.leaves < 0):
                raise InvalidCodebookError(f"tree {t_idx} has a negative leaf probability")
            if n_splits and (t.feature.min() < 0 or t.feature.max() >= flen):
                raise InvalidCodebookError(f"tree {t_idx} references a feature out of range")
            if not np.all(np.isfinite(t.threshold)):
                raise InvalidCodebookError(f"tree {t_idx} has a non-finite threshold")
            for child in (t.left, t.right):
                bad_leaf = child[child < 0]
                if bad_leaf.size and (-bad_leaf).max() > n_leaves:
                    raise InvalidCodebookError(f"tree {t_idx} references a missing leaf")
                internal = child[child >= 0]
                if internal.size and internal.max() >= n_splits:
                    raise InvalidCodebookError(f"tree {t_idx} references a missing split")
            order_ok = all(
                (t.left[i] < 0 or t.left[i] > i) and (t.right[i] < 0 or t.right[i] > i)
                for i in range(n_splits)
            )
            if not order_ok:
                raise InvalidCodebookError(f"tree {t_idx} has a child pointing at or before its parent")


def train_codebook(
    corpus: LabeledPatchCorpus,
    forest: ForestConfig = ForestConfig(),
    seed: int = 0,
    feature_config: FeatureConfig = DEFAULT_FEATURE_CONFIG,
) -> STCodebook:
    """Train a codebook on a labeled corpus, reproducibly for a given seed."""
    from sklearn.ensemble import RandomForestClassifier

    if forest.n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    corpus.require_min_per_class(2)

    X = np.empty((len(corpus), feature_config.length), dtype=np.float32)
    for lo in range(0, len(corpus), _FEATURE_CHUNK):
        hi = min(lo + _FEATURE_CHUNK, len(corpus))
        X[lo:hi] = patch_features(corpus.patches[lo:hi], feature_config)

    clf = RandomForestClassifier(
        n_estimators=forest.n_trees,
        criterion="gini",
        max_depth=forest.max_depth,
        min_samples_leaf=forest.min_leaf,
        max_features=forest.feature_subsample,
        bootstrap=True,
        random_state=seed,
        n_jobs=1,
    )
    clf.fit(X, corpus.labels)

    class_pos = {int(c): i for i, c in enumerate(clf.classes_)}
    col_order = [class_pos[c] for c in range(1, N_CLASSES + 1)]
    trees = [_flatten_sklearn_tree(est.tree_, col_order) for est in clf.estimators_]
    cb = STCodebook(
        trees=trees,
        feature_config=feature_config,
        forest_config=forest,
        train_seed=seed,
    )
    cb.validate()
    return cb


def _flatten_sklearn_tree(tree_, col_order) -> Tree:
    children_left = tree_.children_left
    children_right = tree_.children_right
    is_internal = children_left != -1

    internal_ids = np.full(tree_.node_count, -1, dtype=np.int64)
    leaf_ids = np.full(tree_.node_count, -1, dtype=np.int64)
    internal_ids[is_internal] = np.arange(int(is_internal.sum()))
    leaf_ids[~is_internal] = np.arange(int((~is_internal).sum()))

    def encode(node: int) -> int:
        if is_internal[node]:
            return int(internal_ids[node])
        return -(int(leaf_ids[node]) + 1)

    n_internal = int(is_internal.sum())
    feature = np.zeros(n_internal, dtype=np.int32)
    threshold = np.zeros(n_internal, dtype=np.float64)
    left = np.zeros(n_internal, dtype=np.int32)
    right = np.zeros(n_internal, dtype=np.int32)
    for node in np.flatnonzero(is_internal):
        i = internal_ids[node]
        feature[i] = tree_.feature[node]
        threshold[i] = tree_.threshold[node]
        left[i] = encode(children_left[node])
        right[i] = encode(children_right[node])

    raw = tree_.value[~is_internal, 0, :]  # per-leaf class weights
    hist = raw / raw.sum(axis=1, keepdims=True)
    leaves = hist[:, col_order].astype(np.float64)
    # renormalize after reordering so stored histograms sum to 1 exactly
    leaves /= leaves.sum(axis=1, keepdims=True)
    return Tree(feature=feature, threshold=threshold, left=left, right=right, leaves=leaves)


def _tree_leaf_rows(tree: Tree, X: np.ndarray) -> np.ndarray:
    """Leaf index reached by every sample, vectorized level by level."""
    n = X.shape[0]
    if len(tree.feature) == 0:
        return np.zeros(n, dtype=np.int64)
    node = np.zeros(n, dtype=np.int64)  # >= 0 internal, < 0 leaf-encoded
    while True:
        active = np.flatnonzero(node >= 0)
        if active.size == 0:
            break
        cur = node[active]
        go_left = X[active, tree.feature[cur]] <= tree.threshold[cur]
        node[active] = np.where(go_left, tree.left[cur], tree.right[cur])
    return -node - 1


def infer_vectors(codebook: STCodebook, features: np.ndarray) -> np.ndarray:
    """Token probability vectors for pre-extracted features, shape (K, 151).

    Per-tree leaf histograms are summed over a value-sorted axis so the
    result is invariant to the order trees are stored in.
    """
    X = np.ascontiguousarray(features, dtype=np.float32)
    if X.ndim == 1:
        X = X[None]
    stack = np.empty((len(codebook.trees), X.shape[0], N_CLASSES), dtype=np.float64)
    for t_idx, tree in enumerate(codebook.trees):
        stack[t_idx] = tree.leaves[_tree_leaf_rows(tree, X)]
    stack.sort(axis=0)
    avg = stack.sum(axis=0) / len(codebook.trees)

    contour = avg[:, : N_CLASSES - 1]
    no_contour = np.maximum(1.0 - contour.sum(axis=1), 0.0)
    vec = np.concatenate([contour, no_contour[:, None]], axis=1)
    vec /= vec.sum(axis=1, keepdims=True)
    return vec


def st_vector(codebook: STCodebook, frame: Frame, center: tuple[float, float]) -> np.ndarray:
    """151-component token probability vector for the patch around `center`."""
    patch = crop_patch(frame, center)
    feats = patch_features(patch, codebook.feature_config)
    return infer_vectors(codebook, feats)[0]


def st_vectors_for_patches(codebook: STCodebook, patches: np.ndarray) -> np.ndarray:
    """Token vectors for a (K, 35, 35) stack of patches."""
    return infer_vectors(codebook, patch_features(patches, codebook.feature_config))


def save_codebook(codebook: STCodebook, path) -> None:
    """Serialize to a deterministic JSON container."""
    codebook.validate()
    doc = {
        "version": codebook.version,
        "n_classes": codebook.n_classes,
        "feature_config": codebook.feature_config.to_dict(),
        "forest_config": codebook.forest_config.to_dict(),
        "train_seed": codebook.train_seed,
        "trees": [
            {
                "splits": [
                    [int(f), float(t), int(l), int(r)]
                    for f, t, l, r in zip(tree.feature, tree.threshold, tree.left, tree.right)
                ],
                "leaves": [[float(v) for v in row] for row in tree.leaves],
            }
            for tree in codebook.trees
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))


def load_codebook(path) -> STCodebook:
    """Read and validate a codebook file written by save_codebook."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptCodebookFileError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise CorruptCodebookFileError(f"{path}: not a codebook container")
    if doc["version"] != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: file version {doc['version']}, reader supports {FORMAT_VERSION}"
        )
    try:
        trees = []
        for td in doc["trees"]:
            splits = np.asarray(td["splits"], dtype=np.float64).reshape(-1, 4)
            leaves = np.asarray(td["leaves"], dtype=np.float64)
            if leaves.ndim != 2:
                raise InvalidCodebookError("leaf table is not two-dimensional")
            trees.append(
                Tree(
                    feature=splits[:, 0].astype(np.int32),
                    threshold=splits[:, 1].copy(),
                    left=splits[:, 2].astype(np.int32),
                    right=splits[:, 3].astype(np.int32),
                    leaves=leaves,
                )
            )
        cb = STCodebook(
            trees=trees,
            feature_config=FeatureConfig.from_dict(doc["feature_config"]),
            forest_config=ForestConfig.from_dict(doc["forest_config"]),
            train_seed=int(doc["train_seed"]),
            n_classes=int(doc["n_classes"]),
            version=int(doc["version"]),
        )
    except InvalidCodebookError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptCodebookFileError(f"{path}: malformed codebook: {exc}") from exc
    cb.validate()
    return cb
