"""Greedy binary decision tree over scan-path features, with k-fold
cross-validation.

Induction is top-down: at each node the (feature, threshold) pair minimizing
weighted Gini impurity is chosen, with candidate thresholds at midpoints
between consecutive distinct sorted feature values. Classification descends
left when feature < threshold. All tie-breaks are deterministic: features in
index order, thresholds ascending, leaf labels by sort order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Union

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import EmptyDataset, InvariantViolation, TooFewSamples
from .features import FEATURE_NAMES, FeatureVector
from .metrics import ConfusionMatrix
from .shapes import SHAPE_IDS

MAX_DEPTH = 12
MIN_LEAF = 1


@dataclass
class Leaf:
    label: str
    counts: dict[str, int]


@dataclass
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"


Node = Union[Leaf, Split]


@dataclass
class TreeModel:
    root: Node
    n_samples: int
    depth: int
    feature_names: tuple[str, ...] = FEATURE_NAMES


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with one shape label per row."""

    X: np.ndarray
    y: tuple[str, ...]
    source: str = "simulated"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = tuple(str(v) for v in self.y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2 or X.shape[1] != len(FEATURE_NAMES):
            raise EmptyDataset(
                f"feature matrix must be (m, {len(FEATURE_NAMES)}), got {X.shape}"
            )
        if X.shape[0] == 0:
            raise EmptyDataset("dataset is empty")
        if len(y) != X.shape[0]:
            raise EmptyDataset(f"{X.shape[0]} rows but {len(y)} labels")
        bad = sorted(set(y) - set(SHAPE_IDS))
        if bad:
            raise InvariantViolation(f"labels outside the shape ids: {bad}")

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=int)
        return LabeledDataset(self.X[idx], tuple(self.y[i] for i in idx), self.source)


def _majority(labels) -> tuple[str, dict[str, int]]:
    counts: dict[str, int] = {}
    for v in labels:
        counts[v] = counts.get(v, 0) + 1
    top = max(counts.values())
    label = min(k for k, c in counts.items() if c == top)
    return label, counts


def _best_split_on_feature(values, y_idx, n_classes, min_leaf):
    """Lowest-weighted-Gini threshold for one feature, or None."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    cls = y_idx[order]
    boundaries = np.nonzero(v[:-1] < v[1:])[0]
    if boundaries.size == 0:
        return None
    onehot = np.zeros((v.shape[0], n_classes))
    onehot[np.arange(v.shape[0]), cls] = 1.0
    cum = np.cumsum(onehot, axis=0)
    left = cum[boundaries]
    right = cum[-1] - left
    nl = (boundaries + 1).astype(float)
    nr = v.shape[0] - nl
    valid = (nl >= min_leaf) & (nr >= min_leaf)
    if not valid.any():
        return None
    gini_l = 1.0 - ((left / nl[:, None]) ** 2).sum(axis=1)
    gini_r = 1.0 - ((right / nr[:, None]) ** 2).sum(axis=1)
    weighted = (nl * gini_l + nr * gini_r) / v.shape[0]
    weighted[~valid] = np.inf
    j = int(np.argmin(weighted))  # first minimum: lowest threshold wins ties
    threshold = (v[boundaries[j]] + v[boundaries[j] + 1]) / 2.0
    return float(threshold), float(weighted[j])


def _grow(X, y, depth, max_depth, min_leaf, classes):
    label, counts = _majority(y)
    if len(counts) == 1 or depth >= max_depth or len(y) <= min_leaf:
        return Leaf(label, counts), depth
    y_idx = np.array([classes.index(v) for v in y])
    best = None
    for f in range(X.shape[1]):
        found = _best_split_on_feature(X[:, f], y_idx, len(classes), min_leaf)
        if found is None:
            continue
        threshold, weighted = found
        if best is None or weighted < best[2]:
            best = (f, threshold, weighted)
    # No impurity-gain floor: a mixed node splits whenever any valid
    # candidate exists (children are strictly smaller, so this terminates).
    if best is None:
        return Leaf(label, counts), depth
    f, threshold, _ = best
    mask = X[:, f] < threshold
    left, dl = _grow(X[mask], [v for v, m in zip(y, mask) if m],
                     depth + 1, max_depth, min_leaf, classes)
    right, dr = _grow(X[~mask], [v for v, m in zip(y, mask) if not m],
                      depth + 1, max_depth, min_leaf, classes)
    return Split(f, threshold, left, right), max(dl, dr)


def train_tree(data: LabeledDataset, max_depth: int = MAX_DEPTH,
               min_leaf: int = MIN_LEAF) -> TreeModel:
    """Fit a tree on a labeled dataset; fully deterministic for fixed input."""
    if len(data) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    classes = sorted(set(data.y))
    root, depth = _grow(data.X, list(data.y), 0, max_depth, min_leaf, classes)
    return TreeModel(root, n_samples=len(data), depth=depth)


def classify_tree(model: TreeModel, fv) -> str:
    """Descend the tree: left on feature < threshold, right otherwise."""
    values = fv.as_array() if isinstance(fv, FeatureVector) else np.asarray(fv, float)
    node = model.root
    while isinstance(node, Split):
        node = node.left if values[node.feature] < node.threshold else node.right
    return node.label


@dataclass(frozen=True)
class CVResult:
    accuracy: float
    confusion: ConfusionMatrix
    k: int
    seed: int


def cross_validate(data: LabeledDataset, k: int = 10, seed: int = 0,
                   max_depth: int = MAX_DEPTH, min_leaf: int = MIN_LEAF) -> CVResult:
    """Seeded near-stratified k-fold cross-validation of the tree.

    Samples of each class are shuffled and dealt round-robin into folds
    through a cursor shared across classes, so per-fold class counts differ
    by at most one. Deterministic for a fixed seed.
    """
    if k < 2:
        raise TooFewSamples(f"need at least 2 folds, got {k}")
    if len(data) < k:
        raise TooFewSamples(f"{len(data)} samples cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    cursor = 0
    for label in sorted(set(data.y)):
        idx = np.array([i for i, v in enumerate(data.y) if v == label])
        for i in rng.permutation(idx):
            folds[cursor % k].append(int(i))
            cursor += 1
    y_true: list[str] = []
    y_pred: list[str] = []
    for fold in folds:
        if not fold:
            continue
        test = sorted(fold)
        train = [i for i in range(len(data)) if i not in set(test)]
        model = train_tree(data.subset(train), max_depth, min_leaf)
        for i in test:
            y_true.append(data.y[i])
            y_pred.append(classify_tree(model, data.X[i]))
    confusion = ConfusionMatrix.from_pairs(y_true, y_pred)
    accuracy = float(np.mean([t == p for t, p in zip(y_true, y_pred)]))
    return CVResult(accuracy=accuracy, confusion=confusion, k=k, seed=seed)


def write_dataset_csv(data: LabeledDataset, file) -> None:
    with open(file, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(FEATURE_NAMES) + ["label"])
        for row, label in zip(data.X, data.y):
            writer.writerow([repr(float(v)) for v in row] + [label])


def read_dataset_csv(file) -> LabeledDataset:
    with open(file, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = list(FEATURE_NAMES) + ["label"]
        if header != expected:
            raise InvariantViolation(f"dataset header {header} != {expected}")
        rows, labels = [], []
        for row in reader:
            if not row:
                continue
            rows.append([float(v) for v in row[:-1]])
            labels.append(row[-1])
    if not rows:
        raise EmptyDataset(f"{file}: no data rows")
    return LabeledDataset(np.array(rows), tuple(labels), source="file")


def tree_to_doc(model: TreeModel) -> dict:
    def node_doc(node):
        if isinstance(node, Leaf):
            return {"label": node.label, "counts": dict(node.counts)}
        return {
            "feature": node.feature,
            "threshold": node.threshold,
            "left": node_doc(node.left),
            "right": node_doc(node.right),
        }

    return {
        "version": 1,
        "kind": "tree_model",
        "n_samples": model.n_samples,
        "depth": model.depth,
        "feature_names": list(model.feature_names),
        "root": node_doc(model.root),
    }


def tree_from_doc(doc: dict) -> TreeModel:
    def parse(node, depth):
        if not isinstance(node, dict):
            raise InvariantViolation("tree node must be an object")
        if "label" in node:
            if not node["label"]:
                raise InvariantViolation("leaf without a label")
            counts = {str(k): int(v) for k, v in node.get("counts", {}).items()}
            return Leaf(str(node["label"]), counts), depth
        for key in ("feature", "threshold", "left", "right"):
            if key not in node:
                raise InvariantViolation(f"internal node missing {key!r}")
        left, dl = parse(node["left"], depth + 1)
        right, dr = parse(node["right"], depth + 1)
        return Split(int(node["feature"]), float(node["threshold"]), left, right), max(dl, dr)

    try:
        root, depth = parse(doc["root"], 0)
        names = tuple(doc.get("feature_names", FEATURE_NAMES))
        return TreeModel(root, n_samples=int(doc.get("n_samples", 0)),
                         depth=depth, feature_names=names)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantViolation(f"bad tree document: {exc}") from exc


class CartClassifier(ClassifierMixin, BaseEstimator):
    """Scikit-learn style estimator over the tree above.

    Works on any numeric (m, d) feature matrix with string-sortable labels;
    pair it with BoundingBoxFeaturizer to classify scan-paths.
    """

    def __init__(self, max_depth: int = MAX_DEPTH, min_leaf: int = MIN_LEAF):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = [str(v) for v in y]
        if X.shape[0] == 0:
            raise EmptyDataset("cannot fit on an empty dataset")
        if X.shape[0] != len(y):
            raise ValueError(f"{X.shape[0]} rows but {len(y)} labels")
        classes = sorted(set(y))
        root, depth = _grow(X, y, 0, self.max_depth, self.min_leaf, classes)
        self.model_ = TreeModel(root, n_samples=X.shape[0], depth=depth,
                                feature_names=tuple(f"x{i}" for i in range(X.shape[1])))
        self.classes_ = np.array(classes)
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        return np.array([classify_tree(self.model_, row) for row in X])
