"""Nearest-template classification of normalized scan-paths.

The distance between two paths is the mean of the pointwise Euclidean
distances at matching indices; there is no re-alignment, rotation search, or
elastic matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import LengthMismatch, MissingShape
from .geometry import N_POINTS, SQUARE_SIZE, normalize
from .shapes import SHAPE_IDS

REJECT_THRESHOLD = 75.0  # px; a quarter of the normalization square

REJECTED = "rejected"


def path_distance(candidate, template) -> float:
    """Mean index-aligned Euclidean distance between two equal-length paths."""
    c = np.asarray(candidate, dtype=float)
    t = np.asarray(template, dtype=float)
    if c.shape != t.shape:
        raise LengthMismatch(f"point counts differ: {c.shape} vs {t.shape}")
    return float(np.linalg.norm(c - t, axis=1).mean())


@dataclass(frozen=True)
class TemplateMatch:
    """Winning shape and its distance; absence (None) means rejection."""

    shape: str
    distance: float


@dataclass(frozen=True)
class TemplateSet:
    """Per-shape lists of normalized template paths.

    Every shape id must be present with at least one template, and every
    template must satisfy the normalized-path invariants (checked lightly
    here: shape (n, 2) with the configured point count).
    """

    templates: Mapping[str, Sequence[np.ndarray]]
    provenance: str = "default-catalog"
    owner: str = "global"
    n_points: int = N_POINTS

    def __post_init__(self):
        fixed = {}
        for sid in SHAPE_IDS:
            paths = self.templates.get(sid)
            if not paths:
                raise MissingShape([s for s in SHAPE_IDS if not self.templates.get(s)])
            rows = []
            for p in paths:
                arr = np.asarray(p, dtype=float)
                if arr.shape != (self.n_points, 2):
                    raise LengthMismatch(
                        f"template for shape {sid} has shape {arr.shape}, "
                        f"expected ({self.n_points}, 2)"
                    )
                rows.append(arr)
            fixed[sid] = tuple(rows)
        extra = set(self.templates) - set(SHAPE_IDS)
        if extra:
            raise LengthMismatch(f"unknown shape ids in template set: {sorted(extra)}")
        object.__setattr__(self, "templates", fixed)

    @cached_property
    def _flat(self) -> tuple[tuple[str, ...], tuple[np.ndarray, ...]]:
        labels: list[str] = []
        paths: list[np.ndarray] = []
        for sid in SHAPE_IDS:  # fixed order makes ties deterministic
            for p in self.templates[sid]:
                labels.append(sid)
                paths.append(p)
        return tuple(labels), tuple(paths)

    def count(self) -> int:
        return len(self._flat[0])


def classify_template(candidate, templates: TemplateSet,
                      reject_threshold: Optional[float] = REJECT_THRESHOLD,
                      ) -> Optional[TemplateMatch]:
    """Assign the shape whose template is nearest to the candidate path.

    Scans every template of every shape in shape-id order and keeps the
    strict minimum, so exact ties resolve to the earlier shape id. Returns
    None when the minimum distance exceeds ``reject_threshold``; pass
    reject_threshold=None to always assign the nearest shape.
    """
    cand = np.asarray(candidate, dtype=float)
    labels, paths = templates._flat
    best_label = labels[0]
    best = path_distance(cand, paths[0])
    for label, tpl in zip(labels[1:], paths[1:]):
        d = path_distance(cand, tpl)
        if d < best:
            best = d
            best_label = label
    if reject_threshold is not None and best > reject_threshold:
        return None
    return TemplateMatch(best_label, best)


def train_templates(traces_by_shape: Mapping[str, Sequence], owner: str,
                    base: Optional[TemplateSet] = None,
                    n_points: int = N_POINTS,
                    square_size: float = SQUARE_SIZE) -> TemplateSet:
    """Build a template set from captured traces, one or more per shape.

    Each trace (RawTrace or point array) is normalized and stored under its
    shape. All 12 shapes must be covered unless ``base`` provides the rest;
    with ``base`` given, new templates are appended to the base set instead
    of replacing it.
    """
    merged: dict[str, list[np.ndarray]] = {
        sid: list(base.templates[sid]) if base else [] for sid in SHAPE_IDS
    }
    missing = [sid for sid in SHAPE_IDS
               if not traces_by_shape.get(sid) and not merged[sid]]
    if missing:
        raise MissingShape(missing)
    for sid in SHAPE_IDS:
        for trace in traces_by_shape.get(sid, ()):
            try:
                merged[sid].append(normalize(trace, n_points, square_size))
            except Exception as exc:
                raise type(exc)(f"shape {sid}: {exc}") from exc
    return TemplateSet(merged, provenance="user-trained", owner=owner,
                       n_points=n_points)


class TemplateMatcher(ClassifierMixin, BaseEstimator):
    """Scikit-learn style wrapper around nearest-template classification.

    fit() normalizes each training path and stores it as a template for its
    label; predict() assigns the nearest template's label. With
    ``reject_threshold`` set, candidates farther than the threshold from every
    template predict the REJECTED sentinel.
    """

    def __init__(self, n_points: int = N_POINTS, square_size: float = SQUARE_SIZE,
                 reject_threshold: Optional[float] = None):
        self.n_points = n_points
        self.square_size = square_size
        self.reject_threshold = reject_threshold

    def fit(self, X, y):
        y = list(y)
        if len(y) != len(X):
            raise ValueError(f"got {len(X)} paths but {len(y)} labels")
        templates: dict[str, list[np.ndarray]] = {}
        for path, label in zip(X, y):
            templates.setdefault(str(label), []).append(
                normalize(path, self.n_points, self.square_size)
            )
        self.templates_ = {k: tuple(v) for k, v in templates.items()}
        self.classes_ = np.array(sorted(templates))
        return self

    def _match(self, path) -> TemplateMatch:
        cand = normalize(path, self.n_points, self.square_size)
        best_label, best = None, np.inf
        for label in sorted(self.templates_):
            for tpl in self.templates_[label]:
                d = path_distance(cand, tpl)
                if d < best:
                    best, best_label = d, label
        return TemplateMatch(best_label, best)

    def predict(self, X):
        labels = []
        for path in X:
            m = self._match(path)
            if self.reject_threshold is not None and m.distance > self.reject_threshold:
                labels.append(REJECTED)
            else:
                labels.append(m.shape)
        return np.array(labels)

    def predict_distance(self, X) -> list[TemplateMatch]:
        """Nearest match with its distance for each input, ignoring rejection."""
        return [self._match(path) for path in X]
