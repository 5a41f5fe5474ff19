"""Bounding-box features of a scan-path, the input to the decision tree.

Features are computed on the resampled path in raw canvas coordinates.
Scaling to the square and centering would erase exactly the start-point,
end-point, and bounding-box information these features rely on, so the
normalization pipeline is NOT applied here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .geometry import N_POINTS, RawTrace, as_path, resample

FEATURE_NAMES = (
    "start_x", "start_y", "end_x", "end_y", "bbox_area", "diag_len", "diag_slope",
)

MIN_SLOPE_WIDTH = 1.0  # px; clamp removes the vertical-path singularity


@dataclass(frozen=True)
class FeatureVector:
    start_x: float
    start_y: float
    end_x: float
    end_y: float
    bbox_area: float
    diag_len: float
    diag_slope: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values) -> "FeatureVector":
        vals = [float(v) for v in values]
        if len(vals) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} values, got {len(vals)}")
        return cls(*vals)


def extract_features(path) -> FeatureVector:
    """Start point, end point, and bounding-box shape of a path.

    diag_slope is bbox height over width with the width clamped to at least
    MIN_SLOPE_WIDTH, so it is non-negative and finite for vertical paths.
    """
    pts = as_path(path)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    w = float(hi[0] - lo[0])
    h = float(hi[1] - lo[1])
    return FeatureVector(
        start_x=float(pts[0, 0]),
        start_y=float(pts[0, 1]),
        end_x=float(pts[-1, 0]),
        end_y=float(pts[-1, 1]),
        bbox_area=w * h,
        diag_len=math.hypot(w, h),
        diag_slope=h / max(w, MIN_SLOPE_WIDTH),
    )


def trace_features(source, n_points: int = N_POINTS) -> FeatureVector:
    """Features of a trace or polyline after resampling in canvas coordinates."""
    pts = source.points if isinstance(source, RawTrace) else source
    return extract_features(resample(pts, n_points))


class BoundingBoxFeaturizer(TransformerMixin, BaseEstimator):
    """Transformer mapping traces/polylines to (m, 7) feature matrices."""

    def __init__(self, n_points: int = N_POINTS):
        self.n_points = n_points

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        if len(X) == 0:
            return np.empty((0, len(FEATURE_NAMES)))
        return np.stack([trace_features(x, self.n_points).as_array() for x in X])
