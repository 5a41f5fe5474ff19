"""Pure path geometry: the sampling, scaling, and centering stages applied to
gaze paths before recognition.

Paths are float arrays of shape (n, 2) in screen pixels. A normalized path has
exactly ``N_POINTS`` points, a ``SQUARE_SIZE`` x ``SQUARE_SIZE`` bounding box,
and its centroid at the origin. All functions are pure; values can be shared
freely across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DegenerateBBox, DegeneratePath, InsufficientSamples, ParseError

N_POINTS = 64
SQUARE_SIZE = 300.0
MIN_BBOX_DIM = 1.0  # paths thinner than this in either axis are rejected, not scaled
MIN_TRACE_SAMPLES = 32  # about one second of tracking at 30 Hz


def as_path(points) -> np.ndarray:
    """Coerce input to a float (n, 2) array and check basic validity."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DegeneratePath(f"expected points of shape (n, 2), got {pts.shape}")
    if pts.shape[0] < 2:
        raise DegeneratePath("path needs at least 2 points")
    if not np.isfinite(pts).all():
        raise DegeneratePath("path contains non-finite coordinates")
    return pts


def arc_positions(path: np.ndarray) -> np.ndarray:
    """Cumulative arc length at each vertex, starting at 0."""
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    return np.concatenate(([0.0], np.cumsum(seg)))


def path_length(path) -> float:
    return float(arc_positions(as_path(path))[-1])


def bounding_box(path) -> tuple[float, float, float, float]:
    """Axis-aligned bounding box as (min_x, min_y, width, height)."""
    pts = as_path(path)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return float(lo[0]), float(lo[1]), float(hi[0] - lo[0]), float(hi[1] - lo[1])


def centroid(path) -> np.ndarray:
    return as_path(path).mean(axis=0)


def resample(path, n: int = N_POINTS) -> np.ndarray:
    """Resample a polyline to ``n`` points spaced equally along its arc length.

    The first and last input points are preserved exactly. Raises
    DegeneratePath when all points coincide.
    """
    pts = as_path(path)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    cum = arc_positions(pts)
    total = cum[-1]
    if total <= 0.0:
        raise DegeneratePath("zero arc length: all points coincide")
    # Zero-length segments make interpolation positions ambiguous; drop them.
    keep = np.concatenate(([True], np.diff(cum) > 0.0))
    pts = pts[keep]
    cum = cum[keep]
    targets = np.linspace(0.0, total, n)
    out = np.column_stack(
        (np.interp(targets, cum, pts[:, 0]), np.interp(targets, cum, pts[:, 1]))
    )
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


def scale_to_square(path, size: float = SQUARE_SIZE, min_dim: float = MIN_BBOX_DIM) -> np.ndarray:
    """Scale independently along x and y so the bounding box becomes size x size.

    Scaling is non-uniform (aspect ratio is not preserved). Paths thinner than
    ``min_dim`` in either axis raise DegenerateBBox.
    """
    pts = as_path(path)
    extent = pts.max(axis=0) - pts.min(axis=0)
    if extent[0] < min_dim or extent[1] < min_dim:
        raise DegenerateBBox(
            f"bounding box {extent[0]:.3g} x {extent[1]:.3g} px is below the "
            f"{min_dim:g} px minimum in at least one axis"
        )
    return pts * (size / extent)


def translate_to_origin(path) -> np.ndarray:
    """Translate so the centroid (mean of points) lands on the origin."""
    pts = as_path(path)
    return pts - pts.mean(axis=0)


@dataclass(frozen=True)
class RawTrace:
    """Timestamped gaze or pointer samples captured during one frame.

    ``t`` holds milliseconds since frame start (non-decreasing), ``points``
    the matching (n, 2) screen coordinates. Timestamps are carried for replay
    and simulation only; recognition is purely spatial.
    """

    t: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "points", pts)
        if t.ndim != 1 or pts.ndim != 2 or pts.shape != (t.shape[0], 2):
            raise DegeneratePath(
                f"trace shape mismatch: t {t.shape}, points {pts.shape}"
            )
        if t.shape[0] < 2:
            raise DegeneratePath("trace needs at least 2 samples")
        if not (np.isfinite(t).all() and np.isfinite(pts).all()):
            raise DegeneratePath("trace contains non-finite values")
        if (t < 0).any() or (np.diff(t) < 0).any():
            raise DegeneratePath("timestamps must be non-negative and non-decreasing")

    @property
    def n_samples(self) -> int:
        return int(self.t.shape[0])

    @classmethod
    def from_samples(cls, samples) -> "RawTrace":
        """Build from an iterable of (t, x, y) triples."""
        arr = np.asarray(list(samples), dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise DegeneratePath("samples must be (t, x, y) triples")
        return cls(arr[:, 0], arr[:, 1:])


def normalize(source, n: int = N_POINTS, size: float = SQUARE_SIZE) -> np.ndarray:
    """Run the full pipeline: resample, scale to the square, center on origin.

    ``source`` is either a RawTrace (timestamps dropped; must carry at least
    MIN_TRACE_SAMPLES samples) or any point sequence acceptable to as_path.
    """
    if isinstance(source, RawTrace):
        if source.n_samples < MIN_TRACE_SAMPLES:
            raise InsufficientSamples(
                f"trace has {source.n_samples} samples, need >= {MIN_TRACE_SAMPLES}"
            )
        pts = source.points
    else:
        pts = source
    return translate_to_origin(scale_to_square(resample(pts, n), size))


def read_trace_jsonl(file) -> RawTrace:
    """Read one frame trace from a JSON Lines file of {"t","x","y"} objects."""
    rows = []
    with open(file, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rows.append((float(obj["t"]), float(obj["x"]), float(obj["y"])))
            except (ValueError, TypeError, KeyError) as exc:
                raise ParseError(f"{file}:{lineno}: bad trace sample: {exc}") from exc
    if len(rows) < 2:
        raise ParseError(f"{file}: trace has fewer than 2 samples")
    return RawTrace.from_samples(rows)


def write_trace_jsonl(trace: RawTrace, file) -> None:
    with open(file, "w", encoding="utf-8") as fh:
        for t, (x, y) in zip(trace.t, trace.points):
            fh.write(json.dumps({"t": t, "x": x, "y": y}) + "\n")


class PathNormalizer(TransformerMixin, BaseEstimator):
    """Stateless transformer applying the normalization pipeline to a batch.

    Input is a sequence of traces or point arrays; output is an
    (m, n_points * 2) array with rows x0, y0, x1, y1, ... so any downstream
    estimator can consume it. Set flatten=False for (m, n_points, 2).
    """

    def __init__(self, n_points: int = N_POINTS, square_size: float = SQUARE_SIZE,
                 flatten: bool = True):
        self.n_points = n_points
        self.square_size = square_size
        self.flatten = flatten

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        paths = [normalize(x, self.n_points, self.square_size) for x in X]
        out = np.stack(paths) if paths else np.empty((0, self.n_points, 2))
        if self.flatten:
            return out.reshape(len(paths), -1)
        return out
