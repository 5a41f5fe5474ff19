"""The twelve moving shapes: glyphs for rendering, pre-defined motion paths,
and the three-frame animation plan.

The catalog is data, not code. A canonical catalog ships with the package;
alternate catalogs can be loaded from JSON documents with the same schema.
Glyphs are cosmetic; recognition uses motion paths exclusively.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, ParseError, RangeError
from .features import trace_features
from .geometry import as_path, normalize
from .matching import TemplateSet, path_distance
from .shapes import SHAPE_IDS
from .tree import LabeledDataset, TreeModel, train_tree

MIN_MOTION_EXTENT = 50.0  # px; keeps per-axis scaling well-conditioned
MIN_SEPARATION = 40.0  # px; default pairwise template-distance floor

_COLOR_RE = re.compile(r"^#[0-9a-fA-F]{6}$")


@dataclass(frozen=True)
class ShapeSpec:
    """One shape: identity, outline glyph, color, and canvas motion path."""

    id: str
    name: str
    color: str
    glyph: np.ndarray  # outline in local coordinates, (k, 2)
    start: np.ndarray  # canvas position, (2,)
    motion: np.ndarray  # movement waypoints in canvas coordinates, (m, 2)

    def __post_init__(self):
        object.__setattr__(self, "glyph", np.asarray(self.glyph, dtype=float))
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "motion", np.asarray(self.motion, dtype=float))

    @cached_property
    def _arc(self) -> tuple[np.ndarray, np.ndarray]:
        pts = self.motion
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        cum = np.concatenate(([0.0], np.cumsum(seg)))
        return pts, cum

    @property
    def arc_length(self) -> float:
        return float(self._arc[1][-1])


@dataclass(frozen=True)
class FramePlan:
    """Timing of the three authentication frames (constant-speed traversal)."""

    frame_count: int = 3
    frame_duration_ms: float = 4000.0
    canvas_w: float = 1280.0
    canvas_h: float = 720.0

    def __post_init__(self):
        if self.frame_count != 3:
            raise InvariantViolation(f"frame_count must be 3, got {self.frame_count}")
        if self.frame_duration_ms <= 0:
            raise InvariantViolation("frame_duration_ms must be positive")


@dataclass(frozen=True)
class Catalog:
    shapes: tuple[ShapeSpec, ...]
    plan: FramePlan
    version: str

    def shape(self, sid: str) -> ShapeSpec:
        for s in self.shapes:
            if s.id == sid:
                return s
        raise KeyError(f"no shape {sid!r} in catalog")


def position_at(shape: ShapeSpec, u) -> np.ndarray:
    """Point at arc-length fraction ``u`` along the motion path.

    Constant speed: u=0 is the start waypoint, u=1 the last. Accepts a scalar
    or an array of fractions; raises RangeError outside [0, 1].
    """
    u_arr = np.asarray(u, dtype=float)
    if (u_arr < 0).any() or (u_arr > 1).any():
        raise RangeError(f"u must lie in [0, 1], got {u!r}")
    pts, cum = shape._arc
    targets = u_arr * cum[-1]
    x = np.interp(targets, cum, pts[:, 0])
    y = np.interp(targets, cum, pts[:, 1])
    out = np.stack([x, y], axis=-1)
    return out


def _shape_from_doc(doc: dict, plan: FramePlan) -> ShapeSpec:
    for key in ("id", "name", "color", "glyph", "start", "motion"):
        if key not in doc:
            raise ParseError(f"shape document missing {key!r}")
    sid = doc["id"]
    spec = ShapeSpec(
        id=sid,
        name=str(doc["name"]),
        color=str(doc["color"]),
        glyph=doc["glyph"],
        start=doc["start"],
        motion=doc["motion"],
    )
    if sid not in SHAPE_IDS:
        raise InvariantViolation(f"shape {sid!r}: unknown id")
    if not _COLOR_RE.match(spec.color):
        raise InvariantViolation(f"shape {sid}: color {spec.color!r} is not #rrggbb")
    if spec.glyph.ndim != 2 or spec.glyph.shape[1] != 2 or spec.glyph.shape[0] < 2:
        raise InvariantViolation(f"shape {sid}: glyph must be (k>=2, 2) points")
    if spec.start.shape != (2,):
        raise InvariantViolation(f"shape {sid}: start must be an [x, y] pair")
    try:
        motion = as_path(spec.motion)
    except Exception as exc:
        raise InvariantViolation(f"shape {sid}: bad motion path: {exc}") from exc
    if not np.allclose(motion[0], spec.start, atol=1e-9):
        raise InvariantViolation(f"shape {sid}: motion must begin at start")
    if spec.arc_length <= 0:
        raise InvariantViolation(f"shape {sid}: motion has zero arc length")
    lo = motion.min(axis=0)
    hi = motion.max(axis=0)
    if lo[0] < 0 or lo[1] < 0 or hi[0] > plan.canvas_w or hi[1] > plan.canvas_h:
        raise InvariantViolation(f"shape {sid}: motion leaves the canvas")
    extent = hi - lo
    if extent[0] < MIN_MOTION_EXTENT or extent[1] < MIN_MOTION_EXTENT:
        raise InvariantViolation(
            f"shape {sid}: motion bounding box {extent[0]:.0f}x{extent[1]:.0f} is "
            f"thinner than {MIN_MOTION_EXTENT:.0f} px"
        )
    return spec


def load_catalog(source) -> Catalog:
    """Parse and validate a catalog document (dict, JSON text, or file path)."""
    if isinstance(source, Path) or (
        isinstance(source, str) and not source.lstrip().startswith("{")
    ):
        try:
            source = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read catalog {source}: {exc}") from exc
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"catalog is not valid JSON: {exc}") from exc
    if not isinstance(source, dict):
        raise ParseError(f"catalog document must be an object, got {type(source)}")
    for key in ("version", "canvas", "frame_duration_ms", "shapes"):
        if key not in source:
            raise ParseError(f"catalog document missing {key!r}")
    try:
        plan = FramePlan(
            frame_duration_ms=float(source["frame_duration_ms"]),
            canvas_w=float(source["canvas"]["w"]),
            canvas_h=float(source["canvas"]["h"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad canvas/frame timing: {exc}") from exc
    shapes = [_shape_from_doc(doc, plan) for doc in source["shapes"]]
    seen = [s.id for s in shapes]
    if sorted(seen) != sorted(SHAPE_IDS):
        dup = sorted({sid for sid in seen if seen.count(sid) > 1})
        missing = sorted(set(SHAPE_IDS) - set(seen))
        raise InvariantViolation(
            f"catalog must contain each of the 12 shapes exactly once "
            f"(duplicates: {dup or 'none'}, missing: {missing or 'none'})"
        )
    shapes.sort(key=lambda s: s.id)
    return Catalog(shapes=tuple(shapes), plan=plan, version=str(source["version"]))


def catalog_to_doc(catalog: Catalog) -> dict:
    return {
        "version": catalog.version,
        "canvas": {"w": catalog.plan.canvas_w, "h": catalog.plan.canvas_h},
        "frame_duration_ms": catalog.plan.frame_duration_ms,
        "shapes": [
            {
                "id": s.id,
                "name": s.name,
                "color": s.color,
                "glyph": s.glyph.tolist(),
                "start": s.start.tolist(),
                "motion": s.motion.tolist(),
            }
            for s in catalog.shapes
        ],
    }


def default_catalog_path() -> Path:
    return Path(str(resources.files("gazeauth.data") / "default_catalog.json"))


def load_default_catalog() -> Catalog:
    return load_catalog(default_catalog_path())


def template_set(catalog: Catalog) -> TemplateSet:
    """Default templates: each shape's motion path, normalized."""
    return TemplateSet(
        {s.id: [normalize(s.motion)] for s in catalog.shapes},
        provenance="default-catalog",
        owner="global",
    )


def catalog_features(catalog: Catalog) -> LabeledDataset:
    """Noiseless feature vectors of the 12 motion paths, one per shape."""
    rows = [trace_features(s.motion).as_array() for s in catalog.shapes]
    return LabeledDataset(np.stack(rows), tuple(s.id for s in catalog.shapes),
                          source="catalog")


def default_tree(catalog: Catalog) -> TreeModel:
    """Tree trained on the catalog's own noiseless feature vectors."""
    return train_tree(catalog_features(catalog))


@dataclass(frozen=True)
class SeparationReport:
    """Pairwise template-distance audit of a catalog."""

    min_distance: float
    min_pair: tuple[str, str]
    pairs_below: tuple[tuple[str, str, float], ...]
    threshold: float

    @property
    def ok(self) -> bool:
        return not self.pairs_below


def validate_catalog(catalog: Catalog, min_separation: float = MIN_SEPARATION,
                     ) -> SeparationReport:
    """Check that all normalized motion paths are mutually distinguishable.

    Computes the template distance between every pair of shapes and reports
    the minimum and all pairs below ``min_separation``. Report-only: never
    raises for close pairs.
    """
    normed = {s.id: normalize(s.motion) for s in catalog.shapes}
    min_d = np.inf
    min_pair = ("", "")
    below = []
    for i, a in enumerate(SHAPE_IDS):
        for b in SHAPE_IDS[i + 1:]:
            d = path_distance(normed[a], normed[b])
            if d < min_d:
                min_d = d
                min_pair = (a, b)
            if d < min_separation:
                below.append((a, b, d))
    return SeparationReport(
        min_distance=float(min_d),
        min_pair=min_pair,
        pairs_below=tuple(below),
        threshold=min_separation,
    )
