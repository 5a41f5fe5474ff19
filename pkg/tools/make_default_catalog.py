#!/usr/bin/env python3
"""Generate src/gazeauth/data/default_catalog.json and audit it.

Motion paths are authored on a 1280x720 canvas with start points spread on a
rough 4x3 grid and twelve distinct silhouettes, so both the normalized-path
distances and the raw bounding-box features keep every pair of shapes apart.
Run with --check to audit an existing file without rewriting it.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gazeauth.catalog import MIN_SEPARATION, catalog_features, load_catalog, validate_catalog
from gazeauth.geometry import normalize, resample
from gazeauth.shapes import SHAPE_IDS, SHAPE_NAMES

OUT = Path(__file__).resolve().parents[1] / "src" / "gazeauth" / "data" / "default_catalog.json"

CANVAS = (1280.0, 720.0)
FRAME_MS = 4000.0

# Control vertices, one entry per shape. Archetypes are deliberately varied:
# corners in different orders, mirrored diagonals, arches, zigzags. Sharp
# corners are filleted below so a 30 Hz pursuit sample reproduces the path
# within the noiseless-closure tolerance; start points stay on a spread grid.
# Starts sit on a strict 4x3 grid (x: 80/460/840/1220, y: 80/400/680) so the
# start-point features keep every pair of shapes far apart even under jitter.
CONTROL_POINTS = {
    "a": [(80, 80), (520, 80), (520, 410)],                   # east, then south
    "b": [(460, 80), (460, 410), (900, 410)],                 # south, then east
    "c": [(840, 80), (940, 420), (1040, 80)],                 # V (down then up)
    "d": [(1220, 80), (1000, 240), (760, 380)],               # diagonal to SW, gentle kink
    "e": [(80, 400), (420, 400), (80, 600), (420, 600)],      # Z
    "f": [(460, 400), (460, 620), (800, 620), (800, 400)],    # U
    "g": [(840, 400), (840, 630), (440, 630)],                # south, then west
    "h": [(1220, 400), (1220, 630), (1080, 400), (1080, 630)],  # N zigzag, leftward
    "i": [(80, 680), (80, 530), (240, 530), (240, 380), (400, 380), (400, 230)],  # staircase up
    "j": [(460, 680), (630, 420), (800, 680)],                # arch (up then down)
    "k": [(840, 680), (1180, 680), (1180, 550), (840, 550), (840, 420), (1180, 420)],  # serpentine up
    "l": [(1220, 680), (1150, 470), (1080, 680), (1010, 470)],  # M zigzag, leftward
}

FILLET_RADIUS = 36.0
FILLET_MIN_TURN_DEG = 25.0
FILLET_STEP_DEG = 22.0


def fillet(points, radius=FILLET_RADIUS):
    """Round every sharp interior vertex with a quadratic Bezier arc.

    Keeps endpoints exact. The number of inserted points grows with the turn
    angle so every remaining corner is gentle enough for a 30 Hz pursuit
    sample to stay within the noiseless-closure tolerance.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    out = [pts[0]]
    for prev, v, nxt in zip(pts, pts[1:], pts[2:]):
        d_in = v - prev
        d_out = nxt - v
        len_in = float(np.linalg.norm(d_in))
        len_out = float(np.linalg.norm(d_out))
        cos_turn = float(np.dot(d_in, d_out) / (len_in * len_out))
        turn = math.degrees(math.acos(max(-1.0, min(1.0, cos_turn))))
        if turn < FILLET_MIN_TURN_DEG:
            out.append(v)
            continue
        r = min(radius, len_in / 3.0, len_out / 3.0)
        t1 = v - d_in / len_in * r
        t2 = v + d_out / len_out * r
        k = max(2, math.ceil(turn / FILLET_STEP_DEG) - 1)
        for t in np.linspace(0.0, 1.0, k + 2):
            out.append((1 - t) ** 2 * t1 + 2 * t * (1 - t) * v + t ** 2 * t2)
    out.append(pts[-1])
    return [(float(p[0]), float(p[1])) for p in out]


MOTIONS = {sid: fillet(CONTROL_POINTS[sid]) for sid in CONTROL_POINTS}

COLORS = {
    "a": "#e6194b", "b": "#3cb44b", "c": "#ffe119", "d": "#4363d8",
    "e": "#f58231", "f": "#911eb4", "g": "#46f0f0", "h": "#f032e6",
    "i": "#bcf60c", "j": "#ff9da7", "k": "#008080", "l": "#dcbeff",
}


def regular_polygon(k: int, r: float, phase: float = -math.pi / 2, closed: bool = True):
    angles = [phase + 2 * math.pi * i / k for i in range(k)]
    pts = [(r * math.cos(a), r * math.sin(a)) for a in angles]
    if closed:
        pts.append(pts[0])
    return pts


def star(points: int, r_out: float, r_in: float):
    pts = []
    for i in range(points * 2):
        r = r_out if i % 2 == 0 else r_in
        a = -math.pi / 2 + math.pi * i / points
        pts.append((r * math.cos(a), r * math.sin(a)))
    pts.append(pts[0])
    return pts


def lens(rx: float, ry: float, k: int = 16):
    top = [(rx * math.cos(a), -ry * math.sin(a)) for a in np.linspace(0, math.pi, k)]
    bottom = [(rx * math.cos(a), ry * math.sin(a)) for a in np.linspace(math.pi, 2 * math.pi, k)]
    return top + bottom[1:]


def pie(r: float, open_deg: float = 70.0, k: int = 18):
    half = math.radians(open_deg) / 2
    arc = np.linspace(half, 2 * math.pi - half, k)
    pts = [(0.0, 0.0)] + [(r * math.cos(a), r * math.sin(a)) for a in arc] + [(0.0, 0.0)]
    return pts


def ring(r_out: float, r_in: float, k: int = 20):
    outer = regular_polygon(k, r_out)
    inner = regular_polygon(k, r_in)
    return outer + inner + [outer[0]]


def rectangle(w: float, h: float, closed: bool = True, drop_last: bool = False):
    pts = [(-w / 2, -h / 2), (w / 2, -h / 2), (w / 2, h / 2), (-w / 2, h / 2)]
    if closed:
        pts.append(pts[0])
    if drop_last:
        pts = pts[:-1]
    return pts


GLYPHS = {
    "a": regular_polygon(24, 20),
    "b": regular_polygon(6, 20, closed=False),
    "c": regular_polygon(3, 22),
    "d": pie(20),
    "e": rectangle(36, 24),
    "f": lens(22, 11),
    "g": rectangle(36, 24, closed=True, drop_last=True),
    "h": ring(20, 11),
    "i": star(5, 22, 9),
    "j": regular_polygon(5, 20, closed=False),
    "k": regular_polygon(5, 20),
    "l": regular_polygon(6, 20),
}


def build_doc() -> dict:
    shapes = []
    for sid in SHAPE_IDS:
        motion = [[float(x), float(y)] for x, y in MOTIONS[sid]]
        shapes.append({
            "id": sid,
            "name": SHAPE_NAMES[sid],
            "color": COLORS[sid],
            "glyph": [[round(float(x), 3), round(float(y), 3)] for x, y in GLYPHS[sid]],
            "start": motion[0],
            "motion": motion,
        })
    return {
        "version": "1.0.0",
        "canvas": {"w": CANVAS[0], "h": CANVAS[1]},
        "frame_duration_ms": FRAME_MS,
        "shapes": shapes,
    }


def audit(catalog) -> bool:
    ok = True
    report = validate_catalog(catalog, MIN_SEPARATION)
    print(f"pairwise template distance: min {report.min_distance:.2f} px "
          f"at pair {report.min_pair} (threshold {report.threshold:.0f})")
    for a, b, d in report.pairs_below:
        print(f"  TOO CLOSE: {a}-{b} at {d:.2f} px")
        ok = False

    data = catalog_features(catalog)
    ranges = data.X.max(axis=0) - data.X.min(axis=0)
    worst = None
    for i, j in itertools.combinations(range(len(data)), 2):
        margins = np.abs(data.X[i] - data.X[j]) / ranges
        m = margins.max()
        if worst is None or m < worst[0]:
            worst = (m, data.y[i], data.y[j])
        if m < 0.05:
            print(f"  FEATURES TOO CLOSE: {data.y[i]}-{data.y[j]} best margin {m:.3f}")
            ok = False
    print(f"feature distinctness: worst pair {worst[1]}-{worst[2]} "
          f"margin {worst[0] * 100:.1f}% of feature range (need >= 5%)")

    from gazeauth.catalog import position_at
    worst_dev = 0.0
    worst_sim = 0.0
    n_30hz = int(round(catalog.plan.frame_duration_ms * 30.0 / 1000.0)) + 1
    for s in catalog.shapes:
        traced = position_at(s, np.linspace(0.0, 1.0, 64))
        dev = np.linalg.norm(resample(s.motion, 64) - traced, axis=1).max()
        worst_dev = max(worst_dev, dev)
        dense = position_at(s, np.linspace(0.0, 1.0, n_30hz))
        sim = np.linalg.norm(normalize(dense) - normalize(s.motion), axis=1).max()
        worst_sim = max(worst_sim, sim)
    print(f"position_at vs resampled template: worst point deviation {worst_dev:.2e} px "
          f"(need <= 1.5)")
    print(f"noiseless 30 Hz trace vs template after normalize: worst {worst_sim:.4f} px "
          f"(need <= 1.5)")
    ok = ok and worst_dev <= 1.5 and worst_sim <= 1.5
    return ok


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--check", action="store_true", help="audit the existing file only")
    args = parser.parse_args()

    if not args.check:
        doc = build_doc()
        OUT.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
        print(f"wrote {OUT}")
    catalog = load_catalog(OUT)
    ok = audit(catalog)
    print("audit:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
