// Shape catalog parsing and the constant-speed position math. This must stay
// in lockstep with the server: the canvas animates locally from the catalog
// the service hands out at connect time, and the server classifies what the
// pointer actually followed.

import type { ShapeId } from "./protocol.js";
import { SHAPE_IDS } from "./protocol.js";

export type Point = [number, number];

export interface ShapeSpec {
    id: ShapeId;
    name: string;
    color: string;
    glyph: Point[];
    start: Point;
    motion: Point[];
    cumLengths: number[];
    arcLength: number;
}

export interface Catalog {
    version: string;
    canvasW: number;
    canvasH: number;
    frameDurationMs: number;
    shapes: ShapeSpec[];
}

function asPoint(value: unknown): Point {
    if (!Array.isArray(value) || value.length !== 2 ||
        typeof value[0] !== "number" || typeof value[1] !== "number") {
        throw new Error("expected an [x, y] pair");
    }
    return [value[0], value[1]];
}

export function cumulativeLengths(points: Point[]): number[] {
    const out = [0];
    for (let i = 1; i < points.length; i++) {
        const [ax, ay] = points[i - 1]!;
        const [bx, by] = points[i]!;
        out.push(out[i - 1]! + Math.hypot(bx - ax, by - ay));
    }
    return out;
}

export function parseCatalog(doc: unknown): Catalog {
    if (typeof doc !== "object" || doc === null) {
        throw new Error("catalog document must be an object");
    }
    const root = doc as Record<string, unknown>;
    const canvas = root.canvas as Record<string, unknown> | undefined;
    if (!canvas || typeof canvas.w !== "number" || typeof canvas.h !== "number") {
        throw new Error("catalog is missing canvas dimensions");
    }
    if (typeof root.frame_duration_ms !== "number" || !Array.isArray(root.shapes)) {
        throw new Error("catalog is missing frame timing or shapes");
    }
    const shapes: ShapeSpec[] = root.shapes.map((raw) => {
        const s = raw as Record<string, unknown>;
        const id = s.id as ShapeId;
        if (!SHAPE_IDS.includes(id)) {
            throw new Error(`unknown shape id ${String(s.id)}`);
        }
        const motion = (s.motion as unknown[]).map(asPoint);
        if (motion.length < 2) {
            throw new Error(`shape ${id}: motion needs at least 2 points`);
        }
        const cumLengths = cumulativeLengths(motion);
        return {
            id,
            name: String(s.name),
            color: String(s.color),
            glyph: (s.glyph as unknown[]).map(asPoint),
            start: asPoint(s.start),
            motion,
            cumLengths,
            arcLength: cumLengths[cumLengths.length - 1]!,
        };
    });
    if (shapes.length !== 12) {
        throw new Error(`catalog must carry 12 shapes, got ${shapes.length}`);
    }
    return {
        version: String(root.version),
        canvasW: canvas.w,
        canvasH: canvas.h,
        frameDurationMs: root.frame_duration_ms,
        shapes,
    };
}

/** Point at arc-length fraction u (constant speed along the motion path). */
export function positionAt(shape: ShapeSpec, u: number): Point {
    if (u < 0 || u > 1 || Number.isNaN(u)) {
        throw new RangeError(`u must lie in [0, 1], got ${u}`);
    }
    const target = u * shape.arcLength;
    const cum = shape.cumLengths;
    let hi = 1;
    while (hi < cum.length - 1 && cum[hi]! < target) hi++;
    const lo = hi - 1;
    const span = cum[hi]! - cum[lo]!;
    const t = span > 0 ? (target - cum[lo]!) / span : 0;
    const [ax, ay] = shape.motion[lo]!;
    const [bx, by] = shape.motion[hi]!;
    return [ax + t * (bx - ax), ay + t * (by - ay)];
}
