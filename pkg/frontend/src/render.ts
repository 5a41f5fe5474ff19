// Canvas drawing for the authentication frames. Every shape animates along
// its motion path every frame; intentionally nothing marks the followed one.

import type { Catalog, ShapeSpec } from "./catalogMath.js";
import { positionAt } from "./catalogMath.js";

// Structural subset of CanvasRenderingContext2D, so tests can pass a recorder.
export interface Draw2D {
    clearRect(x: number, y: number, w: number, h: number): void;
    save(): void;
    restore(): void;
    translate(x: number, y: number): void;
    beginPath(): void;
    moveTo(x: number, y: number): void;
    lineTo(x: number, y: number): void;
    stroke(): void;
    fillText(text: string, x: number, y: number): void;
    strokeStyle: string | CanvasGradient | CanvasPattern;
    fillStyle: string | CanvasGradient | CanvasPattern;
    lineWidth: number;
    font: string;
}

export const GLYPH_LINE_WIDTH = 2.5;

function drawGlyph(ctx: Draw2D, shape: ShapeSpec): void {
    ctx.beginPath();
    const [x0, y0] = shape.glyph[0]!;
    ctx.moveTo(x0, y0);
    for (let i = 1; i < shape.glyph.length; i++) {
        const [x, y] = shape.glyph[i]!;
        ctx.lineTo(x, y);
    }
    ctx.stroke();
}

/** Draw all 12 shapes at their positions for `elapsed` ms into the frame. */
export function renderFrame(ctx: Draw2D, catalog: Catalog, frameIndex: number,
                            elapsedMs: number): void {
    ctx.clearRect(0, 0, catalog.canvasW, catalog.canvasH);
    const u = Math.min(Math.max(elapsedMs / catalog.frameDurationMs, 0), 1);
    for (const shape of catalog.shapes) {
        const [x, y] = positionAt(shape, u);
        ctx.save();
        ctx.translate(x, y);
        ctx.strokeStyle = shape.color;
        ctx.lineWidth = GLYPH_LINE_WIDTH; // identical weight: no highlighting
        drawGlyph(ctx, shape);
        ctx.restore();
    }
    const remaining = Math.max(0, catalog.frameDurationMs - elapsedMs);
    ctx.fillStyle = "#e8e8e8";
    ctx.font = "16px system-ui, sans-serif";
    ctx.fillText(
        `frame ${frameIndex} / 3 — ${(remaining / 1000).toFixed(1)} s`,
        12, 24,
    );
}
