/**
 * Canvas <-> frame pixel mapping.
 *
 * The scene renders letterboxed inside the canvas: one uniform scale, the
 * frame centered. All resolution math happens server-side in frame pixels,
 * so the only client job is mapping clicks in and boxes out without losing
 * more than a pixel to scaling.
 */

import type { BBox } from "./types.js";

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function fitTransform(
  frameW: number,
  frameH: number,
  canvasW: number,
  canvasH: number,
): ViewTransform {
  const scale = Math.min(canvasW / frameW, canvasH / frameH);
  return {
    scale,
    offsetX: (canvasW - frameW * scale) / 2,
    offsetY: (canvasH - frameH * scale) / 2,
  };
}

export function frameToCanvas(t: ViewTransform, x: number, y: number): { x: number; y: number } {
  return { x: t.offsetX + x * t.scale, y: t.offsetY + y * t.scale };
}

export function canvasToFrame(t: ViewTransform, x: number, y: number): { x: number; y: number } {
  return { x: (x - t.offsetX) / t.scale, y: (y - t.offsetY) / t.scale };
}

export function boxToCanvas(t: ViewTransform, box: BBox): { x: number; y: number; w: number; h: number } {
  const tl = frameToCanvas(t, box[0], box[1]);
  const br = frameToCanvas(t, box[2], box[3]);
  return { x: tl.x, y: tl.y, w: br.x - tl.x, h: br.y - tl.y };
}

/** Clamp a frame-space point into the frame; flags whether clamping moved it. */
export function clampToFrame(
  x: number,
  y: number,
  frameW: number,
  frameH: number,
): { x: number; y: number; clamped: boolean } {
  const cx = Math.min(Math.max(x, 0), frameW - 1);
  const cy = Math.min(Math.max(y, 0), frameH - 1);
  return { x: cx, y: cy, clamped: cx !== x || cy !== y };
}

/** Round-trip error in frame pixels for a given transform (used by tests). */
export function roundTripError(t: ViewTransform, x: number, y: number): number {
  const c = frameToCanvas(t, x, y);
  const back = canvasToFrame(t, c.x, c.y);
  return Math.max(Math.abs(back.x - x), Math.abs(back.y - y));
}
