/**
 * Canvas overlay rendering: frame outline, parent and text boxes, gaze and
 * pointing markers, expanded plural regions. Structural context type so
 * tests can record draw calls without a real canvas.
 */

import { boxToCanvas, frameToCanvas, type ViewTransform } from "./coords.js";
import type { BBox, SceneFixture } from "./types.js";

export interface Canvas2D {
  strokeStyle: string;
  fillStyle: string;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  setLineDash(segments: number[]): void;
}

export interface OverlayLayers {
  parents: boolean;
  texts: boolean;
  gaze: boolean;
  pointing: boolean;
  pluralRegion: boolean;
}

export const DEFAULT_LAYERS: OverlayLayers = {
  parents: true,
  texts: true,
  gaze: true,
  pointing: true,
  pluralRegion: true,
};

export interface Markers {
  gaze?: { x: number; y: number };
  point?: { x: number; y: number };
}

const COLORS = {
  frame: "#888",
  object: "#2e7d32",
  face: "#7b1fa2",
  text: "#1565c0",
  gaze: "#ffffff",
  gazeRing: "#d32f2f",
  point: "#f9a825",
  region: "#ef6c00",
};

function labeledBox(ctx: Canvas2D, t: ViewTransform, box: BBox, label: string, color: string): void {
  const r = boxToCanvas(t, box);
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.setLineDash([]);
  ctx.strokeRect(r.x, r.y, r.w, r.h);
  ctx.fillStyle = color;
  ctx.font = "12px sans-serif";
  ctx.fillText(label, r.x + 3, r.y + 13);
}

export function drawScene(
  ctx: Canvas2D,
  canvasW: number,
  canvasH: number,
  fixture: SceneFixture | null,
  t: ViewTransform,
  markers: Markers,
  pluralRegions: BBox[],
  layers: OverlayLayers = DEFAULT_LAYERS,
): void {
  ctx.clearRect(0, 0, canvasW, canvasH);
  ctx.globalAlpha = 1;
  if (!fixture) return;

  const frameBox: BBox = [0, 0, fixture.frame.width, fixture.frame.height];
  const frameRect = boxToCanvas(t, frameBox);
  ctx.fillStyle = "#1e1e1e";
  ctx.fillRect(frameRect.x, frameRect.y, frameRect.w, frameRect.h);
  ctx.strokeStyle = COLORS.frame;
  ctx.lineWidth = 1;
  ctx.setLineDash([]);
  ctx.strokeRect(frameRect.x, frameRect.y, frameRect.w, frameRect.h);

  if (layers.parents) {
    for (const obj of fixture.objects ?? []) {
      labeledBox(ctx, t, obj.bbox, obj.label, COLORS.object);
    }
    for (const face of fixture.faces ?? []) {
      labeledBox(ctx, t, face.bbox, face.name, COLORS.face);
    }
  }
  if (layers.texts) {
    for (const text of fixture.texts ?? []) {
      labeledBox(ctx, t, text.bbox, text.text, COLORS.text);
    }
  }
  if (layers.pluralRegion) {
    for (const region of pluralRegions) {
      const r = boxToCanvas(t, region);
      ctx.strokeStyle = COLORS.region;
      ctx.lineWidth = 2;
      ctx.setLineDash([6, 4]);
      ctx.strokeRect(r.x, r.y, r.w, r.h);
      ctx.setLineDash([]);
    }
  }
  if (layers.gaze && markers.gaze) {
    const p = frameToCanvas(t, markers.gaze.x, markers.gaze.y);
    ctx.beginPath();
    ctx.arc(p.x, p.y, 7, 0, Math.PI * 2);
    ctx.fillStyle = COLORS.gaze;
    ctx.fill();
    ctx.beginPath();
    ctx.arc(p.x, p.y, 9, 0, Math.PI * 2);
    ctx.strokeStyle = COLORS.gazeRing;
    ctx.lineWidth = 2;
    ctx.stroke();
  }
  if (layers.pointing && markers.point) {
    const p = frameToCanvas(t, markers.point.x, markers.point.y);
    ctx.beginPath();
    ctx.moveTo(p.x - 9, p.y);
    ctx.lineTo(p.x + 9, p.y);
    ctx.moveTo(p.x, p.y - 9);
    ctx.lineTo(p.x, p.y + 9);
    ctx.strokeStyle = COLORS.point;
    ctx.lineWidth = 3;
    ctx.stroke();
  }
}

/** Expanded-region boxes recorded in a turn's trace evidence, if any. */
export function pluralRegionsFromTrace(trace: {
  resolutions?: { evidence?: Record<string, unknown> }[];
}): BBox[] {
  const regions: BBox[] = [];
  for (const resolution of trace.resolutions ?? []) {
    const recorded = resolution.evidence?.["regions"];
    if (Array.isArray(recorded)) {
      for (const entry of recorded) {
        const bbox = (entry as { bbox?: unknown }).bbox;
        if (Array.isArray(bbox) && bbox.length === 4) {
          regions.push(bbox as BBox);
        }
      }
    }
  }
  return regions;
}
