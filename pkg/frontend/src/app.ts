/**
 * Playground wiring: load a scene fixture, click to place gaze (shift-click
 * or the channel toggle for pointing), submit queries, inspect answer,
 * trace tree, history, and stage timings. Pure client of the session API;
 * one in-flight turn at a time.
 */

import { ApiError, SessionClient } from "./api.js";
import { canvasToFrame, clampToFrame, fitTransform, type ViewTransform } from "./coords.js";
import { DEFAULT_LAYERS, drawScene, pluralRegionsFromTrace, type Canvas2D, type OverlayLayers } from "./overlay.js";
import { buildTraceTree, type TraceNode } from "./trace.js";
import type { BBox, SceneFixture, TurnResult } from "./types.js";

interface AppState {
  client: SessionClient | null;
  fixture: SceneFixture | null;
  transform: ViewTransform | null;
  gaze: { x: number; y: number } | null;
  point: { x: number; y: number } | null;
  channel: "gaze" | "point";
  mode: "v1" | "v2";
  layers: OverlayLayers;
  pluralRegions: BBox[];
  busy: boolean;
}

const state: AppState = {
  client: null,
  fixture: null,
  transform: null,
  gaze: null,
  point: null,
  channel: "gaze",
  mode: "v1",
  layers: { ...DEFAULT_LAYERS },
  pluralRegions: [],
  busy: false,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(text: string, isError = false): void {
  const status = el<HTMLDivElement>("status");
  status.textContent = text;
  status.className = isError ? "status error" : "status";
}

function redraw(): void {
  const canvas = el<HTMLCanvasElement>("scene");
  const ctx = canvas.getContext("2d") as unknown as Canvas2D | null;
  if (!ctx || !state.transform) return;
  drawScene(
    ctx,
    canvas.width,
    canvas.height,
    state.fixture,
    state.transform,
    { gaze: state.gaze ?? undefined, point: state.point ?? undefined },
    state.pluralRegions,
    state.layers,
  );
  const coords = el<HTMLSpanElement>("coords");
  const gazeText = state.gaze ? `gaze (${state.gaze.x.toFixed(0)}, ${state.gaze.y.toFixed(0)})` : "gaze unset";
  const pointText = state.point ? ` | point (${state.point.x.toFixed(0)}, ${state.point.y.toFixed(0)})` : "";
  coords.textContent = gazeText + pointText;
  updateSubmitState();
}

function updateSubmitState(): void {
  const submit = el<HTMLButtonElement>("submit");
  const ready = Boolean(state.client?.id && state.fixture && state.gaze && !state.busy);
  submit.disabled = !ready;
  el<HTMLSpanElement>("hint").textContent = state.gaze
    ? ""
    : "click the scene to place gaze before submitting";
}

function loadFixture(fixture: SceneFixture): void {
  state.fixture = fixture;
  state.gaze = null;
  state.point = null;
  state.pluralRegions = [];
  const canvas = el<HTMLCanvasElement>("scene");
  state.transform = fitTransform(fixture.frame.width, fixture.frame.height, canvas.width, canvas.height);
  setStatus(`scene loaded: ${fixture.frame.width}x${fixture.frame.height}, `
    + `${fixture.objects?.length ?? 0} objects, ${fixture.faces?.length ?? 0} faces, `
    + `${fixture.texts?.length ?? 0} texts`);
  redraw();
}

function onCanvasClick(event: MouseEvent): void {
  if (!state.fixture || !state.transform) return;
  const canvas = el<HTMLCanvasElement>("scene");
  const rect = canvas.getBoundingClientRect();
  const cx = ((event.clientX - rect.left) / rect.width) * canvas.width;
  const cy = ((event.clientY - rect.top) / rect.height) * canvas.height;
  const frame = canvasToFrame(state.transform, cx, cy);
  const { x, y, clamped } = clampToFrame(
    frame.x,
    frame.y,
    state.fixture.frame.width,
    state.fixture.frame.height,
  );
  const channel = event.shiftKey ? "point" : state.channel;
  if (channel === "point") {
    state.point = { x, y };
  } else {
    state.gaze = { x, y };
  }
  if (clamped) setStatus("click fell outside the frame; clamped to the edge", true);
  else setStatus(`${channel} placed`);
  redraw();
}

function renderTraceTree(root: TraceNode): void {
  const container = el<HTMLDivElement>("trace");
  container.innerHTML = "";
  container.appendChild(nodeElement(root, true));
}

function nodeElement(node: TraceNode, isRoot: boolean): HTMLElement {
  if (node.children.length === 0) {
    const row = document.createElement("div");
    row.className = "trace-leaf";
    row.textContent = node.detail ? `${node.label}: ${node.detail}` : node.label;
    return row;
  }
  const details = document.createElement("details");
  if (isRoot) details.open = false; // collapsed: answer + explanation only
  const summary = document.createElement("summary");
  summary.textContent = node.detail ? `${node.label} — ${node.detail}` : node.label;
  details.appendChild(summary);
  for (const child of node.children) {
    details.appendChild(nodeElement(child, false));
  }
  return details;
}

function renderTimings(result: TurnResult): void {
  const bar = el<HTMLDivElement>("timings");
  bar.innerHTML = "";
  const total = result.timings.reduce((acc, t) => acc + t.elapsed_ms, 0) || 1;
  for (const timing of result.timings) {
    const segment = document.createElement("div");
    segment.className = `segment ${timing.stage}`;
    segment.style.width = `${Math.max(2, (timing.elapsed_ms / total) * 100)}%`;
    segment.title = `${timing.stage}: ${timing.elapsed_ms.toFixed(1)} ms`;
    segment.textContent = timing.stage;
    bar.appendChild(segment);
  }
  el<HTMLSpanElement>("total-ms").textContent = `${total.toFixed(1)} ms total`;
}

async function renderHistory(): Promise<void> {
  if (!state.client) return;
  const list = el<HTMLUListElement>("history");
  const pairs = await state.client.history();
  list.innerHTML = "";
  for (const pair of pairs) {
    const item = document.createElement("li");
    item.textContent = `Q: ${pair.query} — A: ${pair.answer}`;
    list.appendChild(item);
  }
}

async function submitQuery(): Promise<void> {
  if (!state.client || !state.fixture || !state.gaze || state.busy) return;
  const query = el<HTMLInputElement>("query").value.trim();
  if (!query) {
    setStatus("type a query first", true);
    return;
  }
  state.busy = true;
  updateSubmitState();
  setStatus("running turn...");
  try {
    const result = await state.client.query({
      text: query,
      scene: state.fixture,
      gaze_px: [state.gaze.x, state.gaze.y],
      point_px: state.point ? [state.point.x, state.point.y] : null,
      mode: state.mode,
    });
    el<HTMLDivElement>("answer").textContent = result.answer;
    el<HTMLDivElement>("answer").className = result.fallback ? "answer fallback" : "answer";
    el<HTMLDivElement>("explanation").textContent = result.explanation ?? "";
    renderTraceTree(buildTraceTree(result));
    renderTimings(result);
    state.pluralRegions = pluralRegionsFromTrace(result.trace);
    await renderHistory();
    setStatus(result.fallback ? "turn finished with the fallback reply" : "turn finished");
  } catch (err) {
    const detail = err instanceof ApiError ? err.message : String(err);
    setStatus(`turn failed: ${detail}`, true);
  } finally {
    state.busy = false;
    redraw();
  }
}

async function connect(): Promise<void> {
  const baseUrl = el<HTMLInputElement>("base-url").value.replace(/\/$/, "");
  const client = new SessionClient(baseUrl);
  if (!(await client.healthy())) {
    setStatus(`service unreachable at ${baseUrl}`, true);
    return;
  }
  await client.createSession(state.mode);
  state.client = client;
  setStatus(`connected; session ${client.id}`);
  el<HTMLUListElement>("history").innerHTML = "";
  updateSubmitState();
}

async function loadFixtureFromFile(file: File): Promise<void> {
  const text = await file.text();
  try {
    loadFixture(JSON.parse(text) as SceneFixture);
  } catch (err) {
    setStatus(`could not parse fixture: ${String(err)}`, true);
  }
}

export function initApp(): void {
  el<HTMLCanvasElement>("scene").addEventListener("click", onCanvasClick);
  el<HTMLButtonElement>("connect").addEventListener("click", () => void connect());
  el<HTMLButtonElement>("submit").addEventListener("click", () => void submitQuery());
  el<HTMLInputElement>("query").addEventListener("keydown", (e) => {
    if (e.key === "Enter") void submitQuery();
  });
  el<HTMLInputElement>("fixture-file").addEventListener("change", (e) => {
    const input = e.target as HTMLInputElement;
    if (input.files && input.files[0]) void loadFixtureFromFile(input.files[0]);
  });
  for (const mode of ["v1", "v2"] as const) {
    el<HTMLInputElement>(`mode-${mode}`).addEventListener("change", () => {
      state.mode = mode;
      // A new session keeps mode and history consistent server-side.
      void connect();
    });
  }
  for (const channel of ["gaze", "point"] as const) {
    el<HTMLInputElement>(`channel-${channel}`).addEventListener("change", () => {
      state.channel = channel;
    });
  }
  for (const layer of Object.keys(DEFAULT_LAYERS) as (keyof OverlayLayers)[]) {
    const box = document.getElementById(`layer-${layer}`) as HTMLInputElement | null;
    box?.addEventListener("change", () => {
      state.layers[layer] = box.checked;
      redraw();
    });
  }
  updateSubmitState();
  setStatus("connect to a service and load a scene fixture to begin");
}

if (typeof document !== "undefined" && document.getElementById("scene")) {
  initApp();
}
