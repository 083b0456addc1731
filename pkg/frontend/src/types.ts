/** Wire types mirroring the service's JSON shapes (docs/formats.md). */

export type BBox = [number, number, number, number]; // x_min, y_min, x_max, y_max

export interface SceneObject {
  label: string;
  confidence?: number;
  bbox: BBox;
}

export interface SceneFace {
  name: string;
  confidence?: number;
  bbox: BBox;
}

export interface SceneText {
  text: string;
  confidence?: number;
  bbox: BBox;
}

export interface SceneFixture {
  frame: { width: number; height: number };
  objects?: SceneObject[];
  faces?: SceneFace[];
  texts?: SceneText[];
}

export interface StageTiming {
  stage: string;
  elapsed_ms: number;
}

export interface ResolutionRecord {
  lexeme: string;
  span: [number, number];
  strategy: string;
  status: string;
  source?: string;
  phrase?: string;
  evidence?: Record<string, unknown>;
}

export interface Trace {
  turn_id: string;
  query: string;
  mode: string;
  inputs: { gaze_px: [number, number]; point_px: [number, number] | null };
  pronouns: { lexeme: string; span: [number, number]; strategy: string }[];
  ml_calls?: number;
  ml_warnings?: string[];
  resolutions?: ResolutionRecord[];
  payload?: string;
  query_text?: string;
  replacements?: { span: [number, number]; phrase: string }[];
  error?: string;
}

export interface TurnResult {
  turn_id: string;
  answer: string;
  explanation: string | null;
  fallback: boolean;
  timings: StageTiming[];
  trace: Trace;
}

export interface HistoryPair {
  query: string;
  answer: string;
}
