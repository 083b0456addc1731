/** Thin client for the session HTTP API. No resolution logic lives here. */

import type { HistoryPair, SceneFixture, Trace, TurnResult } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface QueryRequest {
  text: string;
  scene?: SceneFixture;
  scene_ref?: string;
  gaze_px: [number, number];
  point_px?: [number, number] | null;
  mode?: "v1" | "v2";
}

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status?: number,
  ) {
    super(message);
  }
}

export class SessionClient {
  private sessionId: string | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  get id(): string | null {
    return this.sessionId;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep statusText
      }
      throw new ApiError(detail, response.status);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async createSession(mode?: "v1" | "v2"): Promise<string> {
    const body = await this.post<{ session_id: string }>("/v1/sessions", mode ? { mode } : {});
    this.sessionId = body.session_id;
    return body.session_id;
  }

  async wake(utterance: string): Promise<{ reply: string | null; phase: string }> {
    this.requireSession();
    return this.post(`/v1/sessions/${this.sessionId}/wake`, { utterance });
  }

  async query(request: QueryRequest): Promise<TurnResult> {
    this.requireSession();
    return this.post(`/v1/sessions/${this.sessionId}/query`, request);
  }

  async history(): Promise<HistoryPair[]> {
    this.requireSession();
    const body = await this.request<{ pairs: HistoryPair[] }>(
      `/v1/sessions/${this.sessionId}/history`,
    );
    return body.pairs;
  }

  async trace(turnId: string): Promise<Trace> {
    return this.request<Trace>(`/v1/turns/${turnId}/trace`);
  }

  async healthy(): Promise<boolean> {
    try {
      await this.request<{ status: string }>("/healthz");
      return true;
    } catch {
      return false;
    }
  }

  private requireSession(): void {
    if (!this.sessionId) throw new ApiError("no session created yet");
  }
}
