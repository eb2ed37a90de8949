/** Typed client for the session HTTP API; the only backend this UI
 * talks to. fetch is injectable for tests.
 */

import { ModelSummary, TranscriptEntry } from "./payloads.js";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    readonly errorClass: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

export class NetworkError extends Error {}

interface ErrorBody {
  error_class?: string;
  message?: string;
}

export class SessionApi {
  constructor(
    readonly baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
    public sessionId: string | null = null,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Awaited<ReturnType<FetchLike>>;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new NetworkError(String(err));
    }
    const body = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      const e = body as ErrorBody;
      throw new ApiError(
        e.error_class ?? "unknown",
        e.message ?? `request failed (${response.status})`,
        response.status,
      );
    }
    return body;
  }

  private sid(): string {
    if (!this.sessionId) throw new Error("no session created yet");
    return this.sessionId;
  }

  async createSession(): Promise<string> {
    const body = (await this.request("/sessions", { method: "POST" })) as {
      session_id: string;
    };
    this.sessionId = body.session_id;
    return body.session_id;
  }

  async uploadDataset(
    csvText: string,
    name: string,
  ): Promise<{ n_rows: number; columns: { name: string; kind: string }[] }> {
    const body = (await this.request(
      `/sessions/${this.sid()}/dataset?name=${encodeURIComponent(name)}`,
      { method: "POST", body: csvText, headers: { "Content-Type": "text/csv" } },
    )) as { dataset: { n_rows: number; columns: { name: string; kind: string }[] } };
    return body.dataset;
  }

  async postQuery(text: string): Promise<TranscriptEntry> {
    const body = (await this.request(`/sessions/${this.sid()}/query`, {
      method: "POST",
      body: JSON.stringify({ text }),
      headers: { "Content-Type": "application/json" },
    })) as { response: TranscriptEntry };
    return body.response;
  }

  async getModel(): Promise<ModelSummary> {
    const body = (await this.request(`/sessions/${this.sid()}/model`)) as {
      model: ModelSummary;
    };
    return body.model;
  }

  async getChart(variables: string[], mode = "aggregated"): Promise<unknown> {
    const vars = encodeURIComponent(variables.join(","));
    const body = (await this.request(
      `/sessions/${this.sid()}/charts?vars=${vars}&mode=${mode}`,
    )) as { payload: unknown };
    return body.payload;
  }

  async getModelViews(): Promise<Record<string, unknown>> {
    const body = (await this.request(`/sessions/${this.sid()}/model/views`)) as {
      views: Record<string, unknown>;
    };
    return body.views;
  }

  async getHops(draws: number, seed?: number): Promise<Record<string, unknown>> {
    const seedPart = seed === undefined ? "" : `&seed=${seed}`;
    return (await this.request(
      `/sessions/${this.sid()}/hops?draws=${draws}${seedPart}`,
    )) as Record<string, unknown>;
  }

  async getTranscript(): Promise<TranscriptEntry[]> {
    const body = (await this.request(`/sessions/${this.sid()}/transcript`)) as {
      transcript: TranscriptEntry[];
    };
    return body.transcript;
  }
}
