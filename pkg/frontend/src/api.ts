/** Thin typed client for the staleness service JSON API. */

import type {
  ApiEnvelope,
  FieldError,
  LatencyResult,
  PresetsResponse,
  SweepResult,
} from "./types.js";

export class ApiFieldError extends Error {
  constructor(public readonly field: string, message: string) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (response.status === 400) {
      const payload = (await response.json()) as { detail: FieldError };
      throw new ApiFieldError(payload.detail.field, payload.detail.message);
    }
    if (!response.ok) {
      throw new Error(`${path} failed with status ${response.status}`);
    }
    return (await response.json()) as T;
  }

  async presets(): Promise<PresetsResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/presets`);
    if (!response.ok) {
      throw new Error(`presets failed with status ${response.status}`);
    }
    return (await response.json()) as PresetsResponse;
  }

  sweep(scenario: Record<string, unknown>): Promise<ApiEnvelope<SweepResult>> {
    return this.post("/api/sweep", scenario);
  }

  latency(scenario: Record<string, unknown>): Promise<ApiEnvelope<LatencyResult>> {
    return this.post("/api/latency", scenario);
  }

  sla(scenario: Record<string, unknown>): Promise<ApiEnvelope<Record<string, unknown>>> {
    return this.post("/api/sla", scenario);
  }
}
