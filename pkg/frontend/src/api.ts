// Thin client over the campaign service. The fetch implementation is
// injected so tests can stub the wire; mutations are never retried here.

import type { EventsResponse, StateJson } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiResult<T> {
  ok: boolean;
  status: number;
  body: T | null;
  detail: string | null;
}

async function decode<T>(response: Response): Promise<ApiResult<T>> {
  let payload: unknown = null;
  try {
    payload = await response.json();
  } catch {
    payload = null;
  }
  if (response.ok) {
    return { ok: true, status: response.status, body: payload as T, detail: null };
  }
  const detail =
    payload && typeof payload === "object" && "detail" in payload
      ? String((payload as { detail: unknown }).detail)
      : `HTTP ${response.status}`;
  return { ok: false, status: response.status, body: null, detail };
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  getState(): Promise<ApiResult<StateJson>> {
    return this.fetchImpl(`${this.baseUrl}/state`).then((r) => decode(r));
  }

  step(index: number): Promise<ApiResult<StateJson>> {
    return this.fetchImpl(`${this.baseUrl}/step`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ index }),
    }).then((r) => decode(r));
  }

  exit(): Promise<ApiResult<StateJson>> {
    return this.fetchImpl(`${this.baseUrl}/exit`, { method: "POST" }).then((r) =>
      decode(r),
    );
  }

  events(after: number, wait = 0): Promise<ApiResult<EventsResponse>> {
    return this.fetchImpl(
      `${this.baseUrl}/events?after=${after}&wait=${wait}`,
    ).then((r) => decode(r));
  }
}
