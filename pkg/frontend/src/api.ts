// Fetch wrappers over the /api/v1 endpoints. Callers pass an AbortSignal so
// a newer request can cancel an in-flight one; stale responses that land
// anyway are dropped by the reducer's sequence check.

import type {
  CorpusSummary,
  FrameInfo,
  QAReceipt,
  QARequest,
  SearchRequest,
  SearchResponse,
  TemporalRequest,
  TemporalResponse,
} from "./types.js";

const API_BASE = "/api/v1";

export class ApiError extends Error {
  status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (typeof body.detail === "string") {
      return body.detail;
    }
    return JSON.stringify(body.detail ?? body);
  } catch {
    return res.statusText || `HTTP ${res.status}`;
  }
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const res = await fetch(url, { signal });
  if (!res.ok) {
    throw new ApiError(res.status, await errorDetail(res));
  }
  return res.json();
}

async function postJson<T>(url: string, body: unknown, signal?: AbortSignal): Promise<T> {
  const res = await fetch(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
    signal,
  });
  if (!res.ok) {
    throw new ApiError(res.status, await errorDetail(res));
  }
  return res.json();
}

export function search(body: SearchRequest, signal?: AbortSignal): Promise<SearchResponse> {
  return postJson(`${API_BASE}/search`, body, signal);
}

export function temporal(body: TemporalRequest, signal?: AbortSignal): Promise<TemporalResponse> {
  return postJson(`${API_BASE}/temporal`, body, signal);
}

export function submitQa(body: QARequest): Promise<QAReceipt> {
  return postJson(`${API_BASE}/qa`, body);
}

export function framesWindow(
  videoId: string,
  fromIndex: number,
  toIndex: number,
  signal?: AbortSignal,
): Promise<{ frames: FrameInfo[] }> {
  const params = new URLSearchParams({ from: String(fromIndex), to: String(toIndex) });
  return getJson(`${API_BASE}/frames/${encodeURIComponent(videoId)}?${params}`, signal);
}

export function corpusSummary(signal?: AbortSignal): Promise<CorpusSummary> {
  return getJson(`${API_BASE}/corpus`, signal);
}
