import type { SearchResponse } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number) {
    super(`HTTP ${status}`);
  }
}

export async function search(
  stacktrace: string,
  k: number,
  baseUrl = "",
  timeoutMs = 60_000,
): Promise<SearchResponse> {
  const controller = new AbortController();
  const timer = setTimeout(() => controller.abort(), timeoutMs);
  try {
    const resp = await fetch(`${baseUrl}/api/v1/search`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ stacktrace, k }),
      signal: controller.signal,
    });
    if (!resp.ok) throw new ApiError(resp.status);
    return (await resp.json()) as SearchResponse;
  } finally {
    clearTimeout(timer);
  }
}
