import { ApiClient } from "../src/api.js";
import type { Bucket, Envelope } from "../src/api.js";

/** fetch stub keyed by "METHOD path" with recorded calls. */
export function stubFetch(
  routes: Record<string, { status?: number; body: unknown }>,
) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, init });
    const method = init?.method ?? "GET";
    const path = url.replace(/^[^/]*\/\/[^/]+/, "");
    const key = `${method} ${path}`;
    const route = routes[key];
    if (!route) {
      throw new Error(`unexpected request ${key}`);
    }
    const status = route.status ?? 200;
    return {
      ok: status >= 200 && status < 300,
      status,
      statusText: String(status),
      json: async () => route.body,
    } as Response;
  }) as typeof fetch;
  return { fetchFn, calls };
}

export function clientFor(
  routes: Record<string, { status?: number; body: unknown }>,
) {
  const { fetchFn, calls } = stubFetch(routes);
  return { api: new ApiClient("", fetchFn), calls };
}

export function bucket(
  startMs: number,
  endMs: number,
  min: number | null,
  max: number | null,
): Bucket {
  return { start_ms: startMs, end_ms: endMs, min, max, empty: min === null };
}

export function envelope(
  channel: string,
  buckets: Bucket[],
  totalSamples = 1000,
): Envelope {
  return {
    channel,
    from_ms: buckets[0]?.start_ms ?? 0,
    to_ms: buckets[buckets.length - 1]?.end_ms ?? 1,
    total_samples: totalSamples,
    buckets,
  };
}
