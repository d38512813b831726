/** Thin typed client over the review service endpoints.
 *
 * The transport is injectable so tests can replay recorded interactions
 * without a network.
 */

import type {
  AccuracyDoc,
  ApiError,
  BenchmarkManifest,
  LabelRunRequest,
  PropertyKey,
  SessionDoc,
  ValueSymbol,
  Violation,
} from "./types.js";

export interface HttpResponse {
  status: number;
  body: unknown;
}

export type Http = (method: string, path: string, body?: unknown) => Promise<HttpResponse>;

export class ApiRequestError extends Error {
  readonly errorCode: string;

  constructor(error: ApiError) {
    super(error.message);
    this.errorCode = error.error_code;
  }
}

/** Browser transport against a service base url. */
export function fetchHttp(baseUrl: string): Http {
  const base = baseUrl.replace(/\/$/, "");
  return async (method, path, body) => {
    const response = await fetch(base + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let parsed: unknown = null;
    const text = await response.text();
    if (text) parsed = JSON.parse(text);
    return { status: response.status, body: parsed };
  };
}

async function expectOk<T>(call: Promise<HttpResponse>): Promise<T> {
  const response = await call;
  if (response.status >= 200 && response.status < 300) {
    return response.body as T;
  }
  const body = response.body as Partial<ApiError> | null;
  throw new ApiRequestError({
    error_code: body?.error_code ?? `http_${response.status}`,
    message: body?.message ?? `request failed with status ${response.status}`,
  });
}

export class ApiClient {
  constructor(private readonly http: Http) {}

  createSession(body: Record<string, unknown>): Promise<SessionDoc> {
    return expectOk(this.http("POST", "/sessions", body));
  }

  getSession(id: string): Promise<SessionDoc> {
    return expectOk(this.http("GET", `/sessions/${id}`));
  }

  setLabel(
    id: string,
    classId: string,
    property: PropertyKey,
    value: ValueSymbol | null,
  ): Promise<{ violations: Violation[] }> {
    return expectOk(
      this.http("PUT", `/sessions/${id}/labels/${encodeURIComponent(classId)}`, {
        property,
        value,
      }),
    );
  }

  addGuidance(id: string, text: string): Promise<{ guidance_history: string[] }> {
    return expectOk(this.http("POST", `/sessions/${id}/guidance`, { text }));
  }

  runLabeler(id: string, request: LabelRunRequest): Promise<{ violations: Violation[] }> {
    return expectOk(this.http("POST", `/sessions/${id}/label-run`, request));
  }

  getAccuracy(id: string): Promise<AccuracyDoc> {
    return expectOk(this.http("GET", `/sessions/${id}/accuracy`));
  }

  listBenchmarks(): Promise<BenchmarkManifest[]> {
    return expectOk(this.http("GET", "/benchmarks"));
  }
}
