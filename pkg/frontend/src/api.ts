/** Thin HTTP client for the prediction service.
 *
 * Every method maps one endpoint to one typed response. Failures become
 * either a TimeoutError (no reply in time) or a ServiceError carrying the
 * HTTP status and the service's own message, so the view layer can show
 * exactly what went wrong.
 */

import type {
  FieldIssue,
  SnapshotInfo,
  TopicSummary,
  VolumeSeries,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";

/** The service answered with a non-2xx status. */
export class ServiceError extends Error {
  readonly status: number;
  readonly details: FieldIssue[];

  constructor(status: number, message: string, details: FieldIssue[] = []) {
    super(message);
    this.name = "ServiceError";
    this.status = status;
    this.details = details;
  }
}

/** The service did not answer within the configured window. */
export class TimeoutError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "TimeoutError";
  }
}

function aborted(err: unknown): boolean {
  return (
    err instanceof Error &&
    (err.name === "TimeoutError" ||
      err.name === "AbortError" ||
      (err.cause instanceof Error && err.cause.name === "TimeoutError"))
  );
}

export class ApiClient {
  readonly baseUrl: string;
  readonly timeoutMs: number;

  constructor(baseUrl = "", timeoutMs = 10_000) {
    // strip a trailing slash so path joins stay predictable
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.timeoutMs = timeoutMs;
  }

  snapshot(): Promise<SnapshotInfo> {
    return this.call("/snapshot");
  }

  topics(): Promise<TopicSummary[]> {
    return this.call("/topics");
  }

  topicVolume(id: number, days?: number): Promise<VolumeSeries> {
    const query = days === undefined ? "" : `?days=${days}`;
    return this.call(`/topics/${id}/volume${query}`);
  }

  whatIf(request: WhatIfRequest): Promise<WhatIfResponse> {
    return this.call("/whatif", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
  }

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        ...init,
        signal: AbortSignal.timeout(this.timeoutMs),
      });
    } catch (err) {
      if (aborted(err)) {
        throw new TimeoutError(
          `no reply from ${path} within ${this.timeoutMs} ms`,
        );
      }
      throw new ServiceError(0, `service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      throw await toServiceError(response);
    }
    return (await response.json()) as T;
  }
}

async function toServiceError(response: Response): Promise<ServiceError> {
  const text = await response.text();
  try {
    const body = JSON.parse(text) as {
      error?: string;
      details?: FieldIssue[];
    };
    if (typeof body.error === "string") {
      return new ServiceError(response.status, body.error, body.details ?? []);
    }
  } catch {
    // fall through to the raw-text form
  }
  const message = text.trim() || response.statusText || "request failed";
  return new ServiceError(response.status, message);
}
