import type {
  FrameView,
  ReportView,
  SessionView,
  TrajectoryView,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Error body surfaced by the session API: {error: code, message: text}. */
export class ApiCallError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiCallError";
  }
}

function requestId(): string {
  return `${Date.now()}-${Math.random().toString(36).substring(2, 11)}`;
}

/**
 * Thin typed wrapper over the /v1 session endpoints. All mutations carry a
 * generated request_id so the server can drop duplicate submissions.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    rawBody?: string,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (rawBody !== undefined) {
      init.body = rawBody;
      init.headers = { "Content-Type": "application/octet-stream" };
    } else if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const payload = await response.json();
    if (!response.ok) {
      const code = typeof payload?.error === "string" ? payload.error : "unknown";
      const message =
        typeof payload?.message === "string" ? payload.message : response.statusText;
      throw new ApiCallError(response.status, code, message);
    }
    return payload as T;
  }

  createSession(streamText: string): Promise<SessionView> {
    return this.request<SessionView>("POST", "/v1/sessions", undefined, streamText);
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request<SessionView>("GET", `/v1/sessions/${sessionId}`);
  }

  setCalibration(
    sessionId: string,
    pointA: [number, number],
    pointB: [number, number],
    realDistanceM: number,
  ): Promise<SessionView> {
    return this.request<SessionView>("PUT", `/v1/sessions/${sessionId}/calibration`, {
      point_a: pointA,
      point_b: pointB,
      real_distance_m: realDistanceM,
    });
  }

  track(sessionId: string): Promise<TrajectoryView> {
    return this.request<TrajectoryView>("POST", `/v1/sessions/${sessionId}/track`, {
      request_id: requestId(),
    });
  }

  getTrajectory(sessionId: string): Promise<TrajectoryView> {
    return this.request<TrajectoryView>("GET", `/v1/sessions/${sessionId}/trajectory`);
  }

  patchPoint(
    sessionId: string,
    frame: number,
    x: number,
    y: number,
  ): Promise<TrajectoryView> {
    return this.request<TrajectoryView>(
      "PATCH",
      `/v1/sessions/${sessionId}/trajectory/${frame}`,
      { x, y, request_id: requestId() },
    );
  }

  deletePoint(sessionId: string, frame: number): Promise<TrajectoryView> {
    const query = encodeURIComponent(requestId());
    return this.request<TrajectoryView>(
      "DELETE",
      `/v1/sessions/${sessionId}/trajectory/${frame}?request_id=${query}`,
    );
  }

  getReport(sessionId: string): Promise<ReportView> {
    return this.request<ReportView>("GET", `/v1/sessions/${sessionId}/report`);
  }

  getFrame(sessionId: string, frameIndex: number): Promise<FrameView> {
    return this.request<FrameView>(
      "GET",
      `/v1/sessions/${sessionId}/frames/${frameIndex}`,
    );
  }
}
