import type {
  ExportedSession,
  NextItem,
  Session,
  SubmitResult,
  Submission,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "unknown";
  let message = response.statusText;
  try {
    const body = await response.json();
    if (body?.detail?.code) {
      code = body.detail.code;
      message = body.detail.message ?? message;
    } else if (body?.detail) {
      message = JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, message);
}

/** Thin typed client over the session service. */
export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  healthz(): Promise<{ status: string }> {
    return this.request("/healthz");
  }

  createSession(participantId: string, seed?: number): Promise<Session> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ participant_id: participantId, seed }),
    });
  }

  getSession(sessionId: string): Promise<Session> {
    return this.request(`/sessions/${sessionId}`);
  }

  nextItem(sessionId: string): Promise<NextItem> {
    return this.request(`/sessions/${sessionId}/next`);
  }

  submit(sessionId: string, submission: Submission): Promise<SubmitResult> {
    return this.request(`/sessions/${sessionId}/submit`, {
      method: "POST",
      body: JSON.stringify(submission),
    });
  }

  exportSession(sessionId: string): Promise<ExportedSession> {
    return this.request(`/sessions/${sessionId}/export`);
  }
}
