/** Typed client for the assessment service's /v1 HTTP API — the only way
 * the UI talks to the backend. */

export interface AssignmentSummary {
  id: string;
  title: string;
  tier: string;
  n_tests: number;
}

export interface AssignmentDetail extends AssignmentSummary {
  body: string;
}

export interface CompileMessage {
  line: number;
  code: string;
  message: string;
}

export type EntryColor = "green" | "red";

export interface TestEntry {
  spec_name: string;
  color: EntryColor;
  details_available: boolean;
  input_desc: string;
  expected_desc: string;
}

export interface FeedbackView {
  auto_shown: boolean;
  highlighted_lines: number[];
  compile_messages: CompileMessage[];
  test_entries: TestEntry[];
}

export type Outcome = "CompileError" | "RuntimeError" | "TestFailure" | "AllPassed";

export interface SubmissionResponse {
  submission_id: string;
  attempt_index: number;
  outcome: Outcome;
  score: number;
  feedback: FeedbackView;
  hint_pending: boolean;
  affect_prompt: boolean;
}

export interface ReadyHint {
  status: "ready";
  hint_id: string;
  markup: string;
  latency_ms: number;
  rating: number | null;
}

export type HintStatus = { status: "pending" } | { status: "skipped" } | ReadyHint;

export type AffectState =
  | "Focused"
  | "Anxious"
  | "Bored"
  | "Confused"
  | "Frustrated"
  | "Other";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
  } catch {
    // fall through: non-JSON error body
  }
  return response.statusText || "request failed";
}

export class GradelabClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string,
    private readonly token: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((url, init) => globalThis.fetch(url, init));
  }

  private async request(path: string, init: RequestInit = {}): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1${path}`, {
      ...init,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(init.body !== undefined ? { "Content-Type": "application/json" } : {}),
        ...(init.headers ?? {}),
      },
    });
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response;
  }

  async listAssignments(): Promise<AssignmentSummary[]> {
    const response = await this.request("/assignments");
    return (await response.json()) as AssignmentSummary[];
  }

  async getAssignment(id: string): Promise<AssignmentDetail> {
    const response = await this.request(`/assignments/${encodeURIComponent(id)}`);
    return (await response.json()) as AssignmentDetail;
  }

  async submit(assignmentId: string, code: string): Promise<SubmissionResponse> {
    const response = await this.request("/submissions", {
      method: "POST",
      body: JSON.stringify({ assignment_id: assignmentId, code }),
    });
    return (await response.json()) as SubmissionResponse;
  }

  /** 202 → pending, 204 → skipped, 200 → ready. */
  async getHint(submissionId: string): Promise<HintStatus> {
    const response = await this.request(
      `/submissions/${encodeURIComponent(submissionId)}/hint`,
    );
    if (response.status === 204) return { status: "skipped" };
    const body = (await response.json()) as HintStatus;
    return body;
  }

  async rateHint(hintId: string, value: number): Promise<void> {
    await this.request(`/hints/${encodeURIComponent(hintId)}/rating`, {
      method: "POST",
      body: JSON.stringify({ value }),
    });
  }

  async recordFeedbackClick(submissionId: string, specName: string): Promise<void> {
    await this.request(
      `/submissions/${encodeURIComponent(submissionId)}/feedback-clicks`,
      {
        method: "POST",
        body: JSON.stringify({ spec_name: specName }),
      },
    );
  }

  async recordAffect(state: AffectState): Promise<void> {
    await this.request("/affect", {
      method: "POST",
      body: JSON.stringify({ state }),
    });
  }
}
