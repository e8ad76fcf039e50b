import { describe, expect, it } from "vitest";

import { ApiError, GradelabClient, type FetchLike } from "../src/api.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(status === 204 ? null : JSON.stringify(body), {
    status,
    headers: status === 204 ? {} : { "Content-Type": "application/json" },
  });
}

function stubFetch(responses: Response[]): { fetch: FetchLike; calls: Call[] } {
  const calls: Call[] = [];
  const queue = [...responses];
  const fetch: FetchLike = (url, init) => {
    calls.push({ url, init });
    const next = queue.shift();
    if (next === undefined) throw new Error("no scripted response left");
    return Promise.resolve(next);
  };
  return { fetch, calls };
}

function headerValue(init: RequestInit | undefined, name: string): string | undefined {
  const headers = (init?.headers ?? {}) as Record<string, string>;
  return headers[name];
}

describe("GradelabClient", () => {
  it("prefixes every path with the versioned base URL", async () => {
    const { fetch, calls } = stubFetch([jsonResponse(200, [])]);
    const client = new GradelabClient("http://host:9", "tok", fetch);
    await client.listAssignments();
    expect(calls[0]?.url).toBe("http://host:9/v1/assignments");
  });

  it("sends the bearer token on every request", async () => {
    const { fetch, calls } = stubFetch([jsonResponse(200, [])]);
    const client = new GradelabClient("http://host", "secret-token", fetch);
    await client.listAssignments();
    expect(headerValue(calls[0]?.init, "Authorization")).toBe("Bearer secret-token");
  });

  it("sets a JSON content type only when there is a body", async () => {
    const { fetch, calls } = stubFetch([
      jsonResponse(200, []),
      jsonResponse(200, { submission_id: "s", attempt_index: 1 }),
    ]);
    const client = new GradelabClient("http://host", "tok", fetch);
    await client.listAssignments();
    await client.submit("a01", "class C { }");
    expect(headerValue(calls[0]?.init, "Content-Type")).toBeUndefined();
    expect(headerValue(calls[1]?.init, "Content-Type")).toBe("application/json");
  });

  it("posts submissions with assignment id and code", async () => {
    const { fetch, calls } = stubFetch([jsonResponse(200, { submission_id: "s" })]);
    const client = new GradelabClient("http://host", "tok", fetch);
    await client.submit("a02", "class T { }");
    expect(calls[0]?.url).toBe("http://host/v1/submissions");
    expect(calls[0]?.init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      assignment_id: "a02",
      code: "class T { }",
    });
  });

  it("maps hint responses by status code", async () => {
    const { fetch } = stubFetch([
      jsonResponse(202, { status: "pending" }),
      jsonResponse(204, null),
      jsonResponse(200, {
        status: "ready",
        hint_id: "h-x",
        markup: "Use <code>;</code>",
        latency_ms: 12,
        rating: null,
      }),
    ]);
    const client = new GradelabClient("http://host", "tok", fetch);
    expect(await client.getHint("s1")).toEqual({ status: "pending" });
    expect(await client.getHint("s1")).toEqual({ status: "skipped" });
    const ready = await client.getHint("s1");
    expect(ready.status).toBe("ready");
    if (ready.status === "ready") {
      expect(ready.hint_id).toBe("h-x");
      expect(ready.rating).toBeNull();
    }
  });

  it("posts ratings, feedback clicks, and affect responses to their routes", async () => {
    const { fetch, calls } = stubFetch([
      jsonResponse(200, { hint_id: "h-x", rating: 4 }),
      jsonResponse(201, { submission_id: "s1", spec_name: "TestArea_0" }),
      jsonResponse(201, { state: "Focused", submission_id: "s1" }),
    ]);
    const client = new GradelabClient("http://host", "tok", fetch);
    await client.rateHint("h-x", 4);
    await client.recordFeedbackClick("s1", "TestArea_0");
    await client.recordAffect("Focused");
    expect(calls.map((c) => c.url)).toEqual([
      "http://host/v1/hints/h-x/rating",
      "http://host/v1/submissions/s1/feedback-clicks",
      "http://host/v1/affect",
    ]);
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({ value: 4 });
    expect(JSON.parse(String(calls[1]?.init?.body))).toEqual({ spec_name: "TestArea_0" });
    expect(JSON.parse(String(calls[2]?.init?.body))).toEqual({ state: "Focused" });
  });

  it("escapes path segments", async () => {
    const { fetch, calls } = stubFetch([jsonResponse(200, { id: "a 1" })]);
    const client = new GradelabClient("http://host", "tok", fetch);
    await client.getAssignment("a 1");
    expect(calls[0]?.url).toBe("http://host/v1/assignments/a%201");
  });

  it("raises ApiError with status and server detail on failure", async () => {
    const { fetch } = stubFetch([jsonResponse(409, { detail: "already rated" })]);
    const client = new GradelabClient("http://host", "tok", fetch);
    const error = await client.rateHint("h-x", 3).catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    if (error instanceof ApiError) {
      expect(error.status).toBe(409);
      expect(error.detail).toBe("already rated");
    }
  });

  it("falls back to the status text when the error body is not JSON", async () => {
    const { fetch } = stubFetch([
      new Response("<html>oops</html>", { status: 500, statusText: "Server Error" }),
    ]);
    const client = new GradelabClient("http://host", "tok", fetch);
    const error = await client.listAssignments().catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    if (error instanceof ApiError) {
      expect(error.status).toBe(500);
      expect(error.detail).toBe("Server Error");
    }
  });
});
