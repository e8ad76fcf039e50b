/** End-to-end flow against a live server in mock mode: the UI drives the real
 * HTTP interface with a spying fetch, so every posted interaction is counted
 * exactly as the server receives it. */

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { JSDOM } from "jsdom";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GradelabClient, type FetchLike } from "../src/api.js";
import { createApp, type App } from "../src/app.js";

const PARTICIPANT_TOKEN = "tok-ui1";
const ADMIN_TOKEN = "adm-ui";

/** Wrong on purpose: Add subtracts and the nested expression comes out short. */
const FAILING_CODE = `class Calculator {
    public int Add(int a, int b) { return a - b; }
    public int Sub(int a, int b) { return a - b; }
    public int Mul(int a, int b) { return a * b; }
    public int Div(int a, int b) { return a / b; }
}
`;

interface RecordedRequest {
  method: string;
  url: string;
  body: string;
  status: number;
}

let workDir: string;
let server: ChildProcessWithoutNullStreams;
let serverOutput = "";
let baseUrl: string;
let requests: RecordedRequest[];
let doc: Document;
let app: App;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${baseUrl}/v1/assignments`, {
        headers: { Authorization: `Bearer ${PARTICIPANT_TOKEN}` },
      });
      if (response.ok) return;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`server did not come up; output so far:\n${serverOutput}`);
    }
    await sleep(150);
  }
}

function posts(pathSuffix: string): RecordedRequest[] {
  return requests.filter((r) => r.method === "POST" && r.url.endsWith(pathSuffix));
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "gradelab-ui-"));
  const rosterPath = join(workDir, "roster.json");
  writeFileSync(
    rosterPath,
    JSON.stringify([
      { id: "ui1", token: PARTICIPANT_TOKEN, condition: "experimental", pretest_score: 50 },
    ]),
  );
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  server = spawn(
    "python3",
    [
      "-m",
      "gradelab.cli",
      "serve",
      "--port",
      String(port),
      "--host",
      "127.0.0.1",
      "--log",
      join(workDir, "events.jsonl"),
      "--roster",
      rosterPath,
      "--admin-token",
      ADMIN_TOKEN,
      "--llm",
      "mock",
    ],
    { stdio: "pipe" },
  );
  server.stdout.on("data", (chunk: Buffer) => {
    serverOutput += chunk.toString();
  });
  server.stderr.on("data", (chunk: Buffer) => {
    serverOutput += chunk.toString();
  });
  await waitForServer();

  requests = [];
  const spyFetch: FetchLike = async (url, init) => {
    const entry: RecordedRequest = {
      method: init?.method ?? "GET",
      url,
      body: typeof init?.body === "string" ? init.body : "",
      status: 0,
    };
    requests.push(entry);
    const response = await fetch(url, init);
    entry.status = response.status;
    return response;
  };

  doc = new JSDOM("<!doctype html><html><body></body></html>").window.document;
  const client = new GradelabClient(baseUrl, PARTICIPANT_TOKEN, spyFetch);
  app = createApp({ doc, client, locale: "en", poll: { intervalMs: 50 } });
  doc.body.appendChild(app.root);
  await app.start();
}, 60_000);

afterAll(async () => {
  if (server && server.exitCode === null) {
    server.kill("SIGTERM");
    await new Promise<void>((resolve) => {
      server.once("exit", () => resolve());
      setTimeout(resolve, 5_000);
    });
  }
  rmSync(workDir, { recursive: true, force: true });
});

describe("student UI against a live mock-mode server", () => {
  it("loads the assignment catalog", () => {
    const picker = doc.querySelector('[data-testid="assignment-picker"]') as HTMLSelectElement;
    const ids = [...picker.options].map((o) => o.value);
    expect(ids).toEqual(["a01", "a02", "a03", "a04", "a05", "a06"]);
  });

  it("renders red entries for a failing submission and posts exactly one feedback-click per expansion", async () => {
    await app.selectAssignment("a02");
    app.editor.setCode(FAILING_CODE);
    await app.submit();

    const score = doc.querySelector('[data-testid="feedback-score"]');
    expect(score?.textContent).toContain("62.5");

    const redEntries = [
      ...doc.querySelectorAll('[data-testid="test-entry"][data-color="red"]'),
    ] as HTMLElement[];
    expect(redEntries.map((e) => e.getAttribute("data-spec"))).toEqual([
      "TestAdd_2_3",
      "TestAdd_neg2_3",
      "TestNestedExpression",
    ]);
    expect(posts("/feedback-clicks")).toHaveLength(0);

    for (const entry of redEntries) {
      (entry.querySelector('[data-testid="entry-toggle"]') as HTMLButtonElement).click();
    }
    // Fire-and-forget posts: give them a poll cycle to reach the server.
    await sleep(300);

    const clicks = posts("/feedback-clicks");
    expect(clicks).toHaveLength(3);
    expect(clicks.every((c) => c.status === 201)).toBe(true);
    expect(clicks.map((c) => (JSON.parse(c.body) as { spec_name: string }).spec_name)).toEqual([
      "TestAdd_2_3",
      "TestAdd_neg2_3",
      "TestNestedExpression",
    ]);

    // Expanded details show the probe inputs and the expected outcome.
    const firstDetails = redEntries[0]?.querySelector('[data-testid="entry-details"]');
    expect((firstDetails as HTMLElement).hidden).toBe(false);
    expect(firstDetails?.textContent).toContain("Calculator.Add(2, 3)");
    expect(firstDetails?.textContent).toContain("5");
  }, 60_000);

  it("delivers the hint by polling and locks the rating widget after one post", async () => {
    // The previous submission left a hint panel behind (experimental group,
    // hint-enabled assignment, polled to readiness by the app).
    const panel = doc.querySelector('[data-testid="hint-panel"]');
    expect(panel).not.toBeNull();
    const hintPolls = requests.filter((r) => r.method === "GET" && r.url.endsWith("/hint"));
    expect(hintPolls.length).toBeGreaterThan(0);
    expect(hintPolls.at(-1)?.status).toBe(200);
    const body = panel?.querySelector('[data-testid="hint-body"]');
    expect((body?.textContent ?? "").length).toBeGreaterThan(0);

    const buttons = [...(panel?.querySelectorAll(".rating-button") ?? [])] as HTMLButtonElement[];
    expect(buttons).toHaveLength(5);
    buttons[3]?.click();
    await sleep(300);

    const ratingPosts = posts("/rating");
    expect(ratingPosts).toHaveLength(1);
    expect(ratingPosts[0]?.status).toBe(200);
    expect(JSON.parse(ratingPosts[0]?.body ?? "")).toEqual({ value: 4 });
    expect(buttons.every((b) => b.disabled)).toBe(true);

    // Further clicks are suppressed client-side: still exactly one post.
    buttons[1]?.click();
    buttons[4]?.click();
    await sleep(150);
    expect(posts("/rating")).toHaveLength(1);
  }, 60_000);

  it("asks about affect eventually, in the fixed option order, and posts one response", async () => {
    let modal: HTMLElement | null = null;
    for (let attempt = 0; attempt < 60 && modal === null; attempt += 1) {
      await app.submit();
      modal = doc.querySelector('[data-testid="affect-modal"]');
    }
    expect(modal).not.toBeNull();

    const options = [...modal!.querySelectorAll(".affect-option")] as HTMLButtonElement[];
    expect(options.map((o) => o.dataset.state)).toEqual([
      "Focused",
      "Anxious",
      "Bored",
      "Confused",
      "Frustrated",
      "Other",
    ]);

    const frustrated = modal!.querySelector('[data-state="Frustrated"]') as HTMLButtonElement;
    frustrated.click();
    await sleep(300);

    const affectPosts = posts("/affect");
    expect(affectPosts).toHaveLength(1);
    expect(affectPosts[0]?.status).toBe(201);
    expect(JSON.parse(affectPosts[0]?.body ?? "")).toEqual({ state: "Frustrated" });
    expect(doc.body.contains(modal!)).toBe(false);
  }, 120_000);

  it("recorded the whole session in the server's event log", async () => {
    const response = await fetch(`${baseUrl}/v1/admin/report`, {
      headers: { Authorization: `Bearer ${ADMIN_TOKEN}` },
    });
    expect(response.status).toBe(200);
    const files = (await response.json()) as Record<string, string>;
    const report = JSON.parse(files["report.json"] ?? "{}") as {
      meta?: { n_events?: number; n_participants?: Record<string, number> };
    };
    expect(report.meta?.n_events ?? 0).toBeGreaterThan(0);
    expect(report.meta?.n_participants?.experimental).toBe(1);
  }, 60_000);
});
