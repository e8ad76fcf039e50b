/** Hint polling: ask every second, give up after a minute. The clock and
 * sleeper are injectable so tests never wait on wall time. */

import type { GradelabClient, HintStatus, ReadyHint } from "./api.js";

export type PollOutcome =
  | { status: "ready"; hint: ReadyHint }
  | { status: "skipped" }
  | { status: "timeout" };

export interface PollOptions {
  intervalMs?: number;
  budgetMs?: number;
  sleep?: (ms: number) => Promise<void>;
  now?: () => number;
}

const realSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export const HINT_POLL_INTERVAL_MS = 1_000;
export const HINT_POLL_BUDGET_MS = 60_000;

export async function pollHint(
  client: Pick<GradelabClient, "getHint">,
  submissionId: string,
  options: PollOptions = {},
): Promise<PollOutcome> {
  const intervalMs = options.intervalMs ?? HINT_POLL_INTERVAL_MS;
  const budgetMs = options.budgetMs ?? HINT_POLL_BUDGET_MS;
  const sleep = options.sleep ?? realSleep;
  const now = options.now ?? Date.now;

  const started = now();
  for (;;) {
    const status: HintStatus = await client.getHint(submissionId);
    if (status.status === "ready") return { status: "ready", hint: status };
    if (status.status === "skipped") return { status: "skipped" };
    if (now() - started + intervalMs > budgetMs) return { status: "timeout" };
    await sleep(intervalMs);
  }
}
