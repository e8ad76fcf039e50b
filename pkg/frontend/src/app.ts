/** Session view: assignment picker, statement panel, editor, submit control,
 * result panel, hint panel, and the occasional affect prompt.
 *
 * Invariants enforced here:
 *   - at most one submission is in flight; the submit control is disabled
 *     while one is pending and re-enabled as soon as the result arrives;
 *   - a failed request leaves the composed code untouched and shows a retry
 *     banner instead of a result;
 *   - hint polling runs alongside the regular feedback, which stays visible
 *     the whole time, with a progress note while pending; a newer submission
 *     discards any hint still being polled for an older one. */

import {
  ApiError,
  GradelabClient,
  type AffectState,
  type AssignmentSummary,
  type SubmissionResponse,
} from "./api.js";
import { pollHint, type PollOptions } from "./polling.js";
import { translator, type Locale, type Translate } from "./i18n.js";
import { createEditor, type Editor } from "./components/editor.js";
import { renderFeedback } from "./components/feedback.js";
import { renderHintPanel } from "./components/hint.js";
import { renderAffectModal } from "./components/affect.js";

export interface AppOptions {
  doc: Document;
  client: GradelabClient;
  locale?: Locale;
  /** Overridable poll timing, mainly for tests. */
  poll?: Partial<PollOptions>;
}

export interface App {
  root: HTMLElement;
  editor: Editor;
  t: Translate;
  start(): Promise<void>;
  selectAssignment(id: string): Promise<void>;
  /** Resolves once feedback is rendered and any hint flow has finished. */
  submit(): Promise<void>;
  /** True while a submission is being processed. */
  isSubmitting(): boolean;
}

export function createApp(options: AppOptions): App {
  const { doc, client } = options;
  const t = translator(options.locale ?? "pl");

  const root = doc.createElement("div");
  root.className = "app";
  root.setAttribute("data-testid", "app");

  const picker = doc.createElement("select");
  picker.className = "assignment-picker";
  picker.setAttribute("data-testid", "assignment-picker");

  const statement = doc.createElement("article");
  statement.className = "assignment-body";
  statement.setAttribute("data-testid", "assignment-body");

  const editor = createEditor(doc);

  const submitButton = doc.createElement("button");
  submitButton.type = "button";
  submitButton.className = "submit-button";
  submitButton.setAttribute("data-testid", "submit-button");
  submitButton.textContent = t("submit");

  const banner = doc.createElement("p");
  banner.className = "error-banner";
  banner.setAttribute("data-testid", "error-banner");
  banner.hidden = true;

  const resultPanel = doc.createElement("div");
  resultPanel.className = "result-panel";
  resultPanel.setAttribute("data-testid", "result-panel");

  const hintArea = doc.createElement("div");
  hintArea.className = "hint-area";
  hintArea.setAttribute("data-testid", "hint-area");

  root.append(picker, statement, editor.root, submitButton, banner, resultPanel, hintArea);

  let assignments: AssignmentSummary[] = [];
  let currentAssignment: string | null = null;
  let submitting = false;
  let generation = 0;

  function setSubmitting(value: boolean): void {
    submitting = value;
    submitButton.disabled = value;
    submitButton.textContent = value ? t("submitting") : t("submit");
  }

  async function start(): Promise<void> {
    assignments = await client.listAssignments();
    picker.textContent = "";
    for (const assignment of assignments) {
      const option = doc.createElement("option");
      option.value = assignment.id;
      option.textContent = `${assignment.id} — ${assignment.title}`;
      picker.appendChild(option);
    }
    const first = assignments[0];
    if (first !== undefined) {
      await selectAssignment(first.id);
    }
  }

  async function selectAssignment(id: string): Promise<void> {
    const detail = await client.getAssignment(id);
    currentAssignment = detail.id;
    picker.value = detail.id;
    statement.textContent = "";
    const title = doc.createElement("h2");
    title.textContent = detail.title;
    const body = doc.createElement("pre");
    body.textContent = detail.body;
    statement.append(title, body);
  }

  function showFeedback(submission: SubmissionResponse): void {
    resultPanel.textContent = "";
    resultPanel.appendChild(
      renderFeedback(doc, submission, t, {
        onExpand: (specName) => {
          void client
            .recordFeedbackClick(submission.submission_id, specName)
            .catch(() => {
              // Reporting the expansion is best-effort; the details stay open.
            });
        },
      }),
    );
    editor.setHighlights(submission.feedback.highlighted_lines);
  }

  async function runHintFlow(submission: SubmissionResponse, myGeneration: number): Promise<void> {
    hintArea.textContent = "";
    const spinner = doc.createElement("p");
    spinner.className = "hint-pending";
    spinner.setAttribute("data-testid", "hint-pending");
    spinner.textContent = t("hintPending");
    hintArea.appendChild(spinner);

    const outcome = await pollHint(client, submission.submission_id, options.poll);
    if (myGeneration !== generation) {
      return; // a newer submission owns the hint area now
    }
    spinner.remove();
    if (outcome.status === "ready") {
      hintArea.appendChild(
        renderHintPanel(doc, outcome.hint, t, {
          onRate: async (value) => {
            await client.rateHint(outcome.hint.hint_id, value);
          },
        }),
      );
    } else if (outcome.status === "timeout") {
      const note = doc.createElement("p");
      note.className = "hint-unavailable";
      note.setAttribute("data-testid", "hint-unavailable");
      note.textContent = t("hintUnavailable");
      hintArea.appendChild(note);
    }
    // "skipped": no panel at all, matching the no-hint condition.
  }

  function showAffectPrompt(): void {
    const modal = renderAffectModal(doc, t, {
      onSelect: async (state: AffectState) => {
        await client.recordAffect(state);
      },
    });
    root.appendChild(modal);
  }

  async function submit(): Promise<void> {
    if (submitting || currentAssignment === null) {
      return;
    }
    const code = editor.getCode();
    setSubmitting(true);
    banner.hidden = true;
    let submission: SubmissionResponse;
    try {
      submission = await client.submit(currentAssignment, code);
    } catch (error) {
      // The composed code lives in the editor and is never cleared here.
      banner.hidden = false;
      banner.textContent =
        error instanceof ApiError
          ? `${t("networkError")} (${error.detail})`
          : t("networkError");
      setSubmitting(false);
      return;
    }
    setSubmitting(false);
    generation += 1;
    showFeedback(submission);
    hintArea.textContent = "";
    if (submission.affect_prompt) {
      showAffectPrompt();
    }
    if (submission.hint_pending) {
      await runHintFlow(submission, generation);
    }
  }

  submitButton.addEventListener("click", () => {
    void submit();
  });
  picker.addEventListener("change", () => {
    void selectAssignment(picker.value);
  });

  return {
    root,
    editor,
    t,
    start,
    selectAssignment,
    submit,
    isSubmitting: () => submitting,
  };
}
