/** Result panel: overall score plus the color-coded list of test entries.
 *
 * Red entries with details available expand to show the input values and the
 * expected outcome; every expansion notifies the caller exactly once so the
 * interaction can be reported to the server. Collapsing reports nothing.
 * Compile errors arrive with `auto_shown` set and render their messages
 * immediately, without requiring any clicks. */

import type { FeedbackView, SubmissionResponse } from "../api.js";
import type { Translate } from "../i18n.js";

export interface FeedbackCallbacks {
  /** Called once per expansion of a red entry, with the entry's spec name. */
  onExpand(specName: string): void;
}

export function renderFeedback(
  doc: Document,
  submission: SubmissionResponse,
  t: Translate,
  callbacks: FeedbackCallbacks,
): HTMLElement {
  const view: FeedbackView = submission.feedback;
  const root = doc.createElement("section");
  root.className = "feedback";
  root.setAttribute("data-testid", "feedback");

  const scoreLine = doc.createElement("p");
  scoreLine.className = "feedback-score";
  scoreLine.setAttribute("data-testid", "feedback-score");
  scoreLine.textContent = `${t("score")}: ${submission.score.toFixed(1)} (${t("attempt")} ${submission.attempt_index})`;
  root.appendChild(scoreLine);

  if (view.auto_shown && view.compile_messages.length > 0) {
    const compileBlock = doc.createElement("div");
    compileBlock.className = "compile-errors";
    compileBlock.setAttribute("data-testid", "compile-errors");
    const heading = doc.createElement("h3");
    heading.textContent = t("compileErrors");
    compileBlock.appendChild(heading);
    const list = doc.createElement("ul");
    for (const message of view.compile_messages) {
      const item = doc.createElement("li");
      item.className = "compile-message";
      item.textContent = `${t("line")} ${message.line}: ${message.code}: ${message.message}`;
      list.appendChild(item);
    }
    compileBlock.appendChild(list);
    root.appendChild(compileBlock);
  }

  if (view.test_entries.length > 0) {
    const heading = doc.createElement("h3");
    heading.textContent = t("testResults");
    root.appendChild(heading);

    const list = doc.createElement("ul");
    list.className = "test-entries";
    list.setAttribute("data-testid", "test-entries");
    for (const entry of view.test_entries) {
      list.appendChild(renderEntry(doc, entry, t, callbacks));
    }
    root.appendChild(list);
  }

  return root;
}

function renderEntry(
  doc: Document,
  entry: FeedbackView["test_entries"][number],
  t: Translate,
  callbacks: FeedbackCallbacks,
): HTMLElement {
  const item = doc.createElement("li");
  item.className = `test-entry ${entry.color}`;
  item.setAttribute("data-testid", "test-entry");
  item.setAttribute("data-spec", entry.spec_name);
  item.setAttribute("data-color", entry.color);

  const label = doc.createElement("span");
  label.className = "test-entry-name";
  label.textContent = entry.spec_name;
  item.appendChild(label);

  if (entry.color === "red" && entry.details_available) {
    const toggle = doc.createElement("button");
    toggle.type = "button";
    toggle.className = "test-entry-toggle";
    toggle.setAttribute("data-testid", "entry-toggle");
    toggle.textContent = "+";

    const details = doc.createElement("div");
    details.className = "test-entry-details";
    details.setAttribute("data-testid", "entry-details");
    details.hidden = true;

    const input = doc.createElement("p");
    input.textContent = `${t("inputValues")}: ${entry.input_desc}`;
    const expected = doc.createElement("p");
    expected.textContent = `${t("expectedOutcome")}: ${entry.expected_desc}`;
    details.append(input, expected);

    toggle.addEventListener("click", () => {
      if (details.hidden) {
        details.hidden = false;
        toggle.textContent = "-";
        callbacks.onExpand(entry.spec_name);
      } else {
        details.hidden = true;
        toggle.textContent = "+";
      }
    });

    item.append(toggle, details);
  }

  return item;
}
