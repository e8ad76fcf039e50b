/** Affect prompt: a modal asking how the student feels right now.
 *
 * The six options appear in a fixed order with a fixed emoticon each; the
 * meaning is carried by the visible label, the emoticon is decorative.
 * Choosing an option posts exactly one response and closes the modal; the
 * modal can also be dismissed without answering, in which case nothing is
 * posted. If the post fails the modal stays open with a retry note. */

import type { AffectState } from "../api.js";
import type { Translate } from "../i18n.js";

export const AFFECT_OPTIONS: ReadonlyArray<{ state: AffectState; emoticon: string }> = [
  { state: "Focused", emoticon: ":-)" },
  { state: "Anxious", emoticon: ":-S" },
  { state: "Bored", emoticon: ":-|" },
  { state: "Confused", emoticon: ":-/" },
  { state: "Frustrated", emoticon: ">:-(" },
  { state: "Other", emoticon: ":-o" },
];

export interface AffectModalCallbacks {
  /** Sends the selected state to the server; throws on failure. */
  onSelect(state: AffectState): Promise<void>;
  /** Called when the modal closes without an answer. */
  onDismiss?(): void;
}

export function renderAffectModal(
  doc: Document,
  t: Translate,
  callbacks: AffectModalCallbacks,
): HTMLElement {
  const overlay = doc.createElement("div");
  overlay.className = "affect-modal";
  overlay.setAttribute("data-testid", "affect-modal");

  const question = doc.createElement("p");
  question.className = "affect-question";
  question.textContent = t("affectQuestion");
  overlay.appendChild(question);

  const list = doc.createElement("div");
  list.className = "affect-options";
  list.setAttribute("data-testid", "affect-options");

  const status = doc.createElement("p");
  status.className = "affect-status";
  status.setAttribute("data-testid", "affect-status");

  const buttons: HTMLButtonElement[] = [];

  function setDisabled(disabled: boolean): void {
    for (const button of buttons) {
      button.disabled = disabled;
    }
    dismiss.disabled = disabled;
  }

  function close(): void {
    overlay.remove();
  }

  for (const option of AFFECT_OPTIONS) {
    const button = doc.createElement("button");
    button.type = "button";
    button.className = "affect-option";
    button.dataset.state = option.state;
    button.textContent = `${option.emoticon} ${option.state}`;
    button.addEventListener("click", () => {
      setDisabled(true);
      void callbacks
        .onSelect(option.state)
        .then(close)
        .catch(() => {
          setDisabled(false);
          status.textContent = t("affectRetry");
        });
    });
    buttons.push(button);
    list.appendChild(button);
  }
  overlay.appendChild(list);

  const dismiss = doc.createElement("button");
  dismiss.type = "button";
  dismiss.className = "affect-dismiss";
  dismiss.setAttribute("data-testid", "affect-dismiss");
  dismiss.textContent = t("affectDismiss");
  dismiss.addEventListener("click", () => {
    close();
    callbacks.onDismiss?.();
  });

  overlay.append(dismiss, status);
  return overlay;
}
