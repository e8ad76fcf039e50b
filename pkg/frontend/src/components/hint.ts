/** Hint panel: rendered hint markup plus a five-point usefulness scale.
 *
 * The scale submits exactly one rating. While the request is in flight all
 * buttons are disabled; on success (or on a conflict meaning the hint was
 * already rated) the widget stays locked with the chosen value marked. Any
 * other failure re-enables the buttons so the student can retry. */

import { ApiError, type ReadyHint } from "../api.js";
import { renderHintMarkup } from "../markup.js";
import type { Translate } from "../i18n.js";

export interface HintPanelCallbacks {
  /** Sends the rating to the server; throws ApiError on failure. */
  onRate(value: number): Promise<void>;
}

export function renderHintPanel(
  doc: Document,
  hint: ReadyHint,
  t: Translate,
  callbacks: HintPanelCallbacks,
): HTMLElement {
  const root = doc.createElement("section");
  root.className = "hint-panel";
  root.setAttribute("data-testid", "hint-panel");

  const heading = doc.createElement("h3");
  heading.textContent = t("hintTitle");
  root.appendChild(heading);

  const body = doc.createElement("div");
  body.className = "hint-body";
  body.setAttribute("data-testid", "hint-body");
  body.appendChild(renderHintMarkup(doc, hint.markup));
  root.appendChild(body);

  const prompt = doc.createElement("p");
  prompt.className = "rating-prompt";
  prompt.textContent = `${t("ratingPrompt")} (1 = ${t("ratingLow")}, 5 = ${t("ratingHigh")})`;
  root.appendChild(prompt);

  const scale = doc.createElement("div");
  scale.className = "rating-scale";
  scale.setAttribute("data-testid", "rating-scale");

  const buttons: HTMLButtonElement[] = [];
  const status = doc.createElement("p");
  status.className = "rating-status";
  status.setAttribute("data-testid", "rating-status");

  function lock(selected: number | null): void {
    for (const button of buttons) {
      button.disabled = true;
      if (selected !== null && Number(button.dataset.value) === selected) {
        button.classList.add("selected");
      }
    }
    scale.setAttribute("data-locked", "true");
  }

  function unlock(): void {
    for (const button of buttons) {
      button.disabled = false;
    }
    scale.removeAttribute("data-locked");
  }

  for (let value = 1; value <= 5; value += 1) {
    const button = doc.createElement("button");
    button.type = "button";
    button.className = "rating-button";
    button.dataset.value = String(value);
    button.textContent = String(value);
    button.addEventListener("click", () => {
      if (scale.hasAttribute("data-locked")) {
        return;
      }
      lock(null);
      void callbacks
        .onRate(value)
        .then(() => {
          lock(value);
          status.textContent = t("ratingThanks");
        })
        .catch((error: unknown) => {
          if (error instanceof ApiError && error.status === 409) {
            // Already rated (e.g. in another tab): keep the widget locked.
            lock(value);
            status.textContent = t("ratingThanks");
          } else {
            unlock();
            status.textContent = t("networkError");
          }
        });
    });
    buttons.push(button);
    scale.appendChild(button);
  }

  root.append(scale, status);

  if (hint.rating !== null) {
    lock(hint.rating);
    status.textContent = t("ratingThanks");
  }

  return root;
}
