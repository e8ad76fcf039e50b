/** Browser entry point: reads the participant token and optional server URL,
 * builds the API client, and mounts the session view. The token can be given
 * as `#token=...` in the URL (it is then remembered) or entered at a prompt. */

import { GradelabClient } from "./api.js";
import { createApp } from "./app.js";
import type { Locale } from "./i18n.js";

const TOKEN_KEY = "gradelab-token";

function resolveToken(): string {
  const fromHash = new URLSearchParams(window.location.hash.slice(1)).get("token");
  if (fromHash) {
    window.localStorage.setItem(TOKEN_KEY, fromHash);
    return fromHash;
  }
  const stored = window.localStorage.getItem(TOKEN_KEY);
  if (stored) {
    return stored;
  }
  const entered = window.prompt("Participant token:") ?? "";
  if (entered) {
    window.localStorage.setItem(TOKEN_KEY, entered);
  }
  return entered;
}

function resolveLocale(): Locale {
  const param = new URLSearchParams(window.location.search).get("locale");
  return param === "en" ? "en" : "pl";
}

async function boot(): Promise<void> {
  const baseUrl =
    new URLSearchParams(window.location.search).get("server") ?? window.location.origin;
  const client = new GradelabClient(baseUrl, resolveToken());
  const app = createApp({ doc: document, client, locale: resolveLocale() });
  document.body.appendChild(app.root);
  await app.start();
}

void boot();
