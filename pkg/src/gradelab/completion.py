"""Completion clients: an OpenAI-compatible HTTP client and a fixture-backed
mock for hermetic runs.

The HTTP client does a single request per call; retry policy lives in the
hint engine so both clients behave identically under failure.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import httpx

from .errors import ClientRejected, ClientTimeout, TransientClientFailure
from .hints import CompletionParams


def prompt_digest(prompt_text: str) -> str:
    return hashlib.sha256(prompt_text.encode("utf-8")).hexdigest()[:16]


class HttpCompletionClient:
    """Speaks the text-completions endpoint of an OpenAI-compatible API."""

    def __init__(self, base_url: str, api_key: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout

    def complete(self, prompt_text: str, params: CompletionParams) -> str:
        try:
            response = httpx.post(
                f"{self.base_url}/completions",
                json=params.as_request_body(prompt_text),
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
        except httpx.TimeoutException as exc:
            raise ClientTimeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise TransientClientFailure(str(exc)) from exc
        if response.status_code == 429 or response.status_code >= 500:
            raise TransientClientFailure(f"status {response.status_code}")
        if response.status_code >= 400:
            raise ClientRejected(f"status {response.status_code}: {response.text[:200]}")
        try:
            return response.json()["choices"][0]["text"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ClientRejected(f"malformed completion response: {exc}") from exc


class MockCompletionClient:
    """Deterministic client reading fixtures keyed by prompt digest.

    Looks for ``<digest>.txt`` in the fixture directory, then ``default.txt``,
    then falls back to a synthesized deterministic response so mock-mode runs
    never depend on network or fixture coverage.
    """

    def __init__(self, fixtures_dir: str | Path | None = None):
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir else None

    def complete(self, prompt_text: str, params: CompletionParams) -> str:
        digest = prompt_digest(prompt_text)
        if self.fixtures_dir is not None:
            specific = self.fixtures_dir / f"{digest}.txt"
            if specific.is_file():
                return specific.read_text(encoding="utf-8")
            default = self.fixtures_dir / "default.txt"
            if default.is_file():
                return default.read_text(encoding="utf-8")
        return (
            f"Check the highlighted part of your solution near <code>{digest[:8]}</code>; "
            "compare what the failing check expects with what your code produces."
        )
