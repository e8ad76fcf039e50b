"""Hint gating, prompt construction under a token budget, and hint records.

The prompt text is one fixed template with three slots (assignment text,
student code, scenario trailer) plus a language word. The compile-error
variant is the canonical wording; the runtime-error and failed-test variants
swap only the "why ..." phrase and the trailer section so all three scenarios
stay as close as the platform allows.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Callable, Protocol, Sequence

from .errors import (
    AlreadyRated,
    BudgetExceeded,
    ClientRejected,
    ClientTimeout,
    OutOfRange,
    SanitizationEmpty,
    TransientClientFailure,
)
from .harness import Diagnostic, OutcomeClass

if TYPE_CHECKING:
    from .assignments import Assignment, TestResult

TOKEN_BUDGET = 4000

LANGUAGE_NAMES = {"pl": "Polish", "en": "English"}

RETRY_LIMIT = 2
RETRY_BASE_DELAY = 0.5
TOTAL_TIMEOUT = 30.0


class Scenario(str, Enum):
    compile_error = "compile_error"
    runtime_error = "runtime_error"
    failed_test = "failed_test"


@dataclass(frozen=True)
class CompletionParams:
    model: str = "text-davinci-003"
    temperature: float = 0
    max_tokens: int = 500
    n: int = 1
    top_p: float = 1
    frequency_penalty: float = 0
    presence_penalty: float = 0

    def serialize(self) -> str:
        """The request parameters as a single quoted key/value list."""

        def num(value: float) -> str:
            if isinstance(value, int) or float(value).is_integer():
                return str(int(value))
            return repr(value)

        return (
            f"'model': '{self.model}', "
            f"'temperature': {num(self.temperature)}, "
            f"'max_tokens': {num(self.max_tokens)}, "
            f"'n': {num(self.n)}, "
            f"'top_p': {num(self.top_p)}, "
            f"'frequency_penalty': {num(self.frequency_penalty)}, "
            f"'presence_penalty': {num(self.presence_penalty)}"
        )

    def as_request_body(self, prompt_text: str) -> dict:
        return {
            "model": self.model,
            "prompt": prompt_text,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "n": self.n,
            "top_p": self.top_p,
            "frequency_penalty": self.frequency_penalty,
            "presence_penalty": self.presence_penalty,
        }


DEFAULT_PARAMS = CompletionParams()


@dataclass(frozen=True)
class Prompt:
    scenario: Scenario
    text: str
    token_estimate: int
    locale: str


@dataclass(frozen=True)
class HintRecord:
    id: str
    submission_id: str
    prompt: Prompt
    params: CompletionParams
    response_markup: str
    latency_ms: int
    rating: int | None = None


_TEMPLATE = (
    "I want you to act as a Stackoverflow post that helps me to solve a "
    "programming assignment in C#. I want you to explain in {language} {why}. "
    "Don't write solution in the explanation, but focus on meaningful hints. "
    "I want you to also include the line where the compiler error occurred in "
    "the explanation. I want you to also include a line number for each "
    "detected error in the explanation. To help me better understand your "
    "response, highlight keywords, line numbers, class names, variable names, "
    "messages, line numbers and error names with the <code></code> HTML markup "
    "in the explanation. Programming assignment: ### {assignment} ### C# code: "
    "{code} ### {trailer}"
)

_WHY = {
    Scenario.compile_error: "why this code does not compile",
    Scenario.runtime_error: "why this code throws an exception",
    Scenario.failed_test: "why this code fails the unit test",
}


def format_compiler_errors(diagnostics: Sequence[Diagnostic]) -> str:
    return "\n".join(f"Line {d.line}: error {d.code}: {d.message}" for d in diagnostics)


def _trailer(scenario: Scenario, detail) -> str:
    if scenario is Scenario.compile_error:
        return f"Compiler errors: {format_compiler_errors(detail)}"
    if scenario is Scenario.runtime_error:
        return f"Exception: {detail.exception_type}: {detail.message}"
    return (
        f"Failed unit test: {detail.spec_name} ### Input values: "
        f"{detail.input_desc} ### Expected outcome: {detail.expected_desc}"
    )


def _render(scenario: Scenario, assignment_text: str, code: str, trailer: str, locale: str) -> str:
    return _TEMPLATE.format(
        language=LANGUAGE_NAMES[locale],
        why=_WHY[scenario],
        assignment=assignment_text,
        code=code,
        trailer=trailer,
    )


_token_counter: Callable[[str], int] | None = None


def configure_tokenizer(counter: Callable[[str], int] | None) -> None:
    """Install an exact token counter in place of the byte heuristic."""
    global _token_counter
    _token_counter = counter


def estimate_tokens(text: str) -> int:
    """Token count for budget checks.

    Default heuristic: ceil(utf-8 bytes / 4) + 8 for request framing. When an
    exact tokenizer is configured it replaces the heuristic outright, so the
    estimate never under-reports relative to it.
    """
    if _token_counter is not None:
        return _token_counter(text)
    return math.ceil(len(text.encode("utf-8")) / 4) + 8


_SCENARIO_FOR_OUTCOME = {
    OutcomeClass.COMPILE_ERROR: Scenario.compile_error,
    OutcomeClass.RUNTIME_ERROR: Scenario.runtime_error,
    OutcomeClass.TEST_FAILURE: Scenario.failed_test,
}


def hint_gate(condition: str, assignment: "Assignment", outcome: OutcomeClass) -> bool:
    return (
        condition == "experimental"
        and assignment.hint_policy.enabled_for("experimental")
        and outcome in _SCENARIO_FOR_OUTCOME
    )


def build_prompt(
    assignment: "Assignment",
    code: str,
    outcome: OutcomeClass,
    detail,
    locale: str = "pl",
    params: CompletionParams = DEFAULT_PARAMS,
) -> Prompt:
    """Build the scenario prompt; detail is the diagnostics list, the
    RuntimeFault, or the first failed TestResult depending on outcome."""
    scenario = _SCENARIO_FOR_OUTCOME.get(outcome)
    if scenario is None:
        raise ValueError(f"no hint scenario for outcome {outcome}")
    text = _render(scenario, assignment.body, code, _trailer(scenario, detail), locale)
    estimate = estimate_tokens(text)
    if estimate + params.max_tokens > TOKEN_BUDGET:
        raise BudgetExceeded(
            f"prompt estimate {estimate} + {params.max_tokens} exceeds {TOKEN_BUDGET}"
        )
    return Prompt(scenario=scenario, text=text, token_estimate=estimate, locale=locale)


def compile_prompt_fits_budget(body: str, locale: str = "pl") -> bool:
    """Whether the compile-error prompt over this assignment body, with the
    code and error slots empty, fits the token budget. Bounds body length at
    validation time so a prompt can always be attempted at submission time."""
    text = _render(Scenario.compile_error, body, "", "Compiler errors: ", locale)
    return estimate_tokens(text) + DEFAULT_PARAMS.max_tokens <= TOKEN_BUDGET


# -- response sanitization ----------------------------------------------------

_SCRIPT_STYLE = re.compile(r"<(script|style)\b[^>]*>.*?</\1\s*>", re.IGNORECASE | re.DOTALL)
_TAG = re.compile(r"</?[a-zA-Z][^>]*>|<!--.*?-->", re.DOTALL)
_CODE_TAG = re.compile(r"^</?code>$", re.IGNORECASE)


def sanitize_markup(text: str) -> str:
    """Keep only ``<code>``/``</code>`` spans; drop script/style with their
    contents, strip every other tag, entity-escape the remaining text."""
    text = _SCRIPT_STYLE.sub("", text)
    out: list[str] = []
    pos = 0

    def escape(segment: str) -> str:
        return segment.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")

    for match in _TAG.finditer(text):
        out.append(escape(text[pos : match.start()]))
        tag = match.group(0)
        if _CODE_TAG.match(tag):
            out.append(tag.lower())
        pos = match.end()
    out.append(escape(text[pos:]))
    return "".join(out)


class CompletionClient(Protocol):
    def complete(self, prompt_text: str, params: CompletionParams) -> str:
        """Return raw completion text; raise ClientTimeout / ClientRejected /
        TransientClientFailure on transport problems."""
        ...


def generate_hint(
    prompt: Prompt,
    params: CompletionParams,
    client: CompletionClient,
    hint_id: str,
    submission_id: str,
    clock: Callable[[], float],
    sleep: Callable[[float], None],
) -> HintRecord:
    """Call the completion client with retries and sanitize the response.

    Raises ClientTimeout / ClientRejected when the transport fails for good
    and SanitizationEmpty when nothing displayable survives sanitizing; the
    caller degrades to regular feedback in every error case.
    """
    started = clock()
    attempt = 0
    while True:
        try:
            raw = client.complete(prompt.text, params)
            break
        except ClientRejected:
            raise
        except (ClientTimeout, TransientClientFailure) as exc:
            if attempt >= RETRY_LIMIT:
                raise ClientTimeout(f"gave up after {attempt} retries: {exc}") from exc
            delay = RETRY_BASE_DELAY * (2**attempt)
            if clock() - started + delay > TOTAL_TIMEOUT:
                raise ClientTimeout("total hint timeout exceeded") from exc
            sleep(delay)
            attempt += 1
    markup = sanitize_markup(raw)
    if not markup.strip():
        raise SanitizationEmpty("completion response empty after sanitization")
    latency_ms = int(round((clock() - started) * 1000))
    return HintRecord(
        id=hint_id,
        submission_id=submission_id,
        prompt=prompt,
        params=params,
        response_markup=markup,
        latency_ms=latency_ms,
    )


def record_rating(hint: HintRecord, value: int) -> HintRecord:
    if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
        raise OutOfRange(f"rating must be an integer in 1..5, got {value!r}")
    if hint.rating is not None:
        raise AlreadyRated(f"hint {hint.id} already rated {hint.rating}")
    return replace(hint, rating=value)
