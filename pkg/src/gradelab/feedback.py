"""Regular (non-LLM) feedback assembly and feedback-click validation.

Compile errors auto-show their diagnostics and highlight the offending lines;
every other outcome presents the color-coded test list whose red entries can
be clicked open for input/expected details.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Sequence

from .assignments import TestResult
from .errors import InconsistentInputs, NotClickable
from .harness import CompileOutcome, Diagnostic, OutcomeClass


@dataclass(frozen=True)
class TestEntry:
    spec_name: str
    color: str  # "green" | "red"
    details_available: bool
    input_desc: str
    expected_desc: str


@dataclass(frozen=True)
class FeedbackView:
    auto_shown: bool
    highlighted_lines: tuple[int, ...]
    test_entries: tuple[TestEntry, ...]
    compile_messages: tuple[Diagnostic, ...]


@dataclass(frozen=True)
class FeedbackClickEvent:
    participant_id: str
    submission_id: str
    spec_name: str
    timestamp: datetime


def assemble_feedback_view(
    outcome: OutcomeClass,
    compile_outcome: CompileOutcome,
    results: Sequence[TestResult] | None,
) -> FeedbackView:
    if outcome is OutcomeClass.COMPILE_ERROR:
        if compile_outcome.status != "failed" or results:
            raise InconsistentInputs("CompileError view needs a failed compile and no results")
        lines = tuple(sorted({d.line for d in compile_outcome.diagnostics}))
        return FeedbackView(
            auto_shown=True,
            highlighted_lines=lines,
            test_entries=(),
            compile_messages=compile_outcome.diagnostics,
        )
    if compile_outcome.status != "ok" or results is None:
        raise InconsistentInputs(f"{outcome} view needs a successful compile with results")
    entries = tuple(
        TestEntry(
            spec_name=r.spec_name,
            color="green" if r.passed else "red",
            details_available=True,
            input_desc=r.input_desc,
            expected_desc=r.expected_desc,
        )
        for r in results
    )
    return FeedbackView(
        auto_shown=False, highlighted_lines=(), test_entries=entries, compile_messages=()
    )


def record_feedback_click(
    view: FeedbackView,
    spec_name: str,
    participant_id: str,
    submission_id: str,
    clock: Callable[[], datetime],
) -> FeedbackClickEvent:
    """Validate that the click lands on a red entry and build the event; the
    caller appends it to the experiment log (repeat clicks are repeat events)."""
    if view.auto_shown:
        raise NotClickable("compile-error feedback has no clickable entries")
    entry = next((e for e in view.test_entries if e.spec_name == spec_name), None)
    if entry is None:
        raise NotClickable(f"no test entry named {spec_name!r}")
    if entry.color != "red":
        raise NotClickable(f"{spec_name!r} passed; green entries are not clickable")
    return FeedbackClickEvent(
        participant_id=participant_id,
        submission_id=submission_id,
        spec_name=spec_name,
        timestamp=clock(),
    )
