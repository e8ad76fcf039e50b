"""Participants, condition assignment, the submission pipeline, the affect
survey, and the platform facade that appends every action to the event log.

Everything time-related goes through an injected clock and every random
choice through an injected generator, so whole cohort runs replay exactly.
"""

from __future__ import annotations

import hashlib
import random
import threading
from concurrent.futures import Executor
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Callable, Mapping, Sequence

from . import events as ev
from .assignments import Assignment, TestResult
from .errors import BudgetExceeded, DuplicateResponse, NoPendingPrompt, SanitizationEmpty
from .feedback import FeedbackView, assemble_feedback_view, record_feedback_click
from .harness import HarnessConfig, OutcomeClass, evaluate_submission
from .hints import (
    DEFAULT_PARAMS,
    CompletionClient,
    CompletionParams,
    HintRecord,
    build_prompt,
    generate_hint,
    hint_gate,
    record_rating,
)

CONDITIONS = ("control", "experimental")


class AffectState(str, Enum):
    """Survey options, in exactly the order they are presented."""

    Focused = "Focused"
    Anxious = "Anxious"
    Bored = "Bored"
    Confused = "Confused"
    Frustrated = "Frustrated"
    Other = "Other"


AFFECT_ORDER = tuple(state.value for state in AffectState)


@dataclass(frozen=True)
class Participant:
    id: str
    condition: str
    pretest_score: int
    consent: bool = True

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"condition must be one of {CONDITIONS}")
        if self.pretest_score < 0:
            raise ValueError("pretest_score must be >= 0")


def assign_condition(roster: Sequence[str], seed: int) -> dict[str, str]:
    """Balanced random split: seeded shuffle, first half control.

    Group sizes differ by at most one (control gets the extra id when the
    roster is odd).
    """
    if not roster:
        raise ValueError("roster must be non-empty")
    ids = list(roster)
    random.Random(seed).shuffle(ids)
    half = (len(ids) + 1) // 2
    return {pid: ("control" if i < half else "experimental") for i, pid in enumerate(ids)}


def sample_affect_prompt(rng: random.Random, probability: float = 1 / 3) -> bool:
    return rng.random() < probability


@dataclass(frozen=True)
class SubmissionResult:
    submission_id: str
    attempt_index: int
    outcome: OutcomeClass
    score: float
    feedback: FeedbackView
    hint_pending: bool
    affect_prompt: bool


@dataclass
class _SubmissionRecord:
    participant_id: str
    assignment_id: str
    view: FeedbackView
    outcome: OutcomeClass


@dataclass
class _AffectSlot:
    submission_id: str
    answered: bool = False


SKIP_GATE = "gate_closed"
SKIP_BUDGET = "budget_exceeded"
SKIP_CLIENT = "client_error"
SKIP_EMPTY = "empty_response"


@dataclass
class _HintSlot:
    status: str  # "pending" | "ready" | "skipped"
    record: HintRecord | None = None
    reason: str | None = None


class Platform:
    """End-to-end experiment runtime over a fixed assignment bundle."""

    def __init__(
        self,
        assignments: Mapping[str, Assignment],
        backend,
        completion_client: CompletionClient,
        log: ev.EventLog,
        clock: Callable[[], datetime],
        rng: random.Random,
        executor: Executor | None = None,
        locale: str = "pl",
        affect_probability: float = 1 / 3,
        params: CompletionParams = DEFAULT_PARAMS,
        harness_config: HarnessConfig = HarnessConfig(),
        sleep: Callable[[float], None] | None = None,
        retain_code: bool = False,
    ):
        self.assignments = dict(assignments)
        self.backend = backend
        self.completion_client = completion_client
        self.log = log
        self.clock = clock
        self.rng = rng
        self.executor = executor
        self.locale = locale
        self.affect_probability = affect_probability
        self.params = params
        self.harness_config = harness_config
        self.sleep = sleep if sleep is not None else (lambda seconds: None)
        self.retain_code = retain_code

        self.participants: dict[str, Participant] = {}
        self._attempts: dict[tuple[str, str], int] = {}
        self._submissions: dict[str, _SubmissionRecord] = {}
        self._hints: dict[str, HintRecord] = {}
        self._hint_slots: dict[str, _HintSlot] = {}
        self._affect: dict[str, _AffectSlot] = {}
        self._state_lock = threading.Lock()
        self._participant_locks: dict[str, threading.Lock] = {}

    # -- registration --------------------------------------------------------

    def register_participant(self, participant: Participant) -> None:
        if participant.id in self.participants:
            raise ValueError(f"participant {participant.id!r} already registered")
        self.participants[participant.id] = participant
        self.log.append(
            ev.PARTICIPANT_REGISTERED,
            {
                "participant": participant.id,
                "condition": participant.condition,
                "pretest_score": participant.pretest_score,
                "consent": participant.consent,
            },
            self.clock(),
        )

    def _lock_for(self, participant_id: str) -> threading.Lock:
        with self._state_lock:
            return self._participant_locks.setdefault(participant_id, threading.Lock())

    # -- submission pipeline ---------------------------------------------------

    def process_submission(
        self, participant_id: str, assignment_id: str, code: str
    ) -> SubmissionResult:
        participant = self.participants[participant_id]
        if not participant.consent:
            raise PermissionError(f"participant {participant_id!r} did not consent")
        assignment = self.assignments[assignment_id]
        with self._lock_for(participant_id):
            return self._run_pipeline(participant, assignment, code)

    def _run_pipeline(
        self, participant: Participant, assignment: Assignment, code: str
    ) -> SubmissionResult:
        evaluation = evaluate_submission(code, assignment.suite, self.backend, self.harness_config)
        key = (participant.id, assignment.id)
        attempt_index = self._attempts.get(key, 0) + 1
        self._attempts[key] = attempt_index
        submission_id = f"{participant.id}:{assignment.id}:{attempt_index}"

        payload = {
            "participant": participant.id,
            "assignment": assignment.id,
            "attempt_index": attempt_index,
            "outcome": evaluation.outcome.value,
            "score": evaluation.score,
            "code_digest": hashlib.sha256(code.encode("utf-8")).hexdigest(),
            "submission_id": submission_id,
            "hint_task": assignment.hint_policy.experimental,
        }
        if self.retain_code:
            payload["code"] = code
        self.log.append(ev.SUBMISSION, payload, self.clock())

        view = assemble_feedback_view(
            evaluation.outcome, evaluation.compile_outcome, evaluation.results
        )
        with self._state_lock:
            self._submissions[submission_id] = _SubmissionRecord(
                participant_id=participant.id,
                assignment_id=assignment.id,
                view=view,
                outcome=evaluation.outcome,
            )

        hint_pending = self._start_hint(participant, assignment, code, evaluation, submission_id)

        show_affect = sample_affect_prompt(self.rng, self.affect_probability)
        if show_affect:
            self.log.append(
                ev.AFFECT_PROMPT,
                {"participant": participant.id, "submission_id": submission_id},
                self.clock(),
            )
            with self._state_lock:
                self._affect[participant.id] = _AffectSlot(submission_id=submission_id)
        else:
            with self._state_lock:
                self._affect.pop(participant.id, None)

        return SubmissionResult(
            submission_id=submission_id,
            attempt_index=attempt_index,
            outcome=evaluation.outcome,
            score=evaluation.score,
            feedback=view,
            hint_pending=hint_pending,
            affect_prompt=show_affect,
        )

    def _skip_hint(self, participant_id: str, submission_id: str, reason: str) -> None:
        with self._state_lock:
            self._hint_slots[submission_id] = _HintSlot(status="skipped", reason=reason)
        self.log.append(
            ev.HINT_SKIPPED,
            {"participant": participant_id, "submission_id": submission_id, "reason": reason},
            self.clock(),
        )

    def _start_hint(
        self, participant, assignment, code, evaluation, submission_id: str
    ) -> bool:
        if not hint_gate(participant.condition, assignment, evaluation.outcome):
            self._skip_hint(participant.id, submission_id, SKIP_GATE)
            return False
        detail = self._hint_detail(evaluation)
        try:
            prompt = build_prompt(
                assignment, code, evaluation.outcome, detail, self.locale, self.params
            )
        except BudgetExceeded:
            self._skip_hint(participant.id, submission_id, SKIP_BUDGET)
            return False

        with self._state_lock:
            self._hint_slots[submission_id] = _HintSlot(status="pending")
        hint_id = f"h-{submission_id}"

        def job() -> None:
            try:
                record = generate_hint(
                    prompt,
                    self.params,
                    self.completion_client,
                    hint_id=hint_id,
                    submission_id=submission_id,
                    clock=lambda: self.clock().timestamp(),
                    sleep=self.sleep,
                )
            except SanitizationEmpty:
                self._skip_hint(participant.id, submission_id, SKIP_EMPTY)
            except Exception:
                # Transport failures after retries and anything unexpected both
                # degrade to regular feedback; the submission event is already
                # safely in the log.
                self._skip_hint(participant.id, submission_id, SKIP_CLIENT)
            else:
                with self._state_lock:
                    self._hints[hint_id] = record
                    self._hint_slots[submission_id] = _HintSlot(status="ready", record=record)
                self.log.append(
                    ev.HINT_SHOWN,
                    {
                        "hint_id": hint_id,
                        "participant": participant.id,
                        "submission_id": submission_id,
                        "latency_ms": record.latency_ms,
                    },
                    self.clock(),
                )

        if self.executor is not None:
            self.executor.submit(job)
        else:
            job()
        return True

    @staticmethod
    def _hint_detail(evaluation):
        if evaluation.outcome is OutcomeClass.COMPILE_ERROR:
            return evaluation.compile_outcome.diagnostics
        if evaluation.outcome is OutcomeClass.RUNTIME_ERROR:
            return evaluation.fault
        first_failed: TestResult = next(r for r in evaluation.results if not r.passed)
        return first_failed

    # -- hint follow-ups -------------------------------------------------------

    def hint_status(self, submission_id: str) -> _HintSlot | None:
        with self._state_lock:
            return self._hint_slots.get(submission_id)

    def get_submission(self, submission_id: str) -> _SubmissionRecord | None:
        with self._state_lock:
            return self._submissions.get(submission_id)

    def get_hint(self, hint_id: str) -> HintRecord | None:
        with self._state_lock:
            return self._hints.get(hint_id)

    def rate_hint(self, hint_id: str, value: int) -> HintRecord:
        with self._state_lock:
            hint = self._hints.get(hint_id)
        if hint is None:
            raise KeyError(f"no hint {hint_id!r}")
        updated = record_rating(hint, value)
        record = self._submissions[hint.submission_id]
        with self._state_lock:
            self._hints[hint_id] = updated
            self._hint_slots[hint.submission_id] = _HintSlot(status="ready", record=updated)
        self.log.append(
            ev.HINT_RATING,
            {
                "hint_id": hint_id,
                "participant": record.participant_id,
                "submission_id": hint.submission_id,
                "value": value,
            },
            self.clock(),
        )
        return updated

    # -- feedback clicks -------------------------------------------------------

    def record_feedback_click(self, participant_id: str, submission_id: str, spec_name: str):
        record = self._submissions[submission_id]
        click = record_feedback_click(
            record.view, spec_name, participant_id, submission_id, self.clock
        )
        self.log.append(
            ev.FEEDBACK_CLICK,
            {
                "participant": click.participant_id,
                "submission_id": click.submission_id,
                "spec_name": click.spec_name,
            },
            click.timestamp,
        )
        return click

    # -- affect survey ---------------------------------------------------------

    def record_affect(self, participant_id: str, state: str | AffectState):
        state_value = AffectState(state).value
        with self._state_lock:
            slot = self._affect.get(participant_id)
            if slot is None:
                raise NoPendingPrompt(f"no affect prompt pending for {participant_id!r}")
            if slot.answered:
                raise DuplicateResponse(f"prompt for {slot.submission_id} already answered")
            slot.answered = True
        return self.log.append(
            ev.AFFECT_RESPONSE,
            {
                "participant": participant_id,
                "submission_id": slot.submission_id,
                "state": state_value,
            },
            self.clock(),
        )
