"""HTTP API over the platform, versioned under /v1.

Auth is a static token table: each participant token maps to a participant
id, plus one admin token for the report export. Submission handling returns
as soon as grading finishes; hint generation continues on the platform's
executor and is polled via GET /v1/submissions/{id}/hint (202 while pending,
200 when ready, 204 when skipped).
"""

from __future__ import annotations

from typing import Mapping

from fastapi import Depends, FastAPI, Header, HTTPException, Response
from pydantic import BaseModel

from . import events as ev
from .errors import (
    AlreadyRated,
    BackendUnavailable,
    DuplicateResponse,
    NoPendingPrompt,
    NotClickable,
    OutOfRange,
)
from .experiment import AffectState, Platform
from .feedback import FeedbackView
from .reporting import build_report


class SubmitRequest(BaseModel):
    assignment_id: str
    code: str


class RatingRequest(BaseModel):
    value: int


class ClickRequest(BaseModel):
    spec_name: str


class AffectRequest(BaseModel):
    state: str


def _view_dict(view: FeedbackView) -> dict:
    return {
        "auto_shown": view.auto_shown,
        "highlighted_lines": list(view.highlighted_lines),
        "compile_messages": [
            {"line": d.line, "code": d.code, "message": d.message}
            for d in view.compile_messages
        ],
        "test_entries": [
            {
                "spec_name": e.spec_name,
                "color": e.color,
                "details_available": e.details_available,
                "input_desc": e.input_desc,
                "expected_desc": e.expected_desc,
            }
            for e in view.test_entries
        ],
    }


def create_app(
    platform: Platform,
    participant_tokens: Mapping[str, str],
    admin_token: str,
) -> FastAPI:
    app = FastAPI(title="gradelab", version="1")

    def participant_id(authorization: str | None = Header(default=None)) -> str:
        if authorization is None or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        token = authorization.removeprefix("Bearer ")
        pid = participant_tokens.get(token)
        if pid is None or pid not in platform.participants:
            raise HTTPException(status_code=401, detail="unknown token")
        return pid

    def require_admin(authorization: str | None = Header(default=None)) -> None:
        if authorization != f"Bearer {admin_token}":
            raise HTTPException(status_code=403, detail="admin token required")

    def owned_submission(submission_id: str, pid: str):
        record = platform.get_submission(submission_id)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown submission")
        if record.participant_id != pid:
            raise HTTPException(status_code=403, detail="not your submission")
        return record

    @app.get("/v1/assignments")
    def list_assignments(pid: str = Depends(participant_id)):
        return [
            {
                "id": a.id,
                "title": a.title,
                "tier": a.difficulty_tier.value,
                "n_tests": len(a.suite),
            }
            for a in sorted(platform.assignments.values(), key=lambda a: a.id)
        ]

    @app.get("/v1/assignments/{assignment_id}")
    def get_assignment(assignment_id: str, pid: str = Depends(participant_id)):
        assignment = platform.assignments.get(assignment_id)
        if assignment is None:
            raise HTTPException(status_code=404, detail="unknown assignment")
        return {
            "id": assignment.id,
            "title": assignment.title,
            "body": assignment.body,
            "tier": assignment.difficulty_tier.value,
            "n_tests": len(assignment.suite),
        }

    @app.post("/v1/submissions")
    def submit(request: SubmitRequest, pid: str = Depends(participant_id)):
        if request.assignment_id not in platform.assignments:
            raise HTTPException(status_code=404, detail="unknown assignment")
        if not request.code.strip():
            raise HTTPException(status_code=422, detail="empty code")
        try:
            result = platform.process_submission(pid, request.assignment_id, request.code)
        except BackendUnavailable as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc
        return {
            "submission_id": result.submission_id,
            "attempt_index": result.attempt_index,
            "outcome": result.outcome.value,
            "score": result.score,
            "feedback": _view_dict(result.feedback),
            "hint_pending": result.hint_pending,
            "affect_prompt": result.affect_prompt,
        }

    @app.get("/v1/submissions/{submission_id}/hint")
    def get_hint(submission_id: str, response: Response, pid: str = Depends(participant_id)):
        owned_submission(submission_id, pid)
        slot = platform.hint_status(submission_id)
        if slot is None:
            raise HTTPException(status_code=404, detail="no hint for this submission")
        if slot.status == "pending":
            response.status_code = 202
            return {"status": "pending"}
        if slot.status == "skipped":
            return Response(status_code=204)
        record = slot.record
        return {
            "status": "ready",
            "hint_id": record.id,
            "markup": record.response_markup,
            "latency_ms": record.latency_ms,
            "rating": record.rating,
        }

    @app.post("/v1/hints/{hint_id}/rating")
    def rate_hint(hint_id: str, request: RatingRequest, pid: str = Depends(participant_id)):
        hint = platform.get_hint(hint_id)
        if hint is None:
            raise HTTPException(status_code=404, detail="unknown hint")
        owned_submission(hint.submission_id, pid)
        try:
            updated = platform.rate_hint(hint_id, request.value)
        except OutOfRange as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except AlreadyRated as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"hint_id": hint_id, "rating": updated.rating}

    @app.post("/v1/submissions/{submission_id}/feedback-clicks", status_code=201)
    def feedback_click(
        submission_id: str, request: ClickRequest, pid: str = Depends(participant_id)
    ):
        owned_submission(submission_id, pid)
        try:
            click = platform.record_feedback_click(pid, submission_id, request.spec_name)
        except NotClickable as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"submission_id": submission_id, "spec_name": click.spec_name}

    @app.post("/v1/affect", status_code=201)
    def affect(request: AffectRequest, pid: str = Depends(participant_id)):
        try:
            state = AffectState(request.state)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=f"unknown state {request.state!r}") from exc
        try:
            event = platform.record_affect(pid, state)
        except (NoPendingPrompt, DuplicateResponse) as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"state": state.value, "submission_id": event.payload["submission_id"]}

    @app.get("/v1/admin/report")
    def admin_report(_: None = Depends(require_admin)):
        try:
            if platform.log.path is not None:
                events = ev.replay_event_log(platform.log.path)
            else:
                events = platform.log.events()
            return build_report(events)
        except Exception as exc:
            raise HTTPException(status_code=409, detail=f"log snapshot unavailable: {exc}") from exc

    return app
