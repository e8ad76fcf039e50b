"""HTTP surface: bearer auth, submission flow, hint polling, ratings,
feedback clicks, affect survey, and the admin report export."""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from gradelab.errors import BackendUnavailable
from gradelab.reporting import build_report
from gradelab.service import create_app
from gradelab.simulate import VARIANTS

TOKENS = {"tok-e1": "e1", "tok-c1": "c1"}
ADMIN = "tok-admin"


def auth(token: str) -> dict[str, str]:
    return {"Authorization": f"Bearer {token}"}


class ManualExecutor:
    """Collects submitted jobs; nothing runs until run_all is called."""

    def __init__(self):
        self.jobs = []

    def submit(self, fn, *args, **kwargs):
        self.jobs.append((fn, args, kwargs))

    def run_all(self):
        while self.jobs:
            fn, args, kwargs = self.jobs.pop(0)
            fn(*args, **kwargs)


@pytest.fixture()
def service(make_platform):
    def factory(**kwargs):
        platform = make_platform(**kwargs)
        app = create_app(platform, TOKENS, ADMIN)
        return TestClient(app), platform

    return factory


def submit(client, token, assignment_id, code):
    return client.post(
        "/v1/submissions",
        json={"assignment_id": assignment_id, "code": code},
        headers=auth(token),
    )


# -- auth ------------------------------------------------------------------------


@pytest.mark.parametrize(
    "headers",
    [
        {},
        {"Authorization": "Token tok-e1"},
        {"Authorization": "Bearer nope"},
    ],
    ids=["missing", "wrong-scheme", "unknown-token"],
)
def test_participant_endpoints_require_token(service, headers):
    client, _ = service()
    assert client.get("/v1/assignments", headers=headers).status_code == 401


def test_admin_report_rejects_participant_tokens(service):
    client, _ = service()
    assert client.get("/v1/admin/report", headers=auth("tok-e1")).status_code == 403
    assert client.get("/v1/admin/report").status_code == 403


# -- assignment listing ------------------------------------------------------------


def test_list_assignments_sorted_with_fields(service, assignments):
    client, _ = service()
    response = client.get("/v1/assignments", headers=auth("tok-e1"))
    assert response.status_code == 200
    listed = response.json()
    assert [item["id"] for item in listed] == sorted(assignments)
    for item in listed:
        assignment = assignments[item["id"]]
        assert item["title"] == assignment.title
        assert item["tier"] == assignment.difficulty_tier.value
        assert item["n_tests"] == len(assignment.suite)
        assert "body" not in item


def test_get_assignment_detail(service, assignments):
    client, _ = service()
    response = client.get("/v1/assignments/a01", headers=auth("tok-e1"))
    assert response.status_code == 200
    detail = response.json()
    assert detail["id"] == "a01"
    assert detail["body"] == assignments["a01"].body
    assert client.get("/v1/assignments/zz", headers=auth("tok-e1")).status_code == 404


# -- submissions --------------------------------------------------------------------


def test_submit_correct_solution(service):
    client, _ = service()
    response = submit(client, "tok-e1", "a01", VARIANTS["a01"]["correct"])
    assert response.status_code == 200
    body = response.json()
    assert body["submission_id"] == "e1:a01:1"
    assert body["attempt_index"] == 1
    assert body["outcome"] == "AllPassed"
    assert body["score"] == 100.0
    assert body["hint_pending"] is False
    assert body["affect_prompt"] is False
    feedback = body["feedback"]
    assert feedback["auto_shown"] is False
    assert feedback["highlighted_lines"] == []
    assert feedback["compile_messages"] == []
    assert feedback["test_entries"]
    assert all(entry["color"] == "green" for entry in feedback["test_entries"])


def test_submit_compile_error_feedback(service):
    client, _ = service()
    response = submit(client, "tok-e1", "a01", VARIANTS["a01"]["compile"])
    body = response.json()
    assert body["outcome"] == "CompileError"
    assert body["score"] == 0.0
    feedback = body["feedback"]
    assert feedback["auto_shown"] is True
    assert feedback["test_entries"] == []
    assert feedback["compile_messages"]
    first = feedback["compile_messages"][0]
    assert set(first) == {"line", "code", "message"}
    assert feedback["highlighted_lines"] == sorted(
        {message["line"] for message in feedback["compile_messages"]}
    )


def test_submit_attempt_indices_increment(service):
    client, _ = service()
    first = submit(client, "tok-e1", "a01", VARIANTS["a01"]["logic"]).json()
    second = submit(client, "tok-e1", "a01", VARIANTS["a01"]["correct"]).json()
    assert first["attempt_index"] == 1
    assert second["attempt_index"] == 2
    assert second["submission_id"] == "e1:a01:2"


def test_submit_unknown_assignment_404(service):
    client, _ = service()
    assert submit(client, "tok-e1", "zz", "class X {}").status_code == 404


def test_submit_blank_code_422(service):
    client, _ = service()
    assert submit(client, "tok-e1", "a01", "   \n\t").status_code == 422


def test_submit_missing_fields_rejected(service):
    client, _ = service()
    response = client.post("/v1/submissions", json={"code": "x"}, headers=auth("tok-e1"))
    assert response.status_code == 422


def test_submit_backend_unavailable_503(service):
    client, platform = service()

    class DeadBackend:
        def compile(self, code, timeout=30.0):
            raise BackendUnavailable("toolchain missing")

    platform.backend = DeadBackend()
    response = submit(client, "tok-e1", "a01", VARIANTS["a01"]["correct"])
    assert response.status_code == 503
    assert "toolchain missing" in response.json()["detail"]


# -- hint polling --------------------------------------------------------------------


def test_hint_ready_inline(service):
    client, _ = service()
    body = submit(client, "tok-e1", "a02", VARIANTS["a02"]["logic"]).json()
    assert body["hint_pending"] is True
    response = client.get(f"/v1/submissions/{body['submission_id']}/hint", headers=auth("tok-e1"))
    assert response.status_code == 200
    hint = response.json()
    assert hint["status"] == "ready"
    assert hint["hint_id"] == f"h-{body['submission_id']}"
    assert hint["markup"]
    assert isinstance(hint["latency_ms"], int)
    assert hint["rating"] is None


def test_hint_pending_until_executor_runs(service):
    executor = ManualExecutor()
    client, _ = service(executor=executor)
    body = submit(client, "tok-e1", "a02", VARIANTS["a02"]["logic"]).json()
    assert body["hint_pending"] is True
    url = f"/v1/submissions/{body['submission_id']}/hint"
    pending = client.get(url, headers=auth("tok-e1"))
    assert pending.status_code == 202
    assert pending.json() == {"status": "pending"}
    executor.run_all()
    ready = client.get(url, headers=auth("tok-e1"))
    assert ready.status_code == 200
    assert ready.json()["status"] == "ready"


def test_hint_skipped_for_control_204(service):
    client, _ = service()
    body = submit(client, "tok-c1", "a02", VARIANTS["a02"]["logic"]).json()
    assert body["hint_pending"] is False
    response = client.get(f"/v1/submissions/{body['submission_id']}/hint", headers=auth("tok-c1"))
    assert response.status_code == 204
    assert response.content == b""


def test_hint_unknown_submission_404_foreign_403(service):
    client, _ = service()
    body = submit(client, "tok-e1", "a02", VARIANTS["a02"]["logic"]).json()
    url = f"/v1/submissions/{body['submission_id']}/hint"
    assert client.get("/v1/submissions/e1:a02:9/hint", headers=auth("tok-e1")).status_code == 404
    assert client.get(url, headers=auth("tok-c1")).status_code == 403


def test_submission_returns_while_completion_blocked(service):
    release = threading.Event()

    class BlockingClient:
        def complete(self, prompt_text, params):
            release.wait(10)
            return "Look at the <code>return</code> values again."

    with ThreadPoolExecutor(max_workers=1) as pool:
        client, _ = service(client=BlockingClient(), executor=pool)
        body = submit(client, "tok-e1", "a02", VARIANTS["a02"]["logic"]).json()
        url = f"/v1/submissions/{body['submission_id']}/hint"
        assert body["hint_pending"] is True
        assert client.get(url, headers=auth("tok-e1")).status_code == 202
        release.set()
        deadline = time.monotonic() + 5
        while time.monotonic() < deadline:
            response = client.get(url, headers=auth("tok-e1"))
            if response.status_code == 200:
                break
            time.sleep(0.01)
        assert response.status_code == 200
        assert "return" in response.json()["markup"]


# -- ratings --------------------------------------------------------------------------


@pytest.fixture()
def rated_hint(service):
    client, platform = service()
    body = submit(client, "tok-e1", "a02", VARIANTS["a02"]["logic"]).json()
    hint = client.get(
        f"/v1/submissions/{body['submission_id']}/hint", headers=auth("tok-e1")
    ).json()
    return client, platform, hint["hint_id"]


def test_rating_roundtrip(rated_hint):
    client, platform, hint_id = rated_hint
    response = client.post(
        f"/v1/hints/{hint_id}/rating", json={"value": 4}, headers=auth("tok-e1")
    )
    assert response.status_code == 200
    assert response.json() == {"hint_id": hint_id, "rating": 4}
    hint = client.get("/v1/submissions/e1:a02:1/hint", headers=auth("tok-e1")).json()
    assert hint["rating"] == 4


def test_rating_unknown_hint_404(rated_hint):
    client, _, _ = rated_hint
    response = client.post("/v1/hints/h-zz/rating", json={"value": 4}, headers=auth("tok-e1"))
    assert response.status_code == 404


def test_rating_out_of_range_422(rated_hint):
    client, platform, hint_id = rated_hint
    response = client.post(
        f"/v1/hints/{hint_id}/rating", json={"value": 0}, headers=auth("tok-e1")
    )
    assert response.status_code == 422
    assert not [e for e in platform.log.events() if e.kind == "hint_rating"]


def test_rating_duplicate_409(rated_hint):
    client, _, hint_id = rated_hint
    assert (
        client.post(f"/v1/hints/{hint_id}/rating", json={"value": 5}, headers=auth("tok-e1"))
        .status_code
        == 200
    )
    response = client.post(
        f"/v1/hints/{hint_id}/rating", json={"value": 1}, headers=auth("tok-e1")
    )
    assert response.status_code == 409


def test_rating_foreign_hint_403(rated_hint):
    client, _, hint_id = rated_hint
    response = client.post(
        f"/v1/hints/{hint_id}/rating", json={"value": 3}, headers=auth("tok-c1")
    )
    assert response.status_code == 403


# -- feedback clicks ---------------------------------------------------------------------


def test_feedback_click_created_and_logged(service):
    client, platform = service()
    body = submit(client, "tok-e1", "a02", VARIANTS["a02"]["logic"]).json()
    red = next(e["spec_name"] for e in body["feedback"]["test_entries"] if e["color"] == "red")
    response = client.post(
        f"/v1/submissions/{body['submission_id']}/feedback-clicks",
        json={"spec_name": red},
        headers=auth("tok-e1"),
    )
    assert response.status_code == 201
    assert response.json() == {"submission_id": body["submission_id"], "spec_name": red}
    clicks = [e for e in platform.log.events() if e.kind == "feedback_click"]
    assert len(clicks) == 1
    assert clicks[0].payload["spec_name"] == red


def test_feedback_click_green_409(service):
    client, _ = service()
    body = submit(client, "tok-e1", "a02", VARIANTS["a02"]["logic"]).json()
    green = next(e["spec_name"] for e in body["feedback"]["test_entries"] if e["color"] == "green")
    response = client.post(
        f"/v1/submissions/{body['submission_id']}/feedback-clicks",
        json={"spec_name": green},
        headers=auth("tok-e1"),
    )
    assert response.status_code == 409


def test_feedback_click_foreign_or_unknown(service):
    client, _ = service()
    body = submit(client, "tok-e1", "a02", VARIANTS["a02"]["logic"]).json()
    url = f"/v1/submissions/{body['submission_id']}/feedback-clicks"
    assert client.post(url, json={"spec_name": "X"}, headers=auth("tok-c1")).status_code == 403
    assert (
        client.post(
            "/v1/submissions/e1:a02:9/feedback-clicks",
            json={"spec_name": "X"},
            headers=auth("tok-e1"),
        ).status_code
        == 404
    )


# -- affect survey --------------------------------------------------------------------------


def test_affect_flow(service):
    client, _ = service(affect_probability=1.0)
    body = submit(client, "tok-e1", "a01", VARIANTS["a01"]["correct"]).json()
    assert body["affect_prompt"] is True
    response = client.post("/v1/affect", json={"state": "Focused"}, headers=auth("tok-e1"))
    assert response.status_code == 201
    assert response.json() == {"state": "Focused", "submission_id": body["submission_id"]}
    duplicate = client.post("/v1/affect", json={"state": "Bored"}, headers=auth("tok-e1"))
    assert duplicate.status_code == 409


def test_affect_unknown_state_422(service):
    client, _ = service(affect_probability=1.0)
    submit(client, "tok-e1", "a01", VARIANTS["a01"]["correct"])
    response = client.post("/v1/affect", json={"state": "Sleepy"}, headers=auth("tok-e1"))
    assert response.status_code == 422


def test_affect_none_pending_409(service):
    client, _ = service()
    submit(client, "tok-e1", "a01", VARIANTS["a01"]["correct"])
    response = client.post("/v1/affect", json={"state": "Focused"}, headers=auth("tok-e1"))
    assert response.status_code == 409


# -- admin report -----------------------------------------------------------------------------


def test_admin_report_matches_offline_build(service):
    client, platform = service()
    submit(client, "tok-e1", "a01", VARIANTS["a01"]["logic"])
    submit(client, "tok-e1", "a01", VARIANTS["a01"]["correct"])
    submit(client, "tok-c1", "a01", VARIANTS["a01"]["correct"])
    response = client.get("/v1/admin/report", headers=auth(ADMIN))
    assert response.status_code == 200
    exported = response.json()
    offline = build_report(platform.log.events())
    assert set(exported) == {"report.json", "curves.csv", "table1.csv", "fig1.csv"}
    assert exported == offline
    assert json.loads(exported["report.json"])["meta"]["n_events"] == len(platform.log.events())


def test_admin_report_replays_log_file(service, tmp_path):
    log_path = tmp_path / "events.jsonl"
    client, platform = service(log_path=log_path)
    submit(client, "tok-e1", "a02", VARIANTS["a02"]["logic"])
    response = client.get("/v1/admin/report", headers=auth(ADMIN))
    assert response.status_code == 200
    assert response.json() == build_report(platform.log.events())


def test_admin_report_corrupt_log_409(service, tmp_path):
    log_path = tmp_path / "events.jsonl"
    client, _ = service(log_path=log_path)
    submit(client, "tok-e1", "a01", VARIANTS["a01"]["correct"])
    with log_path.open("a", encoding="utf-8") as handle:
        handle.write("{not json\n")
    response = client.get("/v1/admin/report", headers=auth(ADMIN))
    assert response.status_code == 409
    assert "log snapshot unavailable" in response.json()["detail"]
