"""Shared fixtures: deterministic clock, platform factory, bundle access."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest

from gradelab.assignments import load_assignment_bundle
from gradelab.completion import MockCompletionClient
from gradelab.events import EventLog
from gradelab.experiment import Participant, Platform
from gradelab.mock_backend import MockBackend
from gradelab.simulate import default_bundle_path, default_fixtures_path

START = datetime(2023, 3, 1, 9, 0, tzinfo=timezone.utc)


class TickClock:
    """Fixed start, fixed step per call: timestamps are strictly increasing
    and identical across runs."""

    def __init__(self, start: datetime = START, step: float = 1.0):
        self.now_value = start
        self.step = timedelta(seconds=step)

    def __call__(self) -> datetime:
        value = self.now_value
        self.now_value = value + self.step
        return value

    def sleep(self, seconds: float) -> None:
        self.now_value += timedelta(seconds=seconds)


class ScriptedClient:
    """Completion client that raises the scripted errors in order, then
    returns the canned response for every later call."""

    def __init__(self, errors=(), response="All good: check the <code>;</code> here."):
        self.errors = list(errors)
        self.response = response
        self.calls = 0

    def complete(self, prompt_text: str, params) -> str:
        self.calls += 1
        if self.errors:
            raise self.errors.pop(0)
        return self.response


@pytest.fixture(scope="session")
def bundle():
    return load_assignment_bundle(default_bundle_path())


@pytest.fixture()
def assignments(bundle):
    return {a.id: a for a in bundle}


@pytest.fixture()
def make_platform(assignments):
    logs = []

    def factory(
        *,
        seed=0,
        client=None,
        log_path=None,
        executor=None,
        affect_probability=0.0,
        retain_code=False,
        participants=(("e1", "experimental"), ("c1", "control")),
        clock=None,
        sleep=None,
    ):
        log = EventLog(log_path)
        logs.append(log)
        clock = clock or TickClock()
        platform = Platform(
            assignments=assignments,
            backend=MockBackend(),
            completion_client=client or MockCompletionClient(default_fixtures_path()),
            log=log,
            clock=clock,
            rng=random.Random(seed),
            executor=executor,
            affect_probability=affect_probability,
            retain_code=retain_code,
            sleep=sleep if sleep is not None else clock.sleep,
        )
        for pid, condition in participants:
            platform.register_participant(
                Participant(id=pid, condition=condition, pretest_score=50)
            )
        return platform

    yield factory
    for log in logs:
        log.close()


def events_of_kind(platform, kind):
    return [e for e in platform.log.events() if e.kind == kind]
