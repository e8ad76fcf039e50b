"""Scripted cohort simulator: seeded students working through the bundled
assignments against the mock backend and mock completion client.

This is test scaffolding for producing desk-scale event logs, explicitly not
a model of real students. Every random draw comes from seeded generators and
all time comes from a SimClock, so a given (students, seed) pair always
produces the identical log.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path

from .assignments import Assignment, load_assignment_bundle
from .completion import MockCompletionClient
from .events import EventLog
from .experiment import AFFECT_ORDER, Participant, Platform, assign_condition
from .harness import OutcomeClass
from .mock_backend import MockBackend


class SimClock:
    """Deterministic clock: starts fixed, advances only when told."""

    def __init__(self, start: datetime | None = None):
        self._now = start or datetime(2023, 3, 1, 9, 0, 0, tzinfo=timezone.utc)

    def now(self) -> datetime:
        return self._now

    def advance(self, seconds: float) -> None:
        self._now += timedelta(seconds=seconds)

    def sleep(self, seconds: float) -> None:
        self.advance(seconds)


def default_bundle_path() -> Path:
    return Path(resources.files("gradelab") / "data" / "bundle")


def default_fixtures_path() -> Path:
    return Path(resources.files("gradelab") / "data" / "llm_fixtures")


# Code variants per assignment: a correct solution plus staged bugs. Stage
# order mirrors a student working through the usual wall: syntax first, then
# a crash, then wrong logic, then one remaining detail.
STAGES = ("compile", "runtime", "logic", "partial")

VARIANTS: dict[str, dict[str, str]] = {
    "a01": {
        "correct": (
            "class User {\n"
            "    public string name;\n"
            "    public int age;\n"
            "    public User(string name, int age) { }\n"
            '    public string Describe(string name, int age) { return name + " (" + age + ")"; }\n'
            "}\n"
        ),
        "compile": (
            "class User {\n"
            "    public string name\n"
            "    public int age;\n"
            "    public User(string name, int age) { }\n"
            '    public string Describe(string name, int age) { return name + " (" + age + ")"; }\n'
            "}\n"
        ),
        "runtime": (
            "class User {\n"
            "    public string name;\n"
            "    public int age;\n"
            "    public User(string name, int age) { }\n"
            '    public string Describe(string name, int age) { return name + " (" + age / (age - age) + ")"; }\n'
            "}\n"
        ),
        "logic": (
            "class User {\n"
            "    public string name;\n"
            "    public int age;\n"
            "    public User(string name, int age) { }\n"
            '    public string Describe(string name, int age) { return name + " " + age; }\n'
            "}\n"
        ),
        "partial": (
            "class User {\n"
            "    public string name;\n"
            "    public User(string name, int age) { }\n"
            '    public string Describe(string name, int age) { return name + " (" + age + ")"; }\n'
            "}\n"
        ),
    },
    "a02": {
        "correct": (
            "class Calculator {\n"
            "    public int Add(int a, int b) { return a + b; }\n"
            "    public int Sub(int a, int b) { return a - b; }\n"
            "    public int Mul(int a, int b) { return a * b; }\n"
            "    public int Div(int a, int b) { return a / b; }\n"
            "}\n"
        ),
        "compile": (
            "class Calculator {\n"
            "    public int Add(int a, int b) { return a + b }\n"
            "    public int Sub(int a, int b) { return a - b; }\n"
            "    public int Mul(int a, int b) { return a * b; }\n"
            "    public int Div(int a, int b) { return a / b; }\n"
            "}\n"
        ),
        "runtime": (
            "class Calculator {\n"
            "    public int Add(int a, int b) { return a + b; }\n"
            "    public int Sub(int a, int b) { return a - b; }\n"
            "    public int Mul(int a, int b) { return a * b; }\n"
            "    public int Div(int a, int b) { return a / (b - b); }\n"
            "}\n"
        ),
        "logic": (
            "class Calculator {\n"
            "    public int Add(int a, int b) { return a - b; }\n"
            "    public int Sub(int a, int b) { return a - b; }\n"
            "    public int Mul(int a, int b) { return a * b; }\n"
            "    public int Div(int a, int b) { return a / b; }\n"
            "}\n"
        ),
        "partial": (
            "class Calculator {\n"
            "    public int Add(int a, int b) { return a + b; }\n"
            "    public int Sub(int a, int b) { return a - b; }\n"
            "    public int Mul(int a, int b) { return a * b; }\n"
            "    public int Div(int a, int b) { return a * b; }\n"
            "}\n"
        ),
    },
    "a03": {
        "correct": (
            "class Temperature {\n"
            "    public double CelsiusToFahrenheit(double c) { return c * 9 / 5 + 32; }\n"
            "    public double FahrenheitToCelsius(double f) { return (f - 32) * 5 / 9; }\n"
            "    public bool IsFreezing(double c) { return c <= 0; }\n"
            "}\n"
        ),
        "compile": (
            "class Temperature {\n"
            "    public double CelsiusToFahrenheit(double c { return c * 9 / 5 + 32; }\n"
            "    public double FahrenheitToCelsius(double f) { return (f - 32) * 5 / 9; }\n"
            "    public bool IsFreezing(double c) { return c <= 0; }\n"
            "}\n"
        ),
        "runtime": (
            "class Temperature {\n"
            "    public double CelsiusToFahrenheit(double c) { return c * 9 / 5 + 32; }\n"
            "    public double FahrenheitToCelsius(double f) { return (f - 32) * 5 / 9; }\n"
            "    public bool IsFreezing(double c) { return 1 / 0 < 1; }\n"
            "}\n"
        ),
        "logic": (
            "class Temperature {\n"
            "    public double CelsiusToFahrenheit(double c) { return c * 9 / 5 + 31; }\n"
            "    public double FahrenheitToCelsius(double f) { return (f - 32) * 5 / 9; }\n"
            "    public bool IsFreezing(double c) { return c <= 0; }\n"
            "}\n"
        ),
        "partial": (
            "class Temperature {\n"
            "    public double CelsiusToFahrenheit(double c) { return c * 9 / 5 + 32; }\n"
            "    public double FahrenheitToCelsius(double f) { return (f - 32) * 5 / 9; }\n"
            "    public bool IsFreezing(double c) { return c < 0; }\n"
            "}\n"
        ),
    },
    "a04": {
        "correct": (
            "class TextTools {\n"
            '    public string Greet(string name) { return "Hello, " + name + "!"; }\n'
            '    public string Shout(string s) { return s + "!"; }\n'
            '    public string Tag(string s) { return "<" + s + ">"; }\n'
            "}\n"
        ),
        "compile": (
            "class TextTools {\n"
            '    public string Greet(string name) { return "Hello, " + name + "!"; }\n'
            '    public string Shout(string s) { return s + "!"; }\n'
            '    public string Tag(string s) { return "<" + s + ">"; }\n'
        ),
        "runtime": (
            "class TextTools {\n"
            '    public string Greet(string name) { return "Hello, " + name + "!"; }\n'
            '    public string Shout(string s) { return s + TextTools.Boom(1); }\n'
            '    public string Tag(string s) { return "<" + s + ">"; }\n'
            "    public int Boom(int x) { return x / (x - x); }\n"
            "}\n"
        ),
        "logic": (
            "class TextTools {\n"
            '    public string Greet(string name) { return "Hello " + name + "!"; }\n'
            '    public string Shout(string s) { return s + "!"; }\n'
            '    public string Tag(string s) { return "<" + s + ">"; }\n'
            "}\n"
        ),
        "partial": (
            "class TextTools {\n"
            '    public string Greet(string name) { return "Hello, " + name + "!"; }\n'
            '    public string Shout(string s) { return s + "?"; }\n'
            '    public string Tag(string s) { return "<" + s + ">"; }\n'
            "}\n"
        ),
    },
    "a05": {
        "correct": (
            "class Geometry {\n"
            "    public int RectArea(int w, int h) { return w * h; }\n"
            "    public int RectPerimeter(int w, int h) { return 2 * w + 2 * h; }\n"
            "    public double TriangleArea(double b, double h) { return b * h / 2; }\n"
            "    public bool IsSquare(int w, int h) { return w == h; }\n"
            "}\n"
        ),
        "compile": (
            "class Geometry {\n"
            "    public int RectArea(int w, int h) { return w * h }\n"
            "    public int RectPerimeter(int w, int h) { return 2 * w + 2 * h; }\n"
            "    public double TriangleArea(double b, double h) { return b * h / 2; }\n"
            "    public bool IsSquare(int w, int h) { return w == h; }\n"
            "}\n"
        ),
        "runtime": (
            "class Geometry {\n"
            "    public int RectArea(int w, int h) { return w * h; }\n"
            "    public int RectPerimeter(int w, int h) { return 2 * w + 2 * h; }\n"
            "    public double TriangleArea(double b, double h) { return b * h / 2; }\n"
            "    public bool IsSquare(int w, int h) { return w / (h - h) == 1; }\n"
            "}\n"
        ),
        "logic": (
            "class Geometry {\n"
            "    public int RectArea(int w, int h) { return w * h; }\n"
            "    public int RectPerimeter(int w, int h) { return w + h; }\n"
            "    public double TriangleArea(double b, double h) { return b * h / 2; }\n"
            "    public bool IsSquare(int w, int h) { return w == h; }\n"
            "}\n"
        ),
        "partial": (
            "class Geometry {\n"
            "    public int RectArea(int w, int h) { return w * h; }\n"
            "    public int RectPerimeter(int w, int h) { return 2 * w + 2 * h; }\n"
            "    public double TriangleArea(double b, double h) { return b * h; }\n"
            "    public bool IsSquare(int w, int h) { return w == h; }\n"
            "}\n"
        ),
    },
    "a06": {
        "correct": (
            "class Account {\n"
            "    public string owner;\n"
            "    public bool CanWithdraw(int balance, int amount) { return amount <= balance && amount > 0; }\n"
            "    public double Interest(double balance) { return balance / 20; }\n"
            "}\n"
        ),
        "compile": (
            "class Account {\n"
            "    public string owner\n"
            "    public bool CanWithdraw(int balance, int amount) { return amount <= balance && amount > 0; }\n"
            "    public double Interest(double balance) { return balance / 20; }\n"
            "}\n"
        ),
        "runtime": (
            "class Account {\n"
            "    public string owner;\n"
            "    public bool CanWithdraw(int balance, int amount) { return 1 / (amount - amount) < 1; }\n"
            "    public double Interest(double balance) { return balance / 20; }\n"
            "}\n"
        ),
        "logic": (
            "class Account {\n"
            "    public string owner;\n"
            "    public bool CanWithdraw(int balance, int amount) { return amount <= balance; }\n"
            "    public double Interest(double balance) { return balance / 20; }\n"
            "}\n"
        ),
        "partial": (
            "class Account {\n"
            "    public string owner;\n"
            "    public bool CanWithdraw(int balance, int amount) { return amount <= balance && amount > 0; }\n"
            "    public double Interest(double balance) { return balance / 10; }\n"
            "}\n"
        ),
    },
}

GIVE_UP_AFTER = 6

CLICK_PROBABILITY = {"control": 0.6, "experimental": 0.35}
RATING_WEIGHTS = (1, 1, 2, 3, 3)
AFFECT_WEIGHTS = {  # keyed by presentation order Focused..Other
    "Focused": 55,
    "Anxious": 12,
    "Bored": 4,
    "Confused": 7,
    "Frustrated": 14,
    "Other": 8,
}


@dataclass
class SimReport:
    log_path: Path | None
    n_events: int
    n_submissions: int


def _plan_attempts(rng: random.Random, skill: float, assignment: Assignment) -> list[str]:
    """Stage names for failed attempts, then "correct" unless the student
    gives up."""
    difficulty = 1.0 if assignment.difficulty_tier.value == "capstone" else 0.0
    ceiling = (1.0 - skill) * 5.0 + difficulty
    n_fails = int(rng.uniform(0.0, ceiling + 1.5))
    fails = [STAGES[min(i, len(STAGES) - 1)] for i in range(min(n_fails, GIVE_UP_AFTER))]
    if n_fails >= GIVE_UP_AFTER:
        return fails
    return fails + ["correct"]


def run_simulation(
    students: int = 20,
    seed: int = 0,
    log_path: str | Path | None = None,
    bundle_path: str | Path | None = None,
    affect_probability: float = 1 / 3,
) -> tuple[Platform, SimReport]:
    assignments = load_assignment_bundle(bundle_path or default_bundle_path())
    clock = SimClock()
    platform_rng = random.Random(seed)
    behavior_rng = random.Random(seed * 2 + 1)
    log = EventLog(log_path)
    platform = Platform(
        assignments={a.id: a for a in assignments},
        backend=MockBackend(),
        completion_client=MockCompletionClient(default_fixtures_path()),
        log=log,
        clock=clock.now,
        rng=platform_rng,
        executor=None,
        affect_probability=affect_probability,
        sleep=clock.sleep,
    )

    roster = [f"s{i:02d}" for i in range(1, students + 1)]
    conditions = assign_condition(roster, seed)
    skills = {pid: behavior_rng.uniform(0.1, 0.95) for pid in roster}
    for pid in roster:
        pretest = int(30 + skills[pid] * 60 + behavior_rng.uniform(-5, 5))
        platform.register_participant(
            Participant(id=pid, condition=conditions[pid], pretest_score=pretest)
        )

    n_submissions = 0
    for assignment in assignments:
        variants = VARIANTS[assignment.id]
        for pid in roster:
            plan = _plan_attempts(behavior_rng, skills[pid], assignment)
            for stage in plan:
                clock.advance(behavior_rng.uniform(45.0, 420.0))
                result = platform.process_submission(pid, assignment.id, variants[stage])
                n_submissions += 1

                red = [e for e in result.feedback.test_entries if e.color == "red"]
                if (
                    result.outcome in (OutcomeClass.RUNTIME_ERROR, OutcomeClass.TEST_FAILURE)
                    and red
                    and behavior_rng.random() < CLICK_PROBABILITY[conditions[pid]]
                ):
                    platform.record_feedback_click(pid, result.submission_id, red[0].spec_name)
                    if behavior_rng.random() < 0.1:
                        platform.record_feedback_click(pid, result.submission_id, red[0].spec_name)

                if result.hint_pending:
                    slot = platform.hint_status(result.submission_id)
                    if slot is not None and slot.status == "ready":
                        clock.advance(behavior_rng.uniform(20.0, 60.0))
                        if behavior_rng.random() < 0.9:
                            value = behavior_rng.choices(
                                (1, 2, 3, 4, 5), weights=RATING_WEIGHTS
                            )[0]
                            platform.rate_hint(slot.record.id, value)

                if result.affect_prompt and behavior_rng.random() < 0.85:
                    state = behavior_rng.choices(
                        AFFECT_ORDER, weights=[AFFECT_WEIGHTS[s] for s in AFFECT_ORDER]
                    )[0]
                    platform.record_affect(pid, state)

    log.close()
    report = SimReport(
        log_path=log.path, n_events=len(log.events()), n_submissions=n_submissions
    )
    return platform, report
