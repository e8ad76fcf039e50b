"""Assignments, declarative test specs and scoring.

An assignment bundle on disk is one directory per assignment:

    <bundle>/<dir>/manifest     JSON: id, title, tier, hint_policy,
                                optional "body"/"tests" file names
                                (default body.md / tests.jsonl)
    <bundle>/<dir>/body.md      assignment text, UTF-8
    <bundle>/<dir>/tests.jsonl  one test spec per line:
                                {"name", "kind", "arguments", "expected"}

Unknown fields anywhere are rejected. A ``.zip`` archive holding the same
layout is accepted in place of a directory.
"""

from __future__ import annotations

import json
import tempfile
import zipfile
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Union

from .errors import (
    EmptyResults,
    InvalidSpec,
    MalformedManifest,
    MemberLookup,
    OversizedBody,
    UnsupportedKind,
)

if TYPE_CHECKING:
    from .harness import ReflectionTarget

Literal = Union[bool, int, float, str]

ACCESS_MODIFIERS = ("public", "private", "protected")

MANIFEST_FIELDS = {"id", "title", "tier", "hint_policy", "body", "tests"}
TEST_FIELDS = {"name", "kind", "arguments", "expected"}


class TestKind(str, Enum):
    CLASS_DEFINED = "class_defined"
    MEMBER_EXISTS = "member_exists"
    CONSTRUCTOR_EXISTS = "constructor_exists"
    METHOD_RETURNS = "method_returns"
    EXPRESSION_EVALUATES = "expression_evaluates"


class Tier(str, Enum):
    STANDARD = "standard"
    CAPSTONE = "capstone"


@dataclass(frozen=True)
class HintPolicy:
    """Per-condition hint enablement for one assignment."""

    control: bool = False
    experimental: bool = False

    def enabled_for(self, condition: str) -> bool:
        if condition == "control":
            return self.control
        if condition == "experimental":
            return self.experimental
        raise ValueError(f"unknown condition {condition!r}")


@dataclass(frozen=True)
class TestSpec:
    name: str
    kind: TestKind
    arguments: tuple[Literal, ...]
    expected: Literal


@dataclass(frozen=True)
class TestResult:
    spec_name: str
    passed: bool
    observed: Literal | None
    input_desc: str
    expected_desc: str


@dataclass(frozen=True)
class Assignment:
    id: str
    title: str
    body: str
    suite: tuple[TestSpec, ...]
    difficulty_tier: Tier
    hint_policy: HintPolicy


def literal_desc(value: Literal | None) -> str:
    """Render a literal the way the C#-speaking UI shows it."""
    if value is None:
        return "absent"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    return str(value)


def structural_eq(a: Literal | None, b: Literal | None) -> bool:
    """Structural equality over literals; bools never equal ints."""
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return a == b


# -- validation -----------------------------------------------------------


def _validate_spec(assignment_id: str, spec: TestSpec) -> None:
    def bad(reason: str) -> InvalidSpec:
        return InvalidSpec(f"assignment {assignment_id!r}, spec {spec.name!r}: {reason}")

    args = spec.arguments
    kind = spec.kind
    if kind == TestKind.CLASS_DEFINED:
        if len(args) != 1 or not isinstance(args[0], str):
            raise bad("class_defined takes exactly one class name")
    elif kind == TestKind.MEMBER_EXISTS:
        if len(args) not in (2, 3) or not all(isinstance(a, str) for a in args):
            raise bad("member_exists takes class name, member name and optional access modifier")
        if len(args) == 3 and args[2] not in ACCESS_MODIFIERS:
            raise bad(f"unknown access modifier {args[2]!r}")
    elif kind == TestKind.CONSTRUCTOR_EXISTS:
        if len(args) < 1 or not all(isinstance(a, str) for a in args):
            raise bad("constructor_exists takes a class name then parameter type names")
    elif kind == TestKind.METHOD_RETURNS:
        if len(args) < 1 or not isinstance(args[0], str) or args[0].count(".") != 1:
            raise bad('method_returns takes a "Class.Method" target then invocation arguments')
    elif kind == TestKind.EXPRESSION_EVALUATES:
        if len(args) != 1 or not isinstance(args[0], str):
            raise bad("expression_evaluates takes exactly one expression string")
    else:  # pragma: no cover - enum is closed
        raise bad(f"unknown kind {kind}")

    if kind in (TestKind.CLASS_DEFINED, TestKind.MEMBER_EXISTS, TestKind.CONSTRUCTOR_EXISTS):
        if not isinstance(spec.expected, bool):
            raise bad("presence checks expect a boolean")


def validate_assignment(assignment: Assignment) -> None:
    if not assignment.suite:
        raise InvalidSpec(f"assignment {assignment.id!r}: empty test suite")
    seen: set[str] = set()
    for spec in assignment.suite:
        if spec.name in seen:
            raise InvalidSpec(f"assignment {assignment.id!r}: duplicate test name {spec.name!r}")
        seen.add(spec.name)
        _validate_spec(assignment.id, spec)
    if assignment.difficulty_tier == Tier.CAPSTONE and (
        assignment.hint_policy.control or assignment.hint_policy.experimental
    ):
        raise InvalidSpec(f"assignment {assignment.id!r}: capstone tasks must disable hints")

    # Body must leave room in the prompt budget even before any code is
    # attached (validated against the compile-error template, default locale).
    from .hints import compile_prompt_fits_budget

    if not compile_prompt_fits_budget(assignment.body):
        raise OversizedBody(
            f"assignment {assignment.id!r}: body too long for the hint prompt budget"
        )


# -- bundle IO ------------------------------------------------------------


def _parse_literal(value: object, where: str) -> Literal:
    if isinstance(value, (bool, int, float, str)):
        return value
    raise InvalidSpec(f"{where}: literal must be a JSON scalar, got {type(value).__name__}")


def _load_manifest(path: Path) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise MalformedManifest(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedManifest(f"{path}: manifest must be a JSON object")
    unknown = set(data) - MANIFEST_FIELDS
    if unknown:
        raise MalformedManifest(f"{path}: unknown fields {sorted(unknown)}")
    for field in ("id", "title", "tier", "hint_policy"):
        if field not in data:
            raise MalformedManifest(f"{path}: missing field {field!r}")
    return data


def _load_tests(path: Path, assignment_id: str) -> tuple[TestSpec, ...]:
    specs = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise MalformedManifest(f"{path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except ValueError as exc:
            raise MalformedManifest(f"{path}:{lineno}: {exc}") from exc
        if not isinstance(row, dict):
            raise MalformedManifest(f"{path}:{lineno}: test spec must be a JSON object")
        unknown = set(row) - TEST_FIELDS
        if unknown:
            raise MalformedManifest(f"{path}:{lineno}: unknown fields {sorted(unknown)}")
        missing = TEST_FIELDS - set(row)
        if missing:
            raise InvalidSpec(
                f"assignment {assignment_id!r}, spec {row.get('name', f'line {lineno}')!r}: "
                f"missing fields {sorted(missing)}"
            )
        where = f"assignment {assignment_id!r}, spec {row['name']!r}"
        try:
            kind = TestKind(row["kind"])
        except ValueError:
            raise InvalidSpec(f"{where}: unknown kind {row['kind']!r}") from None
        if not isinstance(row["arguments"], list):
            raise InvalidSpec(f"{where}: arguments must be a list")
        args = tuple(_parse_literal(a, where) for a in row["arguments"])
        specs.append(
            TestSpec(
                name=str(row["name"]),
                kind=kind,
                arguments=args,
                expected=_parse_literal(row["expected"], where),
            )
        )
    return tuple(specs)


def _load_assignment_dir(directory: Path) -> Assignment:
    manifest_path = directory / "manifest"
    if not manifest_path.is_file():
        raise MalformedManifest(f"{directory}: no manifest file")
    manifest = _load_manifest(manifest_path)

    policy_raw = manifest["hint_policy"]
    if not isinstance(policy_raw, dict) or set(policy_raw) - {"control", "experimental"}:
        raise MalformedManifest(f"{manifest_path}: hint_policy must map conditions to booleans")
    policy = HintPolicy(
        control=bool(policy_raw.get("control", False)),
        experimental=bool(policy_raw.get("experimental", False)),
    )
    try:
        tier = Tier(manifest["tier"])
    except ValueError:
        raise MalformedManifest(f"{manifest_path}: unknown tier {manifest['tier']!r}") from None

    body_path = directory / manifest.get("body", "body.md")
    tests_path = directory / manifest.get("tests", "tests.jsonl")
    if not body_path.is_file():
        raise MalformedManifest(f"{directory}: missing body file {body_path.name}")
    if not tests_path.is_file():
        raise MalformedManifest(f"{directory}: missing tests file {tests_path.name}")

    assignment = Assignment(
        id=str(manifest["id"]),
        title=str(manifest["title"]),
        body=body_path.read_text(encoding="utf-8"),
        suite=_load_tests(tests_path, str(manifest["id"])),
        difficulty_tier=tier,
        hint_policy=policy,
    )
    validate_assignment(assignment)
    return assignment


def load_assignment_bundle(source: str | Path) -> list[Assignment]:
    """Load a bundle directory (or .zip archive) into validated assignments.

    Deterministic: the result is sorted by assignment id.
    """
    source = Path(source)
    if source.is_file() and source.suffix == ".zip":
        with tempfile.TemporaryDirectory(prefix="gradelab-bundle-") as tmp:
            with zipfile.ZipFile(source) as archive:
                archive.extractall(tmp)
            return load_assignment_bundle(tmp)
    if not source.is_dir():
        raise MalformedManifest(f"{source}: bundle directory not found")

    directories = sorted(p for p in source.iterdir() if p.is_dir())
    if not directories:
        raise MalformedManifest(f"{source}: bundle contains no assignment directories")

    assignments = [_load_assignment_dir(d) for d in directories]
    by_id: dict[str, Assignment] = {}
    for assignment in assignments:
        if assignment.id in by_id:
            raise MalformedManifest(f"duplicate assignment id {assignment.id!r}")
        by_id[assignment.id] = assignment
    return sorted(assignments, key=lambda a: a.id)


def write_bundle(assignments: list[Assignment], dest: str | Path) -> None:
    """Serialize assignments back into the on-disk bundle layout."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    for assignment in assignments:
        directory = dest / assignment.id
        directory.mkdir(exist_ok=True)
        manifest = {
            "id": assignment.id,
            "title": assignment.title,
            "tier": assignment.difficulty_tier.value,
            "hint_policy": {
                "control": assignment.hint_policy.control,
                "experimental": assignment.hint_policy.experimental,
            },
        }
        (directory / "manifest").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        (directory / "body.md").write_text(assignment.body, encoding="utf-8")
        lines = [
            json.dumps(
                {
                    "name": spec.name,
                    "kind": spec.kind.value,
                    "arguments": list(spec.arguments),
                    "expected": spec.expected,
                }
            )
            for spec in assignment.suite
        ]
        (directory / "tests.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- evaluation and scoring ------------------------------------------------


def describe_inputs(spec: TestSpec) -> str:
    args = spec.arguments
    kind = spec.kind
    if kind == TestKind.CLASS_DEFINED:
        return f'class "{args[0]}"'
    if kind == TestKind.MEMBER_EXISTS:
        desc = f'class "{args[0]}", member "{args[1]}"'
        if len(args) == 3:
            desc += f", access {args[2]}"
        return desc
    if kind == TestKind.CONSTRUCTOR_EXISTS:
        params = ", ".join(str(a) for a in args[1:]) or "none"
        return f'class "{args[0]}", parameter types: {params}'
    if kind == TestKind.METHOD_RETURNS:
        rendered = ", ".join(literal_desc(a) for a in args[1:])
        return f"{args[0]}({rendered})"
    return str(args[0])


def evaluate_test_spec(spec: TestSpec, target: "ReflectionTarget") -> TestResult:
    """Evaluate one declarative check against compiled code.

    A merely failing check returns ``passed=False``; invocation faults
    propagate for the harness to classify as a runtime error.
    """
    observed: Literal | None
    try:
        if spec.kind == TestKind.CLASS_DEFINED:
            observed = target.is_class_defined(str(spec.arguments[0]))
        elif spec.kind == TestKind.MEMBER_EXISTS:
            access = str(spec.arguments[2]) if len(spec.arguments) == 3 else None
            observed = target.has_member(str(spec.arguments[0]), str(spec.arguments[1]), access)
        elif spec.kind == TestKind.CONSTRUCTOR_EXISTS:
            observed = target.has_constructor(
                str(spec.arguments[0]), [str(a) for a in spec.arguments[1:]]
            )
        elif spec.kind == TestKind.METHOD_RETURNS:
            class_name, method_name = str(spec.arguments[0]).split(".", 1)
            observed = target.invoke(class_name, method_name, list(spec.arguments[1:]))
        elif spec.kind == TestKind.EXPRESSION_EVALUATES:
            observed = target.eval_expression(str(spec.arguments[0]))
        else:  # pragma: no cover - enum is closed
            raise UnsupportedKind(str(spec.kind))
    except MemberLookup:
        observed = None

    return TestResult(
        spec_name=spec.name,
        passed=structural_eq(observed, spec.expected),
        observed=observed,
        input_desc=describe_inputs(spec),
        expected_desc=literal_desc(spec.expected),
    )


def compute_score(results: list[TestResult]) -> float:
    """Percentage of passed tests in [0, 100], rounded half-up to one decimal.

    100.0 is reserved for a full pass: near-misses on very large suites are
    pinned to 99.9 so the score never rounds up to a perfect result.
    """
    if not results:
        raise EmptyResults("a compiled submission always runs a non-empty suite")
    passed = sum(1 for r in results if r.passed)
    if passed == len(results):
        return 100.0
    ratio = Decimal(100 * passed) / Decimal(len(results))
    rounded = float(ratio.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))
    return min(rounded, 99.9)
