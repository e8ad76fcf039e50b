"""Compilation, suite execution and outcome classification.

Backends plug in through :class:`LanguageBackend`; the shipped ones are the
in-process mock backend (hermetic, used throughout CI) and a subprocess
backend for a real C# toolchain.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol, Sequence, runtime_checkable

from .assignments import Literal, TestResult, TestSpec, evaluate_test_spec
from .errors import InconsistentInputs, InvocationFault


@dataclass(frozen=True)
class Diagnostic:
    line: int
    code: str
    message: str

    def __post_init__(self) -> None:
        if self.line < 1:
            raise ValueError("diagnostic line numbers are 1-based")
        if not self.code:
            raise ValueError("diagnostic code must be non-empty")


@runtime_checkable
class ReflectionTarget(Protocol):
    """Backend-owned handle over successfully compiled code.

    Queries are side-effect free; ``invoke`` runs against fresh state each
    call. Lookup misses raise :class:`~gradelab.errors.MemberLookup`; faults
    inside submitted code raise :class:`~gradelab.errors.InvocationFault`.
    """

    def is_class_defined(self, name: str) -> bool: ...

    def has_member(self, class_name: str, member_name: str, access: str | None) -> bool: ...

    def has_constructor(self, class_name: str, param_types: list[str]) -> bool: ...

    def invoke(self, class_name: str, method_name: str, args: list) -> Literal | None: ...

    def eval_expression(self, expression: str) -> Literal | None: ...


@dataclass(frozen=True)
class CompileOutcome:
    status: str  # "ok" | "failed"
    diagnostics: tuple[Diagnostic, ...]
    target: ReflectionTarget | None = None
    raw_output: str | None = None  # verbatim toolchain output, kept for audit

    def __post_init__(self) -> None:
        if self.status == "ok" and (self.diagnostics or self.target is None):
            raise ValueError("ok outcome carries a target and no diagnostics")
        if self.status == "failed" and (not self.diagnostics or self.target is not None):
            raise ValueError("failed outcome carries diagnostics and no target")


@dataclass(frozen=True)
class RuntimeFault:
    exception_type: str
    message: str
    during: str  # test spec name, or "main"

    def __post_init__(self) -> None:
        if not self.exception_type:
            raise ValueError("exception_type must be non-empty")


class OutcomeClass(str, Enum):
    COMPILE_ERROR = "CompileError"
    RUNTIME_ERROR = "RuntimeError"
    TEST_FAILURE = "TestFailure"
    ALL_PASSED = "AllPassed"


class LanguageBackend(Protocol):
    """Compiles one submission unit and hands back a reflection target."""

    def compile(self, code: str, timeout: float) -> CompileOutcome: ...


@dataclass(frozen=True)
class HarnessConfig:
    compile_timeout: float = 30.0
    test_timeout: float = 5.0


def compile_submission(
    code: str, backend: LanguageBackend, config: HarnessConfig = HarnessConfig()
) -> CompileOutcome:
    if not code:
        raise ValueError("submission code must be non-empty")
    return backend.compile(code, timeout=config.compile_timeout)


def run_test_suite(
    target: ReflectionTarget,
    suite: Sequence[TestSpec],
    config: HarnessConfig = HarnessConfig(),
) -> tuple[list[TestResult], RuntimeFault | None]:
    """Run every spec in order; the first fault is recorded, the rest still run.

    A fault (or per-test timeout overrun) marks that spec failed. The
    in-process backends have bounded evaluation, so the timeout is checked
    after the fact; subprocess backends enforce hard limits themselves.
    """
    from .assignments import describe_inputs, literal_desc

    results: list[TestResult] = []
    fault: RuntimeFault | None = None

    def failed(spec: TestSpec) -> TestResult:
        return TestResult(
            spec_name=spec.name,
            passed=False,
            observed=None,
            input_desc=describe_inputs(spec),
            expected_desc=literal_desc(spec.expected),
        )

    for spec in suite:
        started = time.monotonic()
        spec_fault: RuntimeFault | None = None
        try:
            result = evaluate_test_spec(spec, target)
        except InvocationFault as exc:
            result = failed(spec)
            spec_fault = RuntimeFault(exc.exception_type, exc.message, during=spec.name)
        if spec_fault is None and time.monotonic() - started > config.test_timeout:
            result = failed(spec)
            spec_fault = RuntimeFault(
                "TestTimeout", f"exceeded {config.test_timeout}s", during=spec.name
            )
        if spec_fault is not None and fault is None:
            fault = spec_fault
        results.append(result)
    return results, fault


def classify_outcome(
    compile_outcome: CompileOutcome,
    results: Sequence[TestResult] | None,
    fault: RuntimeFault | None,
) -> OutcomeClass:
    """Four-way classification, priority: compile > runtime > test failure."""
    if compile_outcome.status == "failed":
        if results or fault:
            raise InconsistentInputs("test results supplied with a failed compile")
        return OutcomeClass.COMPILE_ERROR
    if results is None:
        raise InconsistentInputs("a successful compile must run the suite")
    if fault is not None:
        return OutcomeClass.RUNTIME_ERROR
    if any(not r.passed for r in results):
        return OutcomeClass.TEST_FAILURE
    return OutcomeClass.ALL_PASSED


@dataclass(frozen=True)
class SubmissionEvaluation:
    """Everything the harness learned about one submission."""

    compile_outcome: CompileOutcome
    results: tuple[TestResult, ...] = field(default_factory=tuple)
    fault: RuntimeFault | None = None
    outcome: OutcomeClass = OutcomeClass.COMPILE_ERROR
    score: float = 0.0


def evaluate_submission(
    code: str,
    suite: Sequence[TestSpec],
    backend: LanguageBackend,
    config: HarnessConfig = HarnessConfig(),
) -> SubmissionEvaluation:
    """Full pipeline: compile, run the suite, classify, score.

    Non-compiling submissions score 0 (no tests ran).
    """
    from .assignments import compute_score

    compiled = compile_submission(code, backend, config)
    if compiled.status == "failed":
        return SubmissionEvaluation(compile_outcome=compiled)
    assert compiled.target is not None
    results, fault = run_test_suite(compiled.target, suite, config)
    outcome = classify_outcome(compiled, results, fault)
    return SubmissionEvaluation(
        compile_outcome=compiled,
        results=tuple(results),
        fault=fault,
        outcome=outcome,
        score=compute_score(results),
    )
