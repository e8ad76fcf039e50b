"""gradelab: an automated programming-assessment platform with declarative
unit tests, outcome-routed feedback, LLM hints under a token budget, A/B
experiment instrumentation, and event-log analytics."""

from .analytics import (
    AttemptCurve,
    BHDecision,
    StatTestResult,
    TrendFit,
    benjamini_hochberg,
    cumulative_success_curve,
    feedback_click_fraction,
    fit_group_attempt_trend,
    mann_whitney_u,
    median_rating_histogram,
    time_to_solve,
)
from .assignments import (
    Assignment,
    HintPolicy,
    TestKind,
    TestResult,
    TestSpec,
    Tier,
    compute_score,
    evaluate_test_spec,
    load_assignment_bundle,
    write_bundle,
)
from .completion import HttpCompletionClient, MockCompletionClient
from .csharp_backend import CSharpBackend, ToolchainConfig
from .events import Event, EventLog, replay_event_log
from .experiment import (
    AffectState,
    Participant,
    Platform,
    SubmissionResult,
    assign_condition,
    sample_affect_prompt,
)
from .feedback import FeedbackView, assemble_feedback_view
from .harness import (
    CompileOutcome,
    Diagnostic,
    HarnessConfig,
    OutcomeClass,
    RuntimeFault,
    classify_outcome,
    compile_submission,
    evaluate_submission,
    run_test_suite,
)
from .hints import (
    CompletionParams,
    HintRecord,
    Prompt,
    Scenario,
    build_prompt,
    estimate_tokens,
    generate_hint,
    hint_gate,
    sanitize_markup,
)
from .mock_backend import MockBackend
from .reporting import analyze_log, build_report
from .simulate import SimClock, run_simulation

__version__ = "0.1.0"

__all__ = [
    "AffectState",
    "Assignment",
    "AttemptCurve",
    "BHDecision",
    "CompileOutcome",
    "CompletionParams",
    "CSharpBackend",
    "Diagnostic",
    "Event",
    "EventLog",
    "FeedbackView",
    "HarnessConfig",
    "HintPolicy",
    "HintRecord",
    "HttpCompletionClient",
    "MockBackend",
    "MockCompletionClient",
    "OutcomeClass",
    "Participant",
    "Platform",
    "Prompt",
    "RuntimeFault",
    "Scenario",
    "SimClock",
    "StatTestResult",
    "SubmissionResult",
    "TestKind",
    "TestResult",
    "TestSpec",
    "Tier",
    "ToolchainConfig",
    "TrendFit",
    "analyze_log",
    "assemble_feedback_view",
    "assign_condition",
    "benjamini_hochberg",
    "build_prompt",
    "build_report",
    "classify_outcome",
    "compile_submission",
    "compute_score",
    "cumulative_success_curve",
    "estimate_tokens",
    "evaluate_submission",
    "evaluate_test_spec",
    "feedback_click_fraction",
    "fit_group_attempt_trend",
    "generate_hint",
    "hint_gate",
    "load_assignment_bundle",
    "mann_whitney_u",
    "median_rating_histogram",
    "replay_event_log",
    "run_simulation",
    "run_test_suite",
    "sample_affect_prompt",
    "sanitize_markup",
    "time_to_solve",
    "write_bundle",
]
