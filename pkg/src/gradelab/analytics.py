"""Statistical methods and derived metrics, all pure functions over a
replayed event sequence.

Conventions, fixed here and relied on by the report writer:
  - the Mann-Whitney statistic is the U of the first sample, reported as W;
  - "success" means score exactly 100;
  - group comparisons pass the experimental sample first;
  - percentages are rounded half-up to one decimal at the reporting boundary.
"""

from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import events as ev
from .errors import DegenerateDesign, EmptySample, InvalidP, InvalidQ, NoData
from .events import Event
from .experiment import AFFECT_ORDER
from .harness import OutcomeClass

EXACT_LIMIT = 12

# Table rows are reported in this order.
AFFECT_TEST_ORDER = ("Focused", "Frustrated", "Anxious", "Confused", "Bored")

CLICK_ELIGIBLE_OUTCOMES = {OutcomeClass.RUNTIME_ERROR.value, OutcomeClass.TEST_FAILURE.value}


def round1(value: float | Decimal) -> float:
    """Half-up rounding to one decimal, immune to binary float artifacts."""
    return float(Decimal(str(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def _pct(numerator: int, denominator: int) -> float:
    return round1(Decimal(100 * numerator) / Decimal(denominator))


# -- Mann-Whitney U -----------------------------------------------------------


@dataclass(frozen=True)
class StatTestResult:
    statistic: float  # U of the first sample, reported as W
    p_value: float
    n_a: int
    n_b: int
    method: str  # "exact" | "normal_approx"

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p_value out of [0, 1]")
        if not 0.0 <= self.statistic <= self.n_a * self.n_b:
            raise ValueError("statistic out of [0, n_a*n_b]")


def _u2_of(sample_a: Sequence[float], sample_b: Sequence[float]) -> int:
    """Twice the U statistic of sample_a (integer-exact even with ties)."""
    u2 = 0
    for a in sample_a:
        for b in sample_b:
            if a > b:
                u2 += 2
            elif a == b:
                u2 += 1
    return u2


def mann_whitney_u(
    sample_a: Sequence[float], sample_b: Sequence[float], exact_limit: int = EXACT_LIMIT
) -> StatTestResult:
    """Two-sided Mann-Whitney U.

    statistic = #{(a, b): a > b} + 0.5 * #{(a, b): a = b}. Small pooled
    samples (n_a + n_b <= exact_limit) get an exact permutation p-value by
    enumerating every labeling, which stays correct under ties; larger
    samples use the tie-corrected normal approximation with a +-0.5
    continuity correction.
    """
    if not sample_a or not sample_b:
        raise EmptySample("both samples must be non-empty")
    n_a, n_b = len(sample_a), len(sample_b)
    u2_obs = _u2_of(sample_a, sample_b)

    if n_a + n_b <= exact_limit:
        pooled = list(sample_a) + list(sample_b)
        indices = range(len(pooled))
        center2 = n_a * n_b  # twice the null mean of U
        observed_dev = abs(u2_obs - center2)
        extreme = 0
        total = 0
        for combo in itertools.combinations(indices, n_a):
            in_a = set(combo)
            a_vals = [pooled[i] for i in combo]
            b_vals = [pooled[i] for i in indices if i not in in_a]
            if abs(_u2_of(a_vals, b_vals) - center2) >= observed_dev:
                extreme += 1
            total += 1
        return StatTestResult(
            statistic=u2_obs / 2,
            p_value=extreme / total,
            n_a=n_a,
            n_b=n_b,
            method="exact",
        )

    pooled = sorted(list(sample_a) + list(sample_b))
    n = n_a + n_b
    tie_term = 0.0
    for _, group in itertools.groupby(pooled):
        t = len(list(group))
        tie_term += t**3 - t
    variance = (n_a * n_b / 12) * ((n + 1) - tie_term / (n * (n - 1)))
    u = u2_obs / 2
    mean = n_a * n_b / 2
    if variance <= 0:
        return StatTestResult(statistic=u, p_value=1.0, n_a=n_a, n_b=n_b, method="normal_approx")
    z = max(abs(u - mean) - 0.5, 0.0) / math.sqrt(variance)
    p = min(1.0, math.erfc(z / math.sqrt(2)))
    return StatTestResult(statistic=u, p_value=p, n_a=n_a, n_b=n_b, method="normal_approx")


# -- Benjamini-Hochberg -------------------------------------------------------


@dataclass(frozen=True)
class BHRow:
    label: str
    p: float
    threshold: float
    rejected: bool


@dataclass(frozen=True)
class BHDecision:
    q: float
    ranked: tuple[BHRow, ...]


def benjamini_hochberg(labeled_p: Sequence[tuple[str, float]], q: float) -> BHDecision:
    """Step-up FDR control: sort ascending by p (ties broken by label),
    threshold_i = i/m * q, reject every rank up to the largest i with
    p_(i) <= threshold_i.

    Thresholds are computed in exact rational arithmetic and rounded once,
    so a decimal q yields the correctly rounded decimal thresholds instead
    of accumulating two float rounding errors.
    """
    if not 0 < q < 1:
        raise InvalidQ(f"q must be in (0, 1), got {q}")
    for label, p in labeled_p:
        if not 0.0 <= p <= 1.0:
            raise InvalidP(f"p for {label!r} out of [0, 1]: {p}")
    ordered = sorted(labeled_p, key=lambda lp: (lp[1], lp[0]))
    m = len(ordered)
    q_exact = Fraction(str(q))
    thresholds = [float(i * q_exact / m) for i in range(1, m + 1)]
    cutoff = 0
    for i, (_, p) in enumerate(ordered, start=1):
        if p <= thresholds[i - 1]:
            cutoff = i
    rows = tuple(
        BHRow(label=label, p=p, threshold=thresholds[i - 1], rejected=i <= cutoff)
        for i, (label, p) in enumerate(ordered, start=1)
    )
    return BHDecision(q=q, ranked=rows)


# -- event-log views ----------------------------------------------------------


def participant_conditions(events: Sequence[Event]) -> dict[str, str]:
    """Consenting participants only; everything downstream filters through
    this map."""
    conditions: dict[str, str] = {}
    for event in events:
        if event.kind == ev.PARTICIPANT_REGISTERED and event.payload.get("consent", False):
            conditions[event.payload["participant"]] = event.payload["condition"]
    return conditions


def _group_members(conditions: Mapping[str, str], group: str) -> set[str]:
    return {pid for pid, cond in conditions.items() if cond == group}


TaskFilter = Callable[[dict], bool] | Iterable[str] | None


def _task_predicate(task_filter: TaskFilter) -> Callable[[dict], bool]:
    if task_filter is None:
        return lambda payload: True
    if callable(task_filter):
        return task_filter
    allowed = set(task_filter)
    return lambda payload: payload["assignment"] in allowed


def hint_task_filter(payload: dict) -> bool:
    return bool(payload.get("hint_task"))


def non_hint_task_filter(payload: dict) -> bool:
    return not payload.get("hint_task")


# -- cumulative success curves ------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    attempt: int
    cumulative_success_pct: float
    n_submissions: int


@dataclass(frozen=True)
class AttemptCurve:
    group: str
    task_label: str
    points: tuple[CurvePoint, ...]


def cumulative_success_curve(
    events: Sequence[Event],
    task_filter: TaskFilter,
    group: str,
    k_max: int = 15,
    task_label: str = "all",
) -> AttemptCurve:
    """Point k = 100 * (successful submissions with attempt_index <= k) /
    (submissions with attempt_index <= k); success means score exactly 100."""
    conditions = participant_conditions(events)
    members = _group_members(conditions, group)
    predicate = _task_predicate(task_filter)
    submissions = [
        e.payload
        for e in events
        if e.kind == ev.SUBMISSION
        and e.payload["participant"] in members
        and predicate(e.payload)
    ]
    if not submissions:
        raise NoData(f"no submissions for group {group!r} under the task filter")
    points = []
    for k in range(1, k_max + 1):
        upto = [s for s in submissions if s["attempt_index"] <= k]
        successes = sum(1 for s in upto if s["score"] == 100)
        if not upto:
            points.append(CurvePoint(attempt=k, cumulative_success_pct=0.0, n_submissions=0))
            continue
        points.append(
            CurvePoint(
                attempt=k,
                cumulative_success_pct=_pct(successes, len(upto)),
                n_submissions=len(upto),
            )
        )
    return AttemptCurve(group=group, task_label=task_label, points=tuple(points))


# -- time to solve ------------------------------------------------------------


@dataclass(frozen=True)
class SolveDuration:
    participant: str
    assignment: str
    seconds: int
    condition: str


def time_to_solve(
    events: Sequence[Event],
    cap: int = 7200,
    min_solvers: int = 3,
    task_filter: TaskFilter = None,
) -> list[SolveDuration]:
    """Seconds from the first submission to the first successful one per
    (participant, assignment), capped; tasks solved by fewer than min_solvers
    participants in either condition are dropped entirely."""
    conditions = participant_conditions(events)
    predicate = _task_predicate(task_filter)
    first_sub: dict[tuple[str, str], Event] = {}
    first_success: dict[tuple[str, str], Event] = {}
    for event in events:
        if event.kind != ev.SUBMISSION:
            continue
        payload = event.payload
        if payload["participant"] not in conditions or not predicate(payload):
            continue
        key = (payload["participant"], payload["assignment"])
        first_sub.setdefault(key, event)
        if payload["score"] == 100:
            first_success.setdefault(key, event)

    durations = []
    for key, success_event in first_success.items():
        participant, assignment = key
        elapsed = (success_event.ts - first_sub[key].ts).total_seconds()
        seconds = min(int(elapsed + 0.5), cap)
        durations.append(
            SolveDuration(
                participant=participant,
                assignment=assignment,
                seconds=seconds,
                condition=conditions[participant],
            )
        )

    solver_counts: dict[str, dict[str, int]] = {}
    for d in durations:
        per_condition = solver_counts.setdefault(d.assignment, {"control": 0, "experimental": 0})
        per_condition[d.condition] += 1
    kept = [
        d
        for d in durations
        if min(solver_counts[d.assignment].values()) >= min_solvers
    ]
    kept.sort(key=lambda d: (d.assignment, d.participant))
    return kept


# -- feedback clicks ----------------------------------------------------------


def feedback_click_fraction(events: Sequence[Event], task_filter: TaskFilter = None) -> dict[str, float]:
    """Per participant: fraction of eligible (RuntimeError/TestFailure)
    submissions with at least one feedback click. Repeat clicks on one
    submission count once; participants with no eligible submissions are
    excluded."""
    conditions = participant_conditions(events)
    predicate = _task_predicate(task_filter)
    eligible: dict[str, set[str]] = {}
    clicked: dict[str, set[str]] = {}
    eligible_ids: set[str] = set()
    for event in events:
        if event.kind == ev.SUBMISSION:
            payload = event.payload
            if payload["participant"] not in conditions or not predicate(payload):
                continue
            if payload["outcome"] in CLICK_ELIGIBLE_OUTCOMES:
                eligible.setdefault(payload["participant"], set()).add(payload["submission_id"])
                eligible_ids.add(payload["submission_id"])
        elif event.kind == ev.FEEDBACK_CLICK:
            payload = event.payload
            if payload["submission_id"] in eligible_ids:
                clicked.setdefault(payload["participant"], set()).add(payload["submission_id"])
    return {
        participant: len(clicked.get(participant, set()) & subs) / len(subs)
        for participant, subs in sorted(eligible.items())
    }


# -- hint ratings -------------------------------------------------------------

RATING_BINS = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)


def median_rating_histogram(events: Sequence[Event]) -> dict[float, int]:
    """Participant count per median-rating bin; half-integer medians come
    from even rating counts."""
    ratings: dict[str, list[int]] = {}
    for event in events:
        if event.kind == ev.HINT_RATING:
            ratings.setdefault(event.payload["participant"], []).append(event.payload["value"])
    histogram = {bin_value: 0 for bin_value in RATING_BINS}
    for values in ratings.values():
        histogram[float(statistics.median(values))] += 1
    return histogram


# -- affect survey ------------------------------------------------------------


@dataclass(frozen=True)
class AffectRow:
    state: str
    median_experimental: float
    mean_experimental: float
    median_control: float
    mean_control: float
    test: StatTestResult
    bh_threshold: float
    rejected: bool


@dataclass(frozen=True)
class AffectReport:
    rows: tuple[AffectRow, ...]
    bh: BHDecision
    n_experimental: int
    n_control: int
    other_mean_experimental: float
    other_mean_control: float


def affect_fractions(
    events: Sequence[Event], min_responses: int = 3
) -> dict[str, dict[str, float]]:
    """Per participant with >= min_responses affect responses: the fraction
    of responses naming each state."""
    counts: dict[str, dict[str, int]] = {}
    for event in events:
        if event.kind == ev.AFFECT_RESPONSE:
            per = counts.setdefault(event.payload["participant"], {})
            per[event.payload["state"]] = per.get(event.payload["state"], 0) + 1
    fractions = {}
    for participant, per in sorted(counts.items()):
        total = sum(per.values())
        if total < min_responses:
            continue
        fractions[participant] = {
            state: per.get(state, 0) / total for state in AFFECT_ORDER
        }
    return fractions


def affect_frequency_report(
    events: Sequence[Event], min_responses: int = 3, q: float = 0.05
) -> AffectReport:
    """Per-state group comparison of response fractions: Mann-Whitney U per
    state (Other excluded from testing), Benjamini-Hochberg across the five
    tested states."""
    conditions = participant_conditions(events)
    fractions = affect_fractions(events, min_responses)
    experimental = [
        frac for pid, frac in fractions.items() if conditions.get(pid) == "experimental"
    ]
    control = [frac for pid, frac in fractions.items() if conditions.get(pid) == "control"]

    tests: dict[str, StatTestResult] = {}
    for state in AFFECT_TEST_ORDER:
        sample_e = [frac[state] for frac in experimental]
        sample_c = [frac[state] for frac in control]
        tests[state] = mann_whitney_u(sample_e, sample_c)

    bh = benjamini_hochberg([(state, tests[state].p_value) for state in AFFECT_TEST_ORDER], q)
    bh_by_label = {row.label: row for row in bh.ranked}

    def dist(samples: list[dict[str, float]], state: str) -> tuple[float, float]:
        values = [frac[state] for frac in samples]
        return statistics.median(values), statistics.fmean(values)

    rows = []
    for state in AFFECT_TEST_ORDER:
        med_e, mean_e = dist(experimental, state)
        med_c, mean_c = dist(control, state)
        rows.append(
            AffectRow(
                state=state,
                median_experimental=med_e,
                mean_experimental=mean_e,
                median_control=med_c,
                mean_control=mean_c,
                test=tests[state],
                bh_threshold=bh_by_label[state].threshold,
                rejected=bh_by_label[state].rejected,
            )
        )
    return AffectReport(
        rows=tuple(rows),
        bh=bh,
        n_experimental=len(experimental),
        n_control=len(control),
        other_mean_experimental=statistics.fmean([f["Other"] for f in experimental]),
        other_mean_control=statistics.fmean([f["Other"] for f in control]),
    )


# -- pretest ------------------------------------------------------------------


def pretest_comparison(events: Sequence[Event]) -> dict:
    registrations = [
        e.payload for e in events if e.kind == ev.PARTICIPANT_REGISTERED and e.payload["consent"]
    ]
    experimental = [r["pretest_score"] for r in registrations if r["condition"] == "experimental"]
    control = [r["pretest_score"] for r in registrations if r["condition"] == "control"]
    test = mann_whitney_u(experimental, control)
    return {
        "median_experimental": statistics.median(experimental),
        "mean_experimental": statistics.fmean(experimental),
        "median_control": statistics.median(control),
        "mean_control": statistics.fmean(control),
        "test": test,
    }


# -- trend fit ----------------------------------------------------------------


@dataclass(frozen=True)
class TrendFit:
    intercept: float
    group_effect: float
    attempt_slope: float
    interaction: float
    residual_sse: float


def fit_group_attempt_trend(curve_a: AttemptCurve, curve_b: AttemptCurve) -> TrendFit:
    """Ordinary least squares y = b0 + b1*group + b2*attempt +
    b3*group*attempt over the two curves' points (group: a=0, b=1)."""
    attempts_a = [p.attempt for p in curve_a.points]
    attempts_b = [p.attempt for p in curve_b.points]
    if attempts_a != attempts_b:
        raise DegenerateDesign("curves must share the same attempt range")
    if len(attempts_a) < 3:
        raise DegenerateDesign("need at least 3 points per curve")
    rows = []
    y = []
    for group_value, curve in ((0.0, curve_a), (1.0, curve_b)):
        for point in curve.points:
            rows.append([1.0, group_value, float(point.attempt), group_value * point.attempt])
            y.append(point.cumulative_success_pct)
    design = np.array(rows)
    target = np.array(y)
    coeffs, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < 4:
        raise DegenerateDesign("collinear design matrix")
    residuals = target - design @ coeffs
    return TrendFit(
        intercept=float(coeffs[0]),
        group_effect=float(coeffs[1]),
        attempt_slope=float(coeffs[2]),
        interaction=float(coeffs[3]),
        residual_sse=float(residuals @ residuals),
    )
