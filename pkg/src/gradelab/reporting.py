"""Report assembly: turns a replayed event log into report.json plus CSV
sidecars (curves.csv, table1.csv, fig1.csv).

Output is a pure function of the event sequence and is byte-stable: fixed key
order (sorted JSON), fixed row order, fixed float formatting. The online
export endpoint and the offline `analyze` CLI both call build_report, so the
two can be compared byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from pathlib import Path
from typing import Sequence

from . import analytics as an
from . import events as ev
from .errors import DegenerateDesign, EmptySample, NoData
from .events import Event

REPORT_FILES = ("report.json", "curves.csv", "table1.csv", "fig1.csv")

TASK_SETS = (
    ("hint_tasks", an.hint_task_filter),
    ("non_hint_tasks", an.non_hint_task_filter),
)
GROUPS = ("experimental", "control")

NO_DATA = {"status": "no_data"}


def _test_dict(test: an.StatTestResult) -> dict:
    return {
        "W": test.statistic,
        "p_value": test.p_value,
        "n_experimental": test.n_a,
        "n_control": test.n_b,
        "method": test.method,
    }


def _curve_dict(curve: an.AttemptCurve) -> dict:
    return {
        "group": curve.group,
        "task_set": curve.task_label,
        "points": [
            {
                "attempt": p.attempt,
                "cumulative_success_pct": p.cumulative_success_pct,
                "n_submissions": p.n_submissions,
            }
            for p in curve.points
        ],
    }


def _group_summary(values: list[float | int]) -> dict:
    return {
        "n": len(values),
        "median": statistics.median(values),
        "mean": statistics.fmean(values),
    }


def _pretest_section(events: Sequence[Event]) -> dict:
    try:
        pretest = an.pretest_comparison(events)
    except (EmptySample, statistics.StatisticsError):
        return dict(NO_DATA)
    return {
        "median_experimental": pretest["median_experimental"],
        "mean_experimental": pretest["mean_experimental"],
        "median_control": pretest["median_control"],
        "mean_control": pretest["mean_control"],
        "test": _test_dict(pretest["test"]),
    }


def _ratings_section(events: Sequence[Event]) -> dict:
    histogram = an.median_rating_histogram(events)
    total = sum(histogram.values())
    if total == 0:
        return dict(NO_DATA)
    high = sum(count for bin_value, count in histogram.items() if bin_value >= 4.0)
    low = sum(count for bin_value, count in histogram.items() if bin_value <= 2.0)
    return {
        "histogram": {f"{bin_value:g}": count for bin_value, count in histogram.items()},
        "n_participants": total,
        "pct_median_4_or_higher": an.round1(100 * high / total),
        "pct_median_2_or_lower": an.round1(100 * low / total),
    }


def _clicks_section(events: Sequence[Event]) -> dict:
    conditions = an.participant_conditions(events)
    fractions = an.feedback_click_fraction(events, an.hint_task_filter)
    experimental = [f for pid, f in fractions.items() if conditions.get(pid) == "experimental"]
    control = [f for pid, f in fractions.items() if conditions.get(pid) == "control"]
    if not experimental or not control:
        return dict(NO_DATA)
    return {
        "task_set": "hint_tasks",
        "experimental": _group_summary(experimental),
        "control": _group_summary(control),
        "test": _test_dict(an.mann_whitney_u(experimental, control)),
    }


def _curves_section(events: Sequence[Event]) -> tuple[dict, list[an.AttemptCurve]]:
    section: dict = {}
    all_curves: list[an.AttemptCurve] = []
    for task_label, task_filter in TASK_SETS:
        per_set: dict = {}
        curves: dict[str, an.AttemptCurve] = {}
        for group in GROUPS:
            try:
                curve = an.cumulative_success_curve(
                    events, task_filter, group, task_label=task_label
                )
            except NoData:
                per_set[group] = dict(NO_DATA)
                continue
            curves[group] = curve
            all_curves.append(curve)
            per_set[group] = _curve_dict(curve)
        if set(curves) == set(GROUPS):
            try:
                fit = an.fit_group_attempt_trend(curves["control"], curves["experimental"])
                per_set["trend"] = {
                    "group0": "control",
                    "group1": "experimental",
                    "intercept": fit.intercept,
                    "group_effect": fit.group_effect,
                    "attempt_slope": fit.attempt_slope,
                    "interaction": fit.interaction,
                    "residual_sse": fit.residual_sse,
                }
            except DegenerateDesign as exc:
                per_set["trend"] = {"status": "no_fit", "reason": str(exc)}
        section[task_label] = per_set
    return section, all_curves


def _time_section(events: Sequence[Event]) -> dict:
    section: dict = {}
    for task_label, task_filter in TASK_SETS:
        durations = an.time_to_solve(events, task_filter=task_filter)
        experimental = [d.seconds for d in durations if d.condition == "experimental"]
        control = [d.seconds for d in durations if d.condition == "control"]
        if not experimental or not control:
            section[task_label] = dict(NO_DATA)
            continue
        section[task_label] = {
            "experimental": _group_summary(experimental),
            "control": _group_summary(control),
            "test": _test_dict(an.mann_whitney_u(experimental, control)),
        }
    return section


def _affect_section(events: Sequence[Event]) -> tuple[dict, an.AffectReport | None]:
    try:
        report = an.affect_frequency_report(events)
    except (EmptySample, statistics.StatisticsError):
        return dict(NO_DATA), None
    rows = []
    for row in report.rows:
        rows.append(
            {
                "state": row.state,
                "median_experimental": row.median_experimental,
                "mean_experimental": row.mean_experimental,
                "median_control": row.median_control,
                "mean_control": row.mean_control,
                "test": _test_dict(row.test),
                "bh_threshold": row.bh_threshold,
                "rejected": row.rejected,
            }
        )
    section = {
        "rows": rows,
        "q": report.bh.q,
        "n_experimental": report.n_experimental,
        "n_control": report.n_control,
        "other_mean_experimental": report.other_mean_experimental,
        "other_mean_control": report.other_mean_control,
    }
    return section, report


def _curves_csv(curves: list[an.AttemptCurve]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["task_set", "group", "attempt", "cumulative_success_pct", "n_submissions"])
    order = {label: i for i, (label, _) in enumerate(TASK_SETS)}
    group_order = {group: i for i, group in enumerate(GROUPS)}
    for curve in sorted(curves, key=lambda c: (order[c.task_label], group_order[c.group])):
        for point in curve.points:
            writer.writerow(
                [
                    curve.task_label,
                    curve.group,
                    point.attempt,
                    f"{point.cumulative_success_pct:.1f}",
                    point.n_submissions,
                ]
            )
    return buffer.getvalue()


def _table1_csv(report: an.AffectReport | None) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        [
            "state",
            "mdn_experimental",
            "mean_experimental",
            "mdn_control",
            "mean_control",
            "W",
            "p_value",
            "bh_threshold",
            "rejected",
        ]
    )
    if report is None:
        return buffer.getvalue()
    for row in report.rows:
        writer.writerow(
            [
                row.state,
                f"{row.median_experimental:.3f}",
                f"{row.mean_experimental:.3f}",
                f"{row.median_control:.3f}",
                f"{row.mean_control:.3f}",
                f"{row.test.statistic:g}",
                f"{row.test.p_value:.3f}",
                f"{row.bh_threshold:.4f}",
                str(row.rejected).lower(),
            ]
        )
    return buffer.getvalue()


def _fig1_csv(events: Sequence[Event]) -> str:
    histogram = an.median_rating_histogram(events)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["median_rating", "participant_count"])
    for bin_value in an.RATING_BINS:
        writer.writerow([f"{bin_value:g}", histogram[bin_value]])
    return buffer.getvalue()


def build_report(events: Sequence[Event]) -> dict[str, str]:
    """All report files as {filename: content}; pure and byte-stable."""
    conditions = an.participant_conditions(events)
    curves_section, curves = _curves_section(events)
    affect_section, affect_report = _affect_section(events)
    report = {
        "meta": {
            "n_events": len(events),
            "n_participants": {
                "experimental": sum(1 for c in conditions.values() if c == "experimental"),
                "control": sum(1 for c in conditions.values() if c == "control"),
            },
        },
        "pretest": _pretest_section(events),
        "hint_ratings": _ratings_section(events),
        "feedback_clicks": _clicks_section(events),
        "curves": curves_section,
        "time_to_solve": _time_section(events),
        "affect": affect_section,
    }
    return {
        "report.json": json.dumps(report, indent=2, sort_keys=True) + "\n",
        "curves.csv": _curves_csv(curves),
        "table1.csv": _table1_csv(affect_report),
        "fig1.csv": _fig1_csv(events),
    }


def analyze_log(log_path: str | Path, out_dir: str | Path) -> dict[str, Path]:
    """Replay a JSONL log and write the report files; returns the paths."""
    events = ev.replay_event_log(log_path)
    files = build_report(events)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, content in files.items():
        path = out / name
        path.write_text(content, encoding="utf-8")
        written[name] = path
    return written
