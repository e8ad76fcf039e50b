"""Report assembly: section shapes, CSV sidecar formats, byte determinism,
no-data fallbacks, and the offline analyze_log round trip."""

from __future__ import annotations

import csv
import io
import json

import pytest

from gradelab import analytics as an
from gradelab.events import replay_event_log
from gradelab.reporting import NO_DATA, REPORT_FILES, analyze_log, build_report
from gradelab.simulate import run_simulation

from oracles import curve_point_oracle

METRIC_FAMILIES = {
    "pretest",
    "hint_ratings",
    "feedback_clicks",
    "curves",
    "time_to_solve",
    "affect",
}


@pytest.fixture(scope="module")
def cohort(tmp_path_factory):
    log_path = tmp_path_factory.mktemp("cohort") / "events.jsonl"
    platform, sim_report = run_simulation(students=12, seed=0, log_path=log_path)
    events = platform.log.events()
    platform.log.close()
    return {"events": events, "log_path": log_path, "sim_report": sim_report}


@pytest.fixture(scope="module")
def files(cohort):
    return build_report(cohort["events"])


@pytest.fixture(scope="module")
def report(files):
    return json.loads(files["report.json"])


def csv_rows(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


# -- file set and JSON envelope ------------------------------------------------


def test_exact_file_set(files):
    assert set(files) == set(REPORT_FILES) == {
        "report.json",
        "curves.csv",
        "table1.csv",
        "fig1.csv",
    }


def test_report_json_sorted_indented_trailing_newline(files, report):
    assert files["report.json"] == json.dumps(report, indent=2, sort_keys=True) + "\n"


def test_all_metric_families_present(report):
    assert METRIC_FAMILIES | {"meta"} == set(report)


def test_rich_cohort_has_no_missing_sections(files):
    assert '"no_data"' not in files["report.json"]
    assert '"no_fit"' not in files["report.json"]


def test_meta_counts(cohort, report):
    events = cohort["events"]
    assert report["meta"]["n_events"] == len(events)
    registered = [e for e in events if e.kind == "participant_registered"]
    by_condition = {"control": 0, "experimental": 0}
    for event in registered:
        by_condition[event.payload["condition"]] += 1
    assert report["meta"]["n_participants"] == by_condition
    assert by_condition == {"control": 6, "experimental": 6}


# -- sections agree with the analytics they summarize --------------------------


def test_pretest_section_matches_analytics(cohort, report):
    pretest = an.pretest_comparison(cohort["events"])
    section = report["pretest"]
    assert section["mean_experimental"] == pretest["mean_experimental"]
    assert section["median_experimental"] == pretest["median_experimental"]
    assert section["mean_control"] == pretest["mean_control"]
    assert section["median_control"] == pretest["median_control"]
    test = pretest["test"]
    assert section["test"] == {
        "W": test.statistic,
        "p_value": test.p_value,
        "n_experimental": test.n_a,
        "n_control": test.n_b,
        "method": test.method,
    }


def test_ratings_section_matches_histogram(cohort, report):
    histogram = an.median_rating_histogram(cohort["events"])
    section = report["hint_ratings"]
    assert section["histogram"] == {f"{b:g}": c for b, c in histogram.items()}
    assert list(section["histogram"]) == ["1", "1.5", "2", "2.5", "3", "3.5", "4", "4.5", "5"]
    total = sum(histogram.values())
    assert section["n_participants"] == total
    high = sum(c for b, c in histogram.items() if b >= 4.0)
    low = sum(c for b, c in histogram.items() if b <= 2.0)
    assert section["pct_median_4_or_higher"] == an.round1(100 * high / total)
    assert section["pct_median_2_or_lower"] == an.round1(100 * low / total)


def test_clicks_section_matches_fractions(cohort, report):
    events = cohort["events"]
    conditions = an.participant_conditions(events)
    fractions = an.feedback_click_fraction(events, an.hint_task_filter)
    experimental = [f for p, f in fractions.items() if conditions.get(p) == "experimental"]
    control = [f for p, f in fractions.items() if conditions.get(p) == "control"]
    section = report["feedback_clicks"]
    assert section["task_set"] == "hint_tasks"
    for label, values in (("experimental", experimental), ("control", control)):
        assert section[label]["n"] == len(values)
        assert section[label]["mean"] == pytest.approx(sum(values) / len(values))
    test = an.mann_whitney_u(experimental, control)
    assert section["test"]["W"] == test.statistic
    assert section["test"]["p_value"] == test.p_value


def test_curve_sections_cover_both_task_sets(report):
    assert set(report["curves"]) == {"hint_tasks", "non_hint_tasks"}
    for task_set in report["curves"].values():
        assert set(task_set) == {"experimental", "control", "trend"}


def test_curve_points_match_analytics_and_oracle(cohort, report):
    events = cohort["events"]
    hint_ids = {
        e.payload["assignment"]
        for e in events
        if e.kind == "submission" and e.payload.get("hint_task")
    }
    for group in ("experimental", "control"):
        curve = an.cumulative_success_curve(events, an.hint_task_filter, group)
        block = report["curves"]["hint_tasks"][group]
        assert block["group"] == group
        assert [p["attempt"] for p in block["points"]] == list(range(1, 16))
        for point, expected in zip(block["points"], curve.points):
            assert point["cumulative_success_pct"] == expected.cumulative_success_pct
            assert point["n_submissions"] == expected.n_submissions
        for k in (1, 5, 15):
            successes, total = curve_point_oracle(events, group, k, task_ids=hint_ids)
            point = block["points"][k - 1]
            assert point["n_submissions"] == total
            assert point["cumulative_success_pct"] == an.round1(100 * successes / total)


def test_trend_group_coding(report):
    for task_set in report["curves"].values():
        trend = task_set["trend"]
        assert trend["group0"] == "control"
        assert trend["group1"] == "experimental"
        assert set(trend) == {
            "group0",
            "group1",
            "intercept",
            "group_effect",
            "attempt_slope",
            "interaction",
            "residual_sse",
        }


def test_time_section_matches_analytics(cohort, report):
    events = cohort["events"]
    for label, task_filter in (
        ("hint_tasks", an.hint_task_filter),
        ("non_hint_tasks", an.non_hint_task_filter),
    ):
        durations = an.time_to_solve(events, task_filter=task_filter)
        section = report["time_to_solve"][label]
        for condition in ("experimental", "control"):
            seconds = [d.seconds for d in durations if d.condition == condition]
            assert section[condition]["n"] == len(seconds)
            assert section[condition]["mean"] == pytest.approx(sum(seconds) / len(seconds))


def test_affect_section_matches_frequency_report(cohort, report):
    reference = an.affect_frequency_report(cohort["events"])
    section = report["affect"]
    assert [row["state"] for row in section["rows"]] == list(an.AFFECT_TEST_ORDER)
    assert section["q"] == 0.05
    assert section["n_experimental"] == reference.n_experimental
    assert section["n_control"] == reference.n_control
    assert section["other_mean_experimental"] == reference.other_mean_experimental
    assert section["other_mean_control"] == reference.other_mean_control
    by_state = {row.state: row for row in reference.rows}
    for row in section["rows"]:
        expected = by_state[row["state"]]
        assert row["bh_threshold"] == expected.bh_threshold
        assert row["rejected"] == expected.rejected
        assert row["test"]["p_value"] == expected.test.p_value


# -- CSV sidecars ---------------------------------------------------------------


def test_curves_csv_rows(files, report):
    lines = files["curves.csv"].splitlines()
    assert lines[0] == "task_set,group,attempt,cumulative_success_pct,n_submissions"
    assert len(lines) == 1 + 2 * 2 * 15
    rows = csv_rows(files["curves.csv"])
    for row in rows:
        point = report["curves"][row["task_set"]][row["group"]]["points"][
            int(row["attempt"]) - 1
        ]
        assert row["cumulative_success_pct"] == f"{point['cumulative_success_pct']:.1f}"
        assert row["n_submissions"] == str(point["n_submissions"])


def test_table1_csv_formats(files, report):
    lines = files["table1.csv"].splitlines()
    assert lines[0] == (
        "state,mdn_experimental,mean_experimental,mdn_control,mean_control,"
        "W,p_value,bh_threshold,rejected"
    )
    rows = csv_rows(files["table1.csv"])
    assert [row["state"] for row in rows] == list(an.AFFECT_TEST_ORDER)
    for row, section_row in zip(rows, report["affect"]["rows"]):
        assert row["mdn_experimental"] == f"{section_row['median_experimental']:.3f}"
        assert row["mean_experimental"] == f"{section_row['mean_experimental']:.3f}"
        assert row["mdn_control"] == f"{section_row['median_control']:.3f}"
        assert row["mean_control"] == f"{section_row['mean_control']:.3f}"
        assert row["W"] == f"{section_row['test']['W']:g}"
        assert row["p_value"] == f"{section_row['test']['p_value']:.3f}"
        assert row["bh_threshold"] == f"{section_row['bh_threshold']:.4f}"
        assert row["rejected"] == ("true" if section_row["rejected"] else "false")


def test_fig1_csv_bins(files, report):
    lines = files["fig1.csv"].splitlines()
    assert lines[0] == "median_rating,participant_count"
    rows = csv_rows(files["fig1.csv"])
    assert [row["median_rating"] for row in rows] == [
        "1", "1.5", "2", "2.5", "3", "3.5", "4", "4.5", "5",
    ]
    histogram = report["hint_ratings"]["histogram"]
    for row in rows:
        assert int(row["participant_count"]) == histogram[row["median_rating"]]


# -- determinism and no-data fallbacks ------------------------------------------


def test_build_report_deterministic(cohort, files):
    again = build_report(list(cohort["events"]))
    assert again == files


def test_empty_log_reports_no_data():
    files = build_report([])
    report = json.loads(files["report.json"])
    assert report["pretest"] == NO_DATA
    assert report["hint_ratings"] == NO_DATA
    assert report["feedback_clicks"] == NO_DATA
    assert report["affect"] == NO_DATA
    for task_set in ("hint_tasks", "non_hint_tasks"):
        assert report["time_to_solve"][task_set] == NO_DATA
        assert report["curves"][task_set] == {
            "experimental": NO_DATA,
            "control": NO_DATA,
        }
    assert report["meta"] == {
        "n_events": 0,
        "n_participants": {"control": 0, "experimental": 0},
    }
    assert files["curves.csv"] == "task_set,group,attempt,cumulative_success_pct,n_submissions\n"
    assert files["table1.csv"].count("\n") == 1
    rows = csv_rows(files["fig1.csv"])
    assert len(rows) == 9
    assert all(row["participant_count"] == "0" for row in rows)


def test_analyze_log_round_trip(cohort, files, tmp_path):
    out_dir = tmp_path / "report"
    written = analyze_log(cohort["log_path"], out_dir)
    assert set(written) == set(REPORT_FILES)
    for name, path in written.items():
        assert path == out_dir / name
        assert path.read_text(encoding="utf-8") == files[name]


def test_analyze_log_matches_direct_replay(cohort, tmp_path):
    events = replay_event_log(cohort["log_path"])
    assert build_report(events) == build_report(cohort["events"])
