"""Command-line entry points: serve, simulate, analyze."""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from .assignments import load_assignment_bundle
from .completion import HttpCompletionClient, MockCompletionClient
from .csharp_backend import CSharpBackend, ToolchainConfig
from .events import EventLog
from .experiment import Participant, Platform, assign_condition
from .mock_backend import MockBackend
from .reporting import analyze_log
from .simulate import default_bundle_path, default_fixtures_path, run_simulation


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradelab")
    commands = parser.add_subparsers(dest="command", required=True)

    serve = commands.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--bundle", default=None, help="assignment bundle dir or .zip")
    serve.add_argument(
        "--llm",
        choices=("mock", "live"),
        default=os.environ.get("LLM_MODE", "mock"),
        help="completion client mode (env LLM_MODE)",
    )
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--log", default="events.jsonl", help="event log path")
    serve.add_argument("--roster", default=None, help="participant JSON roster")
    serve.add_argument(
        "--admin-token", default=os.environ.get("GRADELAB_ADMIN_TOKEN", "admin")
    )
    serve.add_argument("--locale", default="pl", choices=("pl", "en"))

    simulate = commands.add_parser("simulate", help="run a scripted cohort")
    simulate.add_argument("--students", type=int, default=20)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--log", default="events.jsonl")
    simulate.add_argument("--bundle", default=None)

    analyze = commands.add_parser("analyze", help="compute reports from a log")
    analyze.add_argument("--log", required=True)
    analyze.add_argument("--out", required=True)
    return parser


def _load_roster(path: str | None, seed: int) -> list[dict]:
    if path is None:
        # Demo roster so the service is usable out of the box; tokens printed
        # at startup.
        ids = [f"demo{i}" for i in range(1, 5)]
        conditions = assign_condition(ids, seed)
        return [
            {"id": pid, "token": f"token-{pid}", "condition": conditions[pid], "pretest_score": 50}
            for pid in ids
        ]
    entries = json.loads(Path(path).read_text(encoding="utf-8"))
    unassigned = [e["id"] for e in entries if "condition" not in e]
    if unassigned:
        conditions = assign_condition(unassigned, seed)
        for entry in entries:
            entry.setdefault("condition", conditions.get(entry["id"]))
    return entries


def _make_completion_client(mode: str):
    if mode == "live":
        base_url = os.environ.get("LLM_BASE_URL")
        api_key = os.environ.get("LLM_API_KEY")
        if not base_url or not api_key:
            raise SystemExit("live mode needs LLM_BASE_URL and LLM_API_KEY set")
        return HttpCompletionClient(base_url, api_key)
    return MockCompletionClient(os.environ.get("LLM_FIXTURES", default_fixtures_path()))


def _make_backend():
    toolchain = os.environ.get("GRADELAB_TOOLCHAIN")
    if toolchain:
        return CSharpBackend(ToolchainConfig.from_file(toolchain))
    return MockBackend()


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    assignments = load_assignment_bundle(args.bundle or default_bundle_path())
    platform = Platform(
        assignments={a.id: a for a in assignments},
        backend=_make_backend(),
        completion_client=_make_completion_client(args.llm),
        log=EventLog(args.log),
        clock=lambda: datetime.now(timezone.utc),
        rng=random.Random(args.seed),
        executor=ThreadPoolExecutor(max_workers=4),
        locale=args.locale,
        sleep=time.sleep,
    )
    tokens = {}
    for entry in _load_roster(args.roster, args.seed):
        platform.register_participant(
            Participant(
                id=entry["id"],
                condition=entry["condition"],
                pretest_score=int(entry.get("pretest_score", 0)),
                consent=bool(entry.get("consent", True)),
            )
        )
        tokens[entry["token"]] = entry["id"]
        print(f"participant {entry['id']} ({entry['condition']}): token {entry['token']}")
    print(f"admin token: {args.admin_token}")
    app = create_app(platform, tokens, args.admin_token)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    _, report = run_simulation(
        students=args.students,
        seed=args.seed,
        log_path=args.log,
        bundle_path=args.bundle or default_bundle_path(),
    )
    print(
        f"simulated {args.students} students: {report.n_submissions} submissions, "
        f"{report.n_events} events -> {report.log_path}"
    )
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    written = analyze_log(args.log, args.out)
    for name in sorted(written):
        print(f"wrote {written[name]}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        return _cmd_serve(args)
    if args.command == "simulate":
        return _cmd_simulate(args)
    return _cmd_analyze(args)


if __name__ == "__main__":
    sys.exit(main())
