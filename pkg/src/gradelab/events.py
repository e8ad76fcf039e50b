"""Append-only experiment event log: JSONL persistence and validated replay.

One event per line: ``{"seq": ..., "ts": ..., "kind": ..., "payload": ...}``
with an RFC 3339 UTC timestamp. The log is the single source of truth for
analytics; replay re-checks the invariants the writer maintained (strictly
increasing seq, per-participant attempt numbering with no gaps).
"""

from __future__ import annotations

import io
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorruptLog, InvariantViolation

PARTICIPANT_REGISTERED = "participant_registered"
SUBMISSION = "submission"
FEEDBACK_CLICK = "feedback_click"
HINT_SHOWN = "hint_shown"
HINT_RATING = "hint_rating"
AFFECT_PROMPT = "affect_prompt"
AFFECT_RESPONSE = "affect_response"
HINT_SKIPPED = "hint_skipped"

EVENT_KINDS = {
    PARTICIPANT_REGISTERED,
    SUBMISSION,
    FEEDBACK_CLICK,
    HINT_SHOWN,
    HINT_RATING,
    AFFECT_PROMPT,
    AFFECT_RESPONSE,
    HINT_SKIPPED,
}


@dataclass(frozen=True)
class Event:
    seq: int
    ts: datetime
    kind: str
    payload: dict


def _format_ts(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).isoformat()


def encode_event(event: Event) -> str:
    return json.dumps(
        {"seq": event.seq, "ts": _format_ts(event.ts), "kind": event.kind, "payload": event.payload},
        ensure_ascii=False,
        sort_keys=True,
    )


class EventLog:
    """Single-writer append log; optionally mirrored to a JSONL file."""

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.Lock()
        self._events: list[Event] = []
        self._next_seq = 1
        self._path = Path(path) if path is not None else None
        self._file = None
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._file = open(self._path, "a", encoding="utf-8")

    @property
    def path(self) -> Path | None:
        return self._path

    def append(self, kind: str, payload: dict, ts: datetime) -> Event:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._lock:
            event = Event(seq=self._next_seq, ts=ts, kind=kind, payload=payload)
            self._next_seq += 1
            self._events.append(event)
            if self._file is not None:
                self._file.write(encode_event(event) + "\n")
                self._file.flush()
        return event

    def events(self) -> tuple[Event, ...]:
        with self._lock:
            return tuple(self._events)

    def close(self) -> None:
        with self._lock:
            if self._file is not None:
                self._file.close()
                self._file = None


def _parse_line(line: str, line_number: int) -> Event:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptLog(f"unparsable JSON: {exc}", line_number) from exc
    if not isinstance(raw, dict):
        raise CorruptLog("event line is not an object", line_number)
    missing = {"seq", "ts", "kind", "payload"} - raw.keys()
    if missing:
        raise CorruptLog(f"missing fields {sorted(missing)}", line_number)
    try:
        ts = datetime.fromisoformat(raw["ts"])
    except (TypeError, ValueError) as exc:
        raise CorruptLog(f"bad timestamp {raw['ts']!r}", line_number) from exc
    if raw["kind"] not in EVENT_KINDS:
        raise CorruptLog(f"unknown kind {raw['kind']!r}", line_number)
    if not isinstance(raw["seq"], int) or not isinstance(raw["payload"], dict):
        raise CorruptLog("seq must be an integer and payload an object", line_number)
    return Event(seq=raw["seq"], ts=ts, kind=raw["kind"], payload=raw["payload"])


def validate_events(events: Sequence[Event]) -> None:
    """Check the cross-event invariants the writer is supposed to maintain."""
    last_seq = 0
    attempts: dict[tuple[str, str], int] = {}
    for event in events:
        if event.seq <= last_seq:
            raise InvariantViolation(
                f"seq {event.seq} not greater than previous {last_seq}"
            )
        last_seq = event.seq
        if event.kind == SUBMISSION:
            key = (event.payload.get("participant"), event.payload.get("assignment"))
            expected = attempts.get(key, 0) + 1
            got = event.payload.get("attempt_index")
            if got != expected:
                raise InvariantViolation(
                    f"attempt_index {got} for {key} at seq {event.seq}; expected {expected}"
                )
            attempts[key] = expected


def replay_event_log(source: str | Path | io.TextIOBase | Iterable[str]) -> list[Event]:
    """Parse and validate a JSONL log; returns events in file order."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as handle:
            lines = handle.readlines()
    else:
        lines = list(source)
    events = []
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        events.append(_parse_line(line, line_number))
    validate_events(events)
    return events
