"""Event queries: filter, sort, serialize.

The contract is spelled out so an independent scan can reproduce the
bytes exactly:

Filtering — every present filter must hold: gate membership, inclusive
``ts_from <= ts <= ts_to``, kind membership, and the person filter. A
person given as a 16-hex-digit string matches the event uid directly; an
integer matches every uid the registry binds to that personal id.

Sorting — primary key per ``sort_key``: ``ts`` and ``gate`` and ``kind``
read the column, ``person`` uses the holder's personal id with unknown
holders ordered last (2^32). Descending flips the primary key only; ties
always break ascending by (terminal, seq), making the order total and
direction-stable.

CSV has the fixed header; rows join with a single newline and the
document ends with one. uid renders as 16 upper-case hex digits, empty
for door-only events; personal_id renders empty when unknown; kind by
name. JSON-lines uses one compact object per line with the same columns
in the same order, null instead of empty.
"""

from __future__ import annotations

from dataclasses import dataclass

import json

from campus.errors import BadRange
from campus.terminal.events import EventKind

CSV_HEADER = "seq,terminal,gate,ts,uid,personal_id,kind,detail"
UNKNOWN_PERSON_ORDER = 2**32


@dataclass(frozen=True)
class StoredEvent:
    """One ingested event as persisted by the coordinator."""

    terminal: int
    gate: int
    seq: int
    ts: int
    uid: int
    kind: int
    detail: int


@dataclass(frozen=True)
class ReportQuery:
    gates: frozenset[int] | None = None
    ts_from: int | None = None
    ts_to: int | None = None
    person: int | str | None = None
    kinds: frozenset[int] | None = None
    sort_key: str = "ts"
    descending: bool = False
    fmt: str = "csv"

    def __post_init__(self):
        if self.ts_from is not None and self.ts_to is not None and self.ts_from > self.ts_to:
            raise BadRange(f"from {self.ts_from} is after to {self.ts_to}")
        if self.sort_key not in ("ts", "gate", "person", "kind"):
            raise ValueError(f"unknown sort key {self.sort_key!r}")
        if self.fmt not in ("csv", "jsonl"):
            raise ValueError(f"unknown format {self.fmt!r}")


def _person_uids(person: int | str, uid_to_pid: dict[int, int]) -> set[int]:
    if isinstance(person, str):
        return {int(person, 16)}
    return {uid for uid, pid in uid_to_pid.items() if pid == person}


def select_events(
    events: list[StoredEvent], query: ReportQuery, uid_to_pid: dict[int, int]
) -> list[StoredEvent]:
    rows = events
    if query.gates is not None:
        rows = [e for e in rows if e.gate in query.gates]
    if query.ts_from is not None:
        rows = [e for e in rows if e.ts >= query.ts_from]
    if query.ts_to is not None:
        rows = [e for e in rows if e.ts <= query.ts_to]
    if query.kinds is not None:
        rows = [e for e in rows if e.kind in query.kinds]
    if query.person is not None:
        wanted = _person_uids(query.person, uid_to_pid)
        rows = [e for e in rows if e.uid in wanted]

    def primary(e: StoredEvent) -> int:
        if query.sort_key == "ts":
            return e.ts
        if query.sort_key == "gate":
            return e.gate
        if query.sort_key == "kind":
            return e.kind
        return uid_to_pid.get(e.uid, UNKNOWN_PERSON_ORDER)

    sign = -1 if query.descending else 1
    return sorted(rows, key=lambda e: (sign * primary(e), e.terminal, e.seq))


def _kind_name(kind: int) -> str:
    try:
        return EventKind(kind).name
    except ValueError:
        return str(kind)


def render_report(
    events: list[StoredEvent], query: ReportQuery, uid_to_pid: dict[int, int]
) -> bytes:
    rows = select_events(events, query, uid_to_pid)
    if query.fmt == "csv":
        lines = [CSV_HEADER]
        for e in rows:
            uid = f"{e.uid:016X}" if e.uid else ""
            pid = uid_to_pid.get(e.uid)
            lines.append(
                f"{e.seq},{e.terminal},{e.gate},{e.ts},{uid},"
                f"{'' if pid is None else pid},{_kind_name(e.kind)},{e.detail}"
            )
        return ("\n".join(lines) + "\n").encode("utf-8")
    lines = []
    for e in rows:
        pid = uid_to_pid.get(e.uid)
        lines.append(
            json.dumps(
                {
                    "seq": e.seq,
                    "terminal": e.terminal,
                    "gate": e.gate,
                    "ts": e.ts,
                    "uid": f"{e.uid:016X}" if e.uid else None,
                    "personal_id": pid,
                    "kind": _kind_name(e.kind),
                    "detail": e.detail,
                },
                separators=(",", ":"),
            )
        )
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")
