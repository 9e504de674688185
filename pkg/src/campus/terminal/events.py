"""Terminal event records and their wire encoding.

Events are kept in terminal memory until the coordinator drains and
explicitly acknowledges them. Sequence numbers are per-terminal, gapless,
starting at 1.

Wire encoding (DRAIN_EVENTS DATA payload): repeated 23-byte records
``[seq:4 LE][ts:8 LE][uid:8 BE][kind:1][detail:2 LE]``. Bit-exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum


class EventKind(IntEnum):
    ACCESS_GRANTED = 1
    ACCESS_DENIED = 2
    DOOR_OPENED = 3
    DOOR_CLOSED = 4
    DOOR_LEFT_OPEN = 5
    DOOR_FORCED = 6
    CARD_WRITTEN = 7
    CONFIG_CHANGED = 8
    MODE_CHANGED = 9


class DenyReason(IntEnum):
    UNREGISTERED = 1
    REVOKED = 2
    LOCKED = 3
    EXPIRED = 4
    GATE_NOT_ALLOWED = 5
    OUT_OF_SCHEDULE = 6


# Set on the first event appended after the bounded queue overwrote its
# oldest entry.
OVERFLOW_FLAG = 0x8000

EVENT_WIRE_SIZE = 23
_RECORD = struct.Struct("<IQ8sBH")  # uid passed big-endian as raw bytes


@dataclass(frozen=True)
class EventRecord:
    seq: int
    ts: int
    uid: int  # 0 for door-only events
    kind: EventKind
    detail: int = 0


def pack_events(events: list[EventRecord]) -> bytes:
    out = bytearray()
    for ev in events:
        out += _RECORD.pack(ev.seq, ev.ts, ev.uid.to_bytes(8, "big"), ev.kind, ev.detail)
    return bytes(out)


def unpack_events(payload: bytes) -> list[EventRecord]:
    if len(payload) % EVENT_WIRE_SIZE:
        raise ValueError(f"event payload length {len(payload)} not a record multiple")
    events = []
    for offset in range(0, len(payload), EVENT_WIRE_SIZE):
        seq, ts, uid_raw, kind, detail = _RECORD.unpack_from(payload, offset)
        events.append(
            EventRecord(
                seq=seq,
                ts=ts,
                uid=int.from_bytes(uid_raw, "big"),
                kind=EventKind(kind),
                detail=detail,
            )
        )
    return events
