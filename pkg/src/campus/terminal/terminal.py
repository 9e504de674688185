"""The embedded gate terminal.

Authorization is computed locally from card contents plus terminal state;
no coordinator round-trip happens on a read. Deny rules run in fixed
precedence: UNREGISTERED, REVOKED, LOCKED, EXPIRED, then the mode
override, then GATE_NOT_ALLOWED and OUT_OF_SCHEDULE. Security-relevant
denials outrank convenience overrides.

The revocation list is a bounded exception cache: on first sight of a
revoked card the terminal writes the lock flag onto the card itself,
re-signs it, and drops the cache entry; the card is the durable record.
Coordinator-queued field writes land the same way, applied and re-signed
on any verdict except UNREGISTERED.

All entry points are serialized by the caller; a terminal is a
single-threaded state machine.
"""

from __future__ import annotations

import datetime
import struct
from collections import OrderedDict, deque
from dataclasses import dataclass
from enum import Enum, IntEnum

from campus.bus import commands as cmd
from campus.errors import AuthDenied, BlockLocked, ClockWentBackwards, UnknownCard
from campus.tag.image import TagImage
from campus.tag.layout import CARD_V1, FLAG_LOCKED, Layout, Schedule, decode_field, encode_field, schedule_allows
from campus.tag.reader import ReaderFieldModel
from campus.tag.signing import sign_card, verify_card
from campus.terminal.door import DoorState
from campus.terminal.events import DenyReason, EventKind, EventRecord, pack_events

EVENT_QUEUE_CAPACITY = 1024
REVOCATION_CAPACITY = 64
PENDING_WRITE_CAPACITY = 128
# Largest drain batch that fits one frame payload.
MAX_DRAIN_EVENTS = 44

# MODE_CHANGED detail for a one-shot strike release.
DETAIL_BRIEF_RELEASE = 0xFF


class CommRate(IntEnum):
    BAUD_9600 = 0
    BAUD_19200 = 1
    BAUD_38400 = 2
    BAUD_57600 = 3
    BAUD_115200 = 4


@dataclass
class TerminalConfig:
    address: int
    gate_id: int
    password: bytes
    comm_rate: CommRate = CommRate.BAUD_19200
    strike_release_s: int = 5
    door_open_timeout_s: int = 30
    clock_offset_s: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not 1 <= self.address <= 30:
            raise ValueError(f"terminal address must be 1..30, got {self.address}")
        if not 0 <= self.gate_id <= 63:
            raise ValueError(f"gate id must be 0..63, got {self.gate_id}")
        if len(self.password) != cmd.PASSWORD_SIZE:
            raise ValueError("password must be exactly 8 bytes")
        if self.strike_release_s < 1:
            raise ValueError("strike release must be at least 1 s")
        if self.door_open_timeout_s <= self.strike_release_s:
            raise ValueError("door-open timeout must exceed the strike release time")


@dataclass(frozen=True)
class TerminalMode:
    code: cmd.ModeCode = cmd.ModeCode.NORMAL
    until: int = 0
    categories: frozenset[int] = frozenset()

    @classmethod
    def normal(cls) -> "TerminalMode":
        return cls()

    @classmethod
    def unlocked_until(cls, ts: int) -> "TerminalMode":
        return cls(code=cmd.ModeCode.UNLOCKED_UNTIL, until=ts)

    @classmethod
    def category(cls, holder_types) -> "TerminalMode":
        return cls(code=cmd.ModeCode.CATEGORY, categories=frozenset(int(t) for t in holder_types))


class Verdict(str, Enum):
    GRANT = "GRANT"
    DENY = "DENY"


@dataclass(frozen=True)
class AccessDecision:
    verdict: Verdict
    reason: DenyReason | None = None

    @property
    def granted(self) -> bool:
        return self.verdict is Verdict.GRANT


def _grant() -> AccessDecision:
    return AccessDecision(Verdict.GRANT)


def _deny(reason: DenyReason) -> AccessDecision:
    return AccessDecision(Verdict.DENY, reason)


class GateTerminal:
    """One gate: reader, door actuator, event memory, command handler."""

    def __init__(
        self,
        config: TerminalConfig,
        system_key: bytes,
        layouts: dict[int, Layout] | None = None,
        reader: ReaderFieldModel | None = None,
    ):
        self.config = config
        self.system_key = system_key
        self.layouts = dict(layouts) if layouts is not None else {CARD_V1.layout_id: CARD_V1}
        self.reader = reader or ReaderFieldModel()
        self.mode = TerminalMode.normal()
        self.door = DoorState()
        self._events: deque[EventRecord] = deque()
        self._next_seq = 1
        self._overflow_pending = False
        self._last_event_ts = 0
        self._last_tick: int | None = None
        # uid -> None, FIFO order for eviction
        self._revocations: OrderedDict[int, None] = OrderedDict()
        # uid -> {field_id: value bytes}, write replaced per field
        self._pending_writes: OrderedDict[int, OrderedDict[int, bytes]] = OrderedDict()

    # -- time ----------------------------------------------------------------

    def local_time(self, now: int) -> int:
        return now + self.config.clock_offset_s

    @staticmethod
    def _date_of(local_ts: int) -> datetime.date:
        return datetime.date(1970, 1, 1) + datetime.timedelta(days=local_ts // 86400)

    # -- event memory --------------------------------------------------------

    @property
    def queue_len(self) -> int:
        return len(self._events)

    @property
    def last_seq(self) -> int:
        return self._next_seq - 1

    def _emit(self, kind: EventKind, ts: int, uid: int = 0, detail: int = 0) -> EventRecord:
        if len(self._events) >= EVENT_QUEUE_CAPACITY:
            self._events.popleft()
            self._overflow_pending = True
        if self._overflow_pending:
            detail |= 0x8000
            self._overflow_pending = False
        ts = max(ts, self._last_event_ts)
        self._last_event_ts = ts
        record = EventRecord(seq=self._next_seq, ts=ts, uid=uid, kind=kind, detail=detail)
        self._next_seq += 1
        self._events.append(record)
        return record

    def peek_events(self, max_events: int) -> list[EventRecord]:
        """Oldest un-acked events, non-destructive."""
        count = min(max_events, len(self._events))
        return [self._events[i] for i in range(count)]

    def ack_events(self, seq: int) -> int:
        dropped = 0
        while self._events and self._events[0].seq <= seq:
            self._events.popleft()
            dropped += 1
        return dropped

    # -- door timers ---------------------------------------------------------

    def _advance_door(self, now: int, sink: list[EventRecord]) -> None:
        for kind, ts in self.door.advance(now, self.config.door_open_timeout_s):
            sink.append(self._emit(kind, ts))

    # -- card write-backs ----------------------------------------------------

    def _apply_writes(
        self, image: TagImage, layout: Layout, revoke: bool, now: int, sink: list[EventRecord]
    ) -> TagImage:
        """Apply the revocation lock flag and any queued writes, then re-sign."""
        written: list[int] = []
        if revoke:
            flags = decode_field(layout, image, "flags")
            try:
                image = encode_field(layout, image, "flags", flags | {FLAG_LOCKED})
                written.append(layout.field_id("flags"))
            except BlockLocked:
                pass
        for field_id, value in self._pending_writes.pop(image.uid.value, {}).items():
            try:
                spec = layout.field_by_id(field_id)
            except Exception:
                continue  # queued for a different layout; drop
            if len(value) != spec.length:
                continue
            try:
                image = image.with_bytes(spec.offset, value)
                written.append(field_id)
            except BlockLocked:
                continue
        if written:
            image = sign_card(self.system_key, image)
            for field_id in written:
                sink.append(self._emit(EventKind.CARD_WRITTEN, now, uid=image.uid.value, detail=field_id))
        return image

    # -- authorization -------------------------------------------------------

    def on_tag_read(self, image: TagImage, now: int) -> tuple[AccessDecision, TagImage, list[EventRecord]]:
        """Decide access for one presented card, locally.

        Returns the decision, the (possibly rewritten) card image, and the
        events emitted during this call. Exactly one ACCESS_GRANTED or
        ACCESS_DENIED is always among them.
        """
        events: list[EventRecord] = []
        self._advance_door(now, events)
        local = self.local_time(now)

        if not verify_card(self.system_key, image):
            decision = _deny(DenyReason.UNREGISTERED)
            events.append(self._emit(EventKind.ACCESS_DENIED, now, uid=image.uid.value, detail=decision.reason))
            return decision, image, events

        layout = self.layouts.get(int.from_bytes(image.read(0, 2), "little"))
        if layout is None:
            decision = _deny(DenyReason.UNREGISTERED)
            events.append(self._emit(EventKind.ACCESS_DENIED, now, uid=image.uid.value, detail=decision.reason))
            return decision, image, events

        revoked = image.uid.value in self._revocations
        if revoked:
            del self._revocations[image.uid.value]
        image = self._apply_writes(image, layout, revoked, now, events)

        decision = self._decide(image, layout, revoked, local)
        if decision.granted:
            self.door.release(now, self.config.strike_release_s)
            events.append(self._emit(EventKind.ACCESS_GRANTED, now, uid=image.uid.value))
        else:
            events.append(self._emit(EventKind.ACCESS_DENIED, now, uid=image.uid.value, detail=decision.reason))
        return decision, image, events

    def _decide(self, image: TagImage, layout: Layout, revoked: bool, local: int) -> AccessDecision:
        if revoked:
            return _deny(DenyReason.REVOKED)
        if FLAG_LOCKED in decode_field(layout, image, "flags"):
            return _deny(DenyReason.LOCKED)
        if decode_field(layout, image, "expiry_date") < self._date_of(local):
            return _deny(DenyReason.EXPIRED)
        if self.mode.code is cmd.ModeCode.UNLOCKED_UNTIL and self.mode.until >= local:
            return _grant()
        if (
            self.mode.code is cmd.ModeCode.CATEGORY
            and decode_field(layout, image, "holder_type") in self.mode.categories
        ):
            return _grant()
        if self.config.gate_id not in decode_field(layout, image, "gate_list"):
            return _deny(DenyReason.GATE_NOT_ALLOWED)
        if not schedule_allows(decode_field(layout, image, "schedule"), local):
            return _deny(DenyReason.OUT_OF_SCHEDULE)
        return _grant()

    # -- door sensor ---------------------------------------------------------

    def tick(self, now: int, sensor_open: bool) -> list[EventRecord]:
        """Advance timers and apply a door sensor reading."""
        if self._last_tick is not None and now < self._last_tick:
            raise ClockWentBackwards(now, self._last_tick)
        self._last_tick = now
        events: list[EventRecord] = []
        self._advance_door(now, events)
        for kind, ts in self.door.set_sensor(now, sensor_open):
            events.append(self._emit(kind, ts))
        return events

    # -- operator actions ----------------------------------------------------

    def local_assign_rights(
        self,
        image: TagImage,
        gates,
        schedule: Schedule,
        operator_password: bytes,
        now: int,
    ) -> TagImage:
        """Rewrite a card's gate list and schedule at this terminal."""
        if operator_password != self.config.password:
            raise AuthDenied("wrong terminal password")
        if not verify_card(self.system_key, image):
            raise UnknownCard(image.uid.hex)
        layout = self.layouts.get(int.from_bytes(image.read(0, 2), "little"))
        if layout is None:
            raise UnknownCard(image.uid.hex)
        image = encode_field(layout, image, "gate_list", frozenset(gates))
        image = encode_field(layout, image, "schedule", schedule)
        image = sign_card(self.system_key, image)
        for name in ("gate_list", "schedule"):
            self._emit(EventKind.CARD_WRITTEN, now, uid=image.uid.value, detail=layout.field_id(name))
        return image

    # -- command handler -----------------------------------------------------

    def handle_command(self, code: int, payload: bytes, now: int) -> tuple[int, bytes]:
        """Execute one bus command; returns (response code, response payload).

        The frame layer has already validated CRC and addressing. Unknown
        codes, bad passwords, and malformed payloads answer ERR with a
        reason byte rather than raising.
        """
        flushed: list[EventRecord] = []
        self._advance_door(now, flushed)

        if code in cmd.PASSWORD_COMMANDS:
            if len(payload) < cmd.PASSWORD_SIZE:
                return cmd.RESP_ERR, cmd.err_payload(cmd.ERR_BAD_ARG)
            if payload[: cmd.PASSWORD_SIZE] != self.config.password:
                return cmd.RESP_ERR, cmd.err_payload(cmd.ERR_AUTH)
            payload = payload[cmd.PASSWORD_SIZE :]

        try:
            return self._dispatch(code, payload, now)
        except (struct.error, ValueError, IndexError):
            return cmd.RESP_ERR, cmd.err_payload(cmd.ERR_BAD_ARG)

    def _dispatch(self, code: int, body: bytes, now: int) -> tuple[int, bytes]:
        if code == cmd.CMD_PING:
            return cmd.RESP_ACK, b""

        if code == cmd.CMD_GET_STATUS:
            status = cmd.StatusReply(
                door=cmd.DoorCode[self.door.position.name],
                mode=self.mode.code,
                queue_len=min(self.queue_len, 0xFFFF),
                last_seq=self.last_seq,
                local_time=self.local_time(now),
            )
            return cmd.RESP_DATA, cmd.pack_status(status)

        if code == cmd.CMD_DRAIN_EVENTS:
            (max_events,) = struct.unpack("<B", body)
            return cmd.RESP_DATA, pack_events(self.peek_events(min(max_events, MAX_DRAIN_EVENTS)))

        if code == cmd.CMD_ACK_EVENTS:
            (seq,) = struct.unpack("<I", body)
            self.ack_events(seq)
            return cmd.RESP_ACK, b""

        if code == cmd.CMD_SET_CONFIG:
            fixed = cmd.CONFIG_BODY.size
            address, gate_id, rate, strike, timeout = cmd.CONFIG_BODY.unpack(body[:fixed])
            new_password = body[fixed:]
            if len(new_password) != cmd.PASSWORD_SIZE:
                return cmd.RESP_ERR, cmd.err_payload(cmd.ERR_BAD_ARG)
            candidate = TerminalConfig(
                address=address,
                gate_id=gate_id,
                password=new_password,
                comm_rate=CommRate(rate),
                strike_release_s=strike,
                door_open_timeout_s=timeout,
                clock_offset_s=self.config.clock_offset_s,
            )
            self.config = candidate
            self._emit(EventKind.CONFIG_CHANGED, now, detail=code)
            return cmd.RESP_ACK, b""

        if code == cmd.CMD_GET_CONFIG:
            return cmd.RESP_DATA, cmd.CONFIG_BODY.pack(
                self.config.address,
                self.config.gate_id,
                self.config.comm_rate,
                self.config.strike_release_s,
                self.config.door_open_timeout_s,
            )

        if code == cmd.CMD_UNLOCK_BRIEF:
            self.door.release(now, self.config.strike_release_s)
            self._emit(EventKind.MODE_CHANGED, now, detail=DETAIL_BRIEF_RELEASE)
            return cmd.RESP_ACK, b""

        if code == cmd.CMD_UNLOCK_UNTIL:
            (until,) = struct.unpack("<Q", body)
            self.mode = TerminalMode.unlocked_until(until)
            self._emit(EventKind.MODE_CHANGED, now, detail=cmd.ModeCode.UNLOCKED_UNTIL)
            return cmd.RESP_ACK, b""

        if code == cmd.CMD_SET_MODE:
            mode_code = cmd.ModeCode(body[0])
            if mode_code is cmd.ModeCode.UNLOCKED_UNTIL:
                (until,) = struct.unpack_from("<Q", body, 1)
                self.mode = TerminalMode.unlocked_until(until)
            elif mode_code is cmd.ModeCode.CATEGORY:
                mask = body[1]
                self.mode = TerminalMode.category(t for t in range(8) if mask >> t & 1)
            else:
                self.mode = TerminalMode.normal()
            self._emit(EventKind.MODE_CHANGED, now, detail=mode_code)
            return cmd.RESP_ACK, b""

        if code == cmd.CMD_PUSH_REVOCATION:
            count = body[0]
            if len(body) != 1 + 8 * count:
                return cmd.RESP_ERR, cmd.err_payload(cmd.ERR_BAD_ARG)
            for i in range(count):
                uid = int.from_bytes(body[1 + 8 * i : 9 + 8 * i], "big")
                self._revocations.pop(uid, None)
                self._revocations[uid] = None
                while len(self._revocations) > REVOCATION_CAPACITY:
                    self._revocations.popitem(last=False)
            self._emit(EventKind.CONFIG_CHANGED, now, detail=code)
            return cmd.RESP_ACK, b""

        if code == cmd.CMD_QUEUE_CARD_WRITE:
            if len(body) < 9:
                return cmd.RESP_ERR, cmd.err_payload(cmd.ERR_BAD_ARG)
            uid = int.from_bytes(body[:8], "big")
            field_id = body[8]
            value = body[9:]
            queue = self._pending_writes.setdefault(uid, OrderedDict())
            queue.pop(field_id, None)
            queue[field_id] = value
            while len(self._pending_writes) > PENDING_WRITE_CAPACITY:
                self._pending_writes.popitem(last=False)
            self._emit(EventKind.CONFIG_CHANGED, now, detail=code)
            return cmd.RESP_ACK, b""

        if code == cmd.CMD_SET_TIME:
            (ts,) = struct.unpack("<Q", body)
            self.config.clock_offset_s = ts - now
            self._emit(EventKind.CONFIG_CHANGED, now, detail=code)
            return cmd.RESP_ACK, b""

        if code == cmd.CMD_DISCOVER:
            return cmd.RESP_DATA, bytes([self.config.address])

        return cmd.RESP_ERR, cmd.err_payload(cmd.ERR_UNKNOWN_CMD)

    # -- inspection ----------------------------------------------------------

    def is_revoked(self, uid: int) -> bool:
        return uid in self._revocations

    def pending_write_fields(self, uid: int) -> list[int]:
        return list(self._pending_writes.get(uid, ()))
