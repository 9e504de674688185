"""The central application: one writer, many readers.

The registry records *intent* (who may pass where); the card remains
authoritative for what a gate actually sees, so every rights change is
realized as card writes — immediate when the card sits on the desk
reader, queued to the affected terminals otherwise, landing on next
sight.

Event ingestion is exactly-once: terminals hand over batches that stay
queued until acknowledged, the coordinator drops everything at or below
the highest sequence it has already ingested, and state is persisted
*before* the acknowledgment goes out. A crash between the two re-drains
an already-persisted batch, which deduplication then discards.

Terminals get a global integer identity ``bus_index * 32 + address`` so
several buses can coexist; on a single bus the identity equals the bus
address.
"""

from __future__ import annotations

import datetime
import json
import os
import random
from dataclasses import dataclass
from pathlib import Path

from campus.bus import commands as cmd
from campus.bus.bus import SimBus
from campus.clock import WallClock
from campus.coordinator.alarms import AlarmEngine
from campus.coordinator.reports import ReportQuery, StoredEvent, render_report
from campus.coordinator.store import open_container, seal_container
from campus.coordinator.users import Role, UserDirectory, require_role
from campus.errors import DuplicateActiveCard, MalformedLog, Timeout, UnknownCard
from campus.tag.codecs import Encoding, encode_value
from campus.tag.image import TagImage, TagUid
from campus.tag.layout import CARD_V1, Schedule, encode_field
from campus.tag.signing import sign_card
from campus.terminal.events import EventKind, EventRecord, unpack_events

TERMINAL_ID_STRIDE = 32
DEFAULT_DRAIN_BATCH = 40
_UID_HEX = 16


@dataclass
class TerminalLink:
    """Coordinator-side record of one terminal on one bus."""

    terminal_id: int
    bus_index: int
    address: int
    gate_id: int


@dataclass
class RegistryEntry:
    uid: int
    personal_id: int
    holder_type: int
    issued_at: int
    issue_number: int
    gates: frozenset[int]
    schedule: Schedule
    locked: bool = False
    active: bool = True
    last_seen_ts: int | None = None
    last_seen_gate: int | None = None

    def __post_init__(self):
        # field name -> {"ts", "source", "value" (hex or None)}
        self.writes: dict[str, dict] = {}


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _schedule_to_state(schedule: Schedule) -> list[list[int]]:
    return [list(pair) for pair in schedule]


def _schedule_from_state(raw) -> Schedule:
    return tuple((int(a), int(b)) for a, b in raw)


class Coordinator:
    def __init__(
        self,
        system_key: bytes,
        passphrase: str | None = None,
        store_path: str | Path | None = None,
        clock=None,
        rng: random.Random | None = None,
        auto_persist: bool = True,
    ):
        if store_path is not None and passphrase is None:
            raise ValueError("store_path requires a passphrase; persistence would be skipped silently")
        self.system_key = system_key
        self.passphrase = passphrase
        self.store_path = Path(store_path) if store_path is not None else None
        self.clock = clock if clock is not None else WallClock()
        self.rng = rng or random.Random()
        self.auto_persist = auto_persist

        self.buses: list[SimBus] = []
        self.terminals: dict[int, TerminalLink] = {}
        self.registry: dict[int, RegistryEntry] = {}
        self._pid_active: dict[int, int] = {}  # personal_id -> newest uid
        self.events: list[StoredEvent] = []
        self._seen: dict[int, int] = {}  # terminal_id -> highest ingested seq
        self.users = UserDirectory()
        self.alarms = AlarmEngine()
        self.audit: list[dict] = []
        self._mobile_seen: dict[str, set[int]] = {}  # session -> seqs merged
        self.pc_reader: dict[int, TagImage] = {}  # cards on the desk reader

    # -- topology ------------------------------------------------------------

    def attach_bus(self, bus: SimBus) -> int:
        self.buses.append(bus)
        return len(self.buses) - 1

    def register_terminal(self, bus_index: int, address: int, gate_id: int) -> int:
        terminal_id = bus_index * TERMINAL_ID_STRIDE + address
        self.terminals[terminal_id] = TerminalLink(terminal_id, bus_index, address, gate_id)
        return terminal_id

    def adopt_bus(self, bus: SimBus) -> list[int]:
        """Attach a bus and register every terminal already on it."""
        index = self.attach_bus(bus)
        return [
            self.register_terminal(index, t.config.address, t.config.gate_id)
            for t in bus.terminals
        ]

    def discover_all(self, rounds: int = 3) -> dict[int, list[int]]:
        now = self.clock.now()
        return {i: bus.discover(now, rounds=rounds) for i, bus in enumerate(self.buses)}

    def _link(self, terminal_id: int) -> TerminalLink:
        try:
            return self.terminals[terminal_id]
        except KeyError:
            from campus.errors import NoSuchTerminal

            raise NoSuchTerminal(terminal_id) from None

    def _bus_of(self, link: TerminalLink) -> SimBus:
        return self.buses[link.bus_index]

    # -- card registry -------------------------------------------------------

    def register_card(
        self,
        acting: Role,
        personal_id: int,
        holder_type: int,
        expiry_date: datetime.date,
        gates,
        schedule: Schedule,
        meal_plan: int = 0,
        restaurant_cents: int = 0,
        service_cents: int = 0,
    ) -> tuple[TagUid, TagImage]:
        require_role(acting, Role.OPERATOR)
        now = self.clock.now()
        issue_number = 1
        previous_uid = self._pid_active.get(personal_id)
        if previous_uid is not None:
            previous = self.registry[previous_uid]
            if previous.active and not previous.locked:
                raise DuplicateActiveCard(personal_id)
            previous.active = False
            issue_number = previous.issue_number + 1

        uid = TagUid.generate(self.rng)
        while uid.value in self.registry:
            uid = TagUid.generate(self.rng)

        gates = frozenset(gates)
        image = TagImage.blank(uid)
        image = encode_field(CARD_V1, image, "layout_id", CARD_V1.layout_id)
        image = encode_field(CARD_V1, image, "personal_id", personal_id)
        image = encode_field(CARD_V1, image, "expiry_date", expiry_date)
        image = encode_field(CARD_V1, image, "issue_number", issue_number)
        image = encode_field(CARD_V1, image, "holder_type", int(holder_type))
        image = encode_field(CARD_V1, image, "meal_plan", meal_plan)
        image = encode_field(CARD_V1, image, "restaurant_account", restaurant_cents)
        image = encode_field(CARD_V1, image, "service_account_1", service_cents)
        image = encode_field(CARD_V1, image, "gate_list", gates)
        image = encode_field(CARD_V1, image, "schedule", schedule)
        image = sign_card(self.system_key, image)

        self.registry[uid.value] = RegistryEntry(
            uid=uid.value,
            personal_id=personal_id,
            holder_type=int(holder_type),
            issued_at=now,
            issue_number=issue_number,
            gates=gates,
            schedule=schedule,
        )
        self._pid_active[personal_id] = uid.value
        self.audit.append(
            {"type": "register_card", "ts": now, "uid": uid.hex, "personal_id": personal_id, "issue": issue_number}
        )
        self._maybe_persist()
        return uid, image

    def _entry(self, uid: int) -> RegistryEntry:
        try:
            return self.registry[uid]
        except KeyError:
            raise UnknownCard(f"{uid:016X}") from None

    def uid_to_pid(self) -> dict[int, int]:
        return {uid: entry.personal_id for uid, entry in self.registry.items()}

    # -- rights and revocation ----------------------------------------------

    def _record_intent(self, entry: RegistryEntry, field: str, value_hex: str | None, ts: int, source: str) -> None:
        entry.writes[field] = {"ts": ts, "source": source, "value": value_hex}

    def _field_intent_bytes(self, entry: RegistryEntry, field: str) -> bytes | None:
        if field == "gate_list":
            return encode_value(Encoding.BITSET, 8, entry.gates)
        if field == "schedule":
            return encode_value(Encoding.QUARTER_HOUR_PAIR, 14, entry.schedule)
        if field == "flags":
            return encode_value(Encoding.BITSET, 1, frozenset({0}) if entry.locked else frozenset())
        return None

    def _queue_write(self, link: TerminalLink, uid: int, field: str, value: bytes, retries: int) -> bool:
        body = cmd.pack_card_write(uid, CARD_V1.field_id(field), value)
        bus = self._bus_of(link)
        try:
            bus.request(
                link.address,
                cmd.CMD_QUEUE_CARD_WRITE,
                cmd.with_password(self._terminal_password(link), body),
                self.clock.now(),
                retries=retries,
            )
            return True
        except Timeout:
            return False

    def _terminal_password(self, link: TerminalLink) -> bytes:
        # The coordinator provisions terminals, so it knows their
        # passwords; the sim reads it off the live object.
        bus = self._bus_of(link)
        for terminal in bus.terminals:
            if terminal.config.address == link.address:
                return terminal.config.password
        return b"\x00" * cmd.PASSWORD_SIZE

    def assign_rights(self, acting: Role, uid: int, gates, schedule: Schedule, retries: int = 3) -> dict:
        require_role(acting, Role.OPERATOR)
        entry = self._entry(uid)
        now = self.clock.now()
        entry.gates = frozenset(gates)
        entry.schedule = schedule
        for field in ("gate_list", "schedule"):
            self._record_intent(entry, field, self._field_intent_bytes(entry, field).hex(), now, "coordinator")

        plan = {"uid": f"{uid:016X}", "written_immediately": False, "queued_terminals": [], "unreachable": []}
        if uid in self.pc_reader:
            image = self.pc_reader[uid]
            image = encode_field(CARD_V1, image, "gate_list", entry.gates)
            image = encode_field(CARD_V1, image, "schedule", entry.schedule)
            self.pc_reader[uid] = sign_card(self.system_key, image)
            plan["written_immediately"] = True
        else:
            for link in self._links_for_gates(entry.gates):
                ok = self._queue_write(link, uid, "gate_list", self._field_intent_bytes(entry, "gate_list"), retries)
                ok = ok and self._queue_write(link, uid, "schedule", self._field_intent_bytes(entry, "schedule"), retries)
                (plan["queued_terminals"] if ok else plan["unreachable"]).append(link.terminal_id)
        self.audit.append({"type": "assign_rights", "ts": now, "uid": f"{uid:016X}", "gates": sorted(entry.gates)})
        self._maybe_persist()
        return plan

    def _links_for_gates(self, gates: frozenset[int]) -> list[TerminalLink]:
        return [link for _, link in sorted(self.terminals.items()) if link.gate_id in gates]

    def lock_card(self, acting: Role, uid: int, retries: int = 3) -> dict:
        require_role(acting, Role.OPERATOR)
        entry = self._entry(uid)
        now = self.clock.now()
        entry.locked = True
        self._record_intent(entry, "flags", self._field_intent_bytes(entry, "flags").hex(), now, "coordinator")
        result = {"uid": f"{uid:016X}", "pushed": 0, "unreachable": []}
        body = cmd.pack_revocations([uid])
        for terminal_id, link in sorted(self.terminals.items()):
            try:
                self._bus_of(link).request(
                    link.address,
                    cmd.CMD_PUSH_REVOCATION,
                    cmd.with_password(self._terminal_password(link), body),
                    now,
                    retries=retries,
                )
                result["pushed"] += 1
            except Timeout:
                result["unreachable"].append(terminal_id)
        if uid in self.pc_reader:
            image = encode_field(CARD_V1, self.pc_reader[uid], "flags", frozenset({0}))
            self.pc_reader[uid] = sign_card(self.system_key, image)
        self.audit.append({"type": "lock_card", "ts": now, "uid": f"{uid:016X}"})
        self._maybe_persist()
        return result

    def unlock_card(self, acting: Role, uid: int, retries: int = 3) -> dict:
        require_role(acting, Role.OPERATOR)
        entry = self._entry(uid)
        now = self.clock.now()
        entry.locked = False
        self._record_intent(entry, "flags", self._field_intent_bytes(entry, "flags").hex(), now, "coordinator")
        result = {"uid": f"{uid:016X}", "queued": 0, "unreachable": []}
        value = self._field_intent_bytes(entry, "flags")
        for terminal_id, link in sorted(self.terminals.items()):
            if self._queue_write(link, uid, "flags", value, retries):
                result["queued"] += 1
            else:
                result["unreachable"].append(terminal_id)
        if uid in self.pc_reader:
            image = encode_field(CARD_V1, self.pc_reader[uid], "flags", frozenset())
            self.pc_reader[uid] = sign_card(self.system_key, image)
        self.audit.append({"type": "unlock_card", "ts": now, "uid": f"{uid:016X}"})
        self._maybe_persist()
        return result

    # -- terminal actions ----------------------------------------------------

    def _live_terminal(self, link: TerminalLink):
        for terminal in self._bus_of(link).terminals:
            if terminal.config.address == link.address:
                return terminal
        return None

    def terminal_unlock_brief(self, acting: Role, terminal_id: int, retries: int = 3) -> None:
        require_role(acting, Role.OPERATOR)
        link = self._link(terminal_id)
        self._bus_of(link).request(
            link.address,
            cmd.CMD_UNLOCK_BRIEF,
            cmd.with_password(self._terminal_password(link), b""),
            self.clock.now(),
            retries=retries,
        )

    def terminal_unlock_until(self, acting: Role, terminal_id: int, until: int, retries: int = 3) -> None:
        require_role(acting, Role.OPERATOR)
        link = self._link(terminal_id)
        self._bus_of(link).request(
            link.address,
            cmd.CMD_UNLOCK_UNTIL,
            cmd.with_password(self._terminal_password(link), cmd.pack_unlock_until(until)),
            self.clock.now(),
            retries=retries,
        )

    def terminal_set_mode(
        self,
        acting: Role,
        terminal_id: int,
        mode: cmd.ModeCode,
        until: int = 0,
        categories=(),
        retries: int = 3,
    ) -> None:
        require_role(acting, Role.OPERATOR)
        link = self._link(terminal_id)
        mask = 0
        for holder_type in categories:
            mask |= 1 << int(holder_type)
        self._bus_of(link).request(
            link.address,
            cmd.CMD_SET_MODE,
            cmd.with_password(self._terminal_password(link), cmd.pack_set_mode(mode, until, mask)),
            self.clock.now(),
            retries=retries,
        )

    def terminal_status(self, terminal_id: int, retries: int = 3) -> cmd.StatusReply:
        link = self._link(terminal_id)
        reply = self._bus_of(link).request(
            link.address, cmd.CMD_GET_STATUS, b"", self.clock.now(), retries=retries
        )
        return cmd.parse_status(reply.payload)

    def door_states(self) -> list[dict]:
        """Live door wall: one row per registered terminal."""
        rows = []
        for terminal_id, link in sorted(self.terminals.items()):
            live = self._live_terminal(link)
            rows.append(
                {
                    "terminal": terminal_id,
                    "gate": link.gate_id,
                    "door": live.door.position.name if live is not None else None,
                    "mode": live.mode.code.name if live is not None else None,
                    "alarmed": bool(self.alarms.unacknowledged(terminal_id)),
                }
            )
        return rows

    # -- event ingestion -----------------------------------------------------

    def _ingest(self, link: TerminalLink, event: EventRecord) -> None:
        self._seen[link.terminal_id] = event.seq
        self.events.append(
            StoredEvent(
                terminal=link.terminal_id,
                gate=link.gate_id,
                seq=event.seq,
                ts=event.ts,
                uid=event.uid,
                kind=int(event.kind),
                detail=event.detail,
            )
        )
        entry = self.registry.get(event.uid) if event.uid else None
        if entry is not None:
            if entry.last_seen_ts is None or event.ts >= entry.last_seen_ts:
                entry.last_seen_ts = event.ts
                entry.last_seen_gate = link.gate_id
            if event.kind == EventKind.CARD_WRITTEN:
                field_id = event.detail & 0x7FFF
                try:
                    field = CARD_V1.field_by_id(field_id).name
                except Exception:
                    field = f"field_{field_id}"
                value = self._field_intent_bytes(entry, field) if field in ("gate_list", "schedule", "flags") else None
                self._merge_write(
                    entry, field, value.hex() if value is not None else None, event.ts, f"terminal:{link.terminal_id}"
                )
        self.alarms.evaluate(link.terminal_id, link.gate_id, event, self.clock.now())

    def poll_terminal(self, terminal_id: int, batch: int = DEFAULT_DRAIN_BATCH, retries: int = 3) -> int:
        """Drain, persist, then acknowledge, until the terminal is empty."""
        link = self._link(terminal_id)
        bus = self._bus_of(link)
        total = 0
        while True:
            now = self.clock.now()
            reply = bus.request(link.address, cmd.CMD_DRAIN_EVENTS, cmd.pack_drain(batch), now, retries=retries)
            drained = unpack_events(reply.payload)
            if not drained:
                break
            fresh = [e for e in drained if e.seq > self._seen.get(terminal_id, 0)]
            for event in fresh:
                self._ingest(link, event)
            if fresh:
                self._maybe_persist()
            total += len(fresh)
            bus.request(
                link.address, cmd.CMD_ACK_EVENTS, cmd.pack_ack_events(drained[-1].seq), now, retries=retries
            )
        return total

    def poll_all(self, batch: int = DEFAULT_DRAIN_BATCH, retries: int = 3) -> dict[int, int]:
        """Poll every terminal; timeouts are recorded, not raised."""
        counts: dict[int, int] = {}
        for terminal_id in sorted(self.terminals):
            try:
                counts[terminal_id] = self.poll_terminal(terminal_id, batch=batch, retries=retries)
            except Timeout:
                counts[terminal_id] = -1
        return counts

    # -- reports -------------------------------------------------------------

    def query_report(self, query: ReportQuery) -> bytes:
        return render_report(self.events, query, self.uid_to_pid())

    # -- mobile reader import ------------------------------------------------

    def _merge_write(self, entry: RegistryEntry, field: str, value_hex: str | None, ts: int, source: str) -> None:
        existing = entry.writes.get(field)
        if existing is None:
            self._record_intent(entry, field, value_hex, ts, source)
            return
        if existing["value"] != value_hex:
            winner, loser = (existing, {"ts": ts, "source": source, "value": value_hex})
            if ts > existing["ts"]:
                winner, loser = loser, winner
            self.audit.append(
                {
                    "type": "write_conflict",
                    "uid": f"{entry.uid:016X}",
                    "field": field,
                    "kept": winner,
                    "dropped": loser,
                    "ts": self.clock.now(),
                }
            )
            entry.writes[field] = winner
        elif ts > existing["ts"]:
            self._record_intent(entry, field, value_hex, ts, source)

    def import_mobile_log(self, acting: Role, text: str) -> int:
        """Merge a mobile reader session log (JSON lines); returns records merged."""
        require_role(acting, Role.OPERATOR)
        records = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLog(f"line {lineno}: {exc.msg}") from None
            if not isinstance(rec, dict):
                raise MalformedLog(f"line {lineno}: not an object")
            missing = {"session", "seq", "ts", "uid", "op"} - rec.keys()
            if missing:
                raise MalformedLog(f"line {lineno}: missing {sorted(missing)}")
            if rec["op"] not in ("read", "write"):
                raise MalformedLog(f"line {lineno}: unknown op {rec['op']!r}")
            if rec["op"] == "write" and ("field" not in rec or "value" not in rec):
                raise MalformedLog(f"line {lineno}: write without field/value")
            if not isinstance(rec["uid"], str) or len(rec["uid"]) != _UID_HEX:
                raise MalformedLog(f"line {lineno}: uid must be 16 hex digits")
            try:
                int(rec["uid"], 16)
            except ValueError:
                raise MalformedLog(f"line {lineno}: uid must be 16 hex digits") from None
            if not isinstance(rec["seq"], int) or not isinstance(rec["ts"], int):
                raise MalformedLog(f"line {lineno}: seq and ts must be integers")
            records.append(rec)

        merged = 0
        for rec in records:
            seen = self._mobile_seen.setdefault(rec["session"], set())
            if rec["seq"] in seen:
                continue
            seen.add(rec["seq"])
            merged += 1
            uid = int(rec["uid"], 16)
            entry = self.registry.get(uid)
            if entry is None:
                self.audit.append({"type": "mobile_unknown_uid", "uid": rec["uid"], "ts": rec["ts"]})
                continue
            if entry.last_seen_ts is None or rec["ts"] >= entry.last_seen_ts:
                entry.last_seen_ts = rec["ts"]
                entry.last_seen_gate = None
            if rec["op"] == "write":
                value = rec["value"]
                value_hex = value if isinstance(value, str) else _canonical(value).hex()
                self._merge_write(entry, rec["field"], value_hex, rec["ts"], f"mobile:{rec['session']}")
        if merged:
            self.audit.append({"type": "mobile_import", "ts": self.clock.now(), "merged": merged})
            self._maybe_persist()
        return merged

    # -- persistence ---------------------------------------------------------

    def to_state(self) -> dict:
        return {
            "version": 1,
            "system_key": self.system_key.hex(),
            "rng_state": self._rng_state(),
            "users": self.users.to_state(),
            "terminals": [
                {
                    "terminal_id": link.terminal_id,
                    "bus_index": link.bus_index,
                    "address": link.address,
                    "gate_id": link.gate_id,
                }
                for _, link in sorted(self.terminals.items())
            ],
            "registry": {
                f"{uid:016X}": {
                    "personal_id": e.personal_id,
                    "holder_type": e.holder_type,
                    "issued_at": e.issued_at,
                    "issue_number": e.issue_number,
                    "gates": sorted(e.gates),
                    "schedule": _schedule_to_state(e.schedule),
                    "locked": e.locked,
                    "active": e.active,
                    "last_seen_ts": e.last_seen_ts,
                    "last_seen_gate": e.last_seen_gate,
                    "writes": e.writes,
                }
                for uid, e in sorted(self.registry.items())
            },
            "events": [
                [e.terminal, e.gate, e.seq, e.ts, e.uid, e.kind, e.detail] for e in self.events
            ],
            "seen_seq": {str(k): v for k, v in sorted(self._seen.items())},
            "alarms": self.alarms.to_state(),
            "audit": self.audit,
            "mobile_sessions": {k: sorted(v) for k, v in sorted(self._mobile_seen.items())},
        }

    def _rng_state(self) -> list:
        version, internal, gauss = self.rng.getstate()
        return [version, list(internal), gauss]

    def state_bytes(self) -> bytes:
        return _canonical(self.to_state())

    def apply_state(self, state: dict) -> None:
        self.system_key = bytes.fromhex(state["system_key"])
        version, internal, gauss = state["rng_state"]
        self.rng.setstate((version, tuple(internal), gauss))
        self.users = UserDirectory.from_state(state["users"])
        self.terminals = {
            t["terminal_id"]: TerminalLink(t["terminal_id"], t["bus_index"], t["address"], t["gate_id"])
            for t in state["terminals"]
        }
        self.registry = {}
        self._pid_active = {}
        for uid_hex, rec in state["registry"].items():
            uid = int(uid_hex, 16)
            entry = RegistryEntry(
                uid=uid,
                personal_id=rec["personal_id"],
                holder_type=rec["holder_type"],
                issued_at=rec["issued_at"],
                issue_number=rec["issue_number"],
                gates=frozenset(rec["gates"]),
                schedule=_schedule_from_state(rec["schedule"]),
                locked=rec["locked"],
                active=rec["active"],
                last_seen_ts=rec["last_seen_ts"],
                last_seen_gate=rec["last_seen_gate"],
            )
            entry.writes = rec["writes"]
            self.registry[uid] = entry
            if entry.active:
                self._pid_active[entry.personal_id] = uid
        self.events = [StoredEvent(*row) for row in state["events"]]
        self._seen = {int(k): v for k, v in state["seen_seq"].items()}
        self.alarms = AlarmEngine.from_state(state["alarms"])
        self.audit = list(state["audit"])
        self._mobile_seen = {k: set(v) for k, v in state["mobile_sessions"].items()}

    def persist(self) -> None:
        if self.store_path is None:
            return
        blob = seal_container(self.passphrase, self.state_bytes())
        tmp = self.store_path.with_suffix(".tmp")
        tmp.write_bytes(blob)
        os.replace(tmp, self.store_path)

    def _maybe_persist(self) -> None:
        if self.auto_persist:
            self.persist()

    def backup(self, directory: str | Path) -> Path:
        now = self.clock.now()
        stamp = datetime.datetime.fromtimestamp(now, tz=datetime.timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        path = Path(directory) / f"campus-{stamp}.cgdb"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(seal_container(self.passphrase or "", self.state_bytes()))
        self.audit.append({"type": "backup", "ts": now, "path": path.name})
        self._maybe_persist()
        return path

    @classmethod
    def restore(
        cls,
        passphrase: str,
        path: str | Path,
        clock=None,
        store_path: str | Path | None = None,
        auto_persist: bool = True,
    ) -> "Coordinator":
        payload = open_container(passphrase, Path(path).read_bytes())
        state = json.loads(payload.decode("utf-8"))
        coordinator = cls(
            system_key=b"",
            passphrase=passphrase,
            store_path=store_path if store_path is not None else path,
            clock=clock,
            auto_persist=auto_persist,
        )
        coordinator.apply_state(state)
        return coordinator
