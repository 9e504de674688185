"""Deterministic scenario runner.

A scenario file (YAML mapping, or JSON for generated fixtures) declares
terminals, card registrations, and a time-ordered script of actions:

    present  - hold a card in a reader field
    door     - drive a door sensor edge
    admin    - a coordinator operation (lock, unlock, assign, debit, ...)
    poll     - drain one terminal or all of them
    advance  - let time pass

Everything runs on a virtual integer-seconds clock; all randomness (tag
UIDs, bus faults) descends from the scenario seed, so a transcript is a
pure function of (file, seed) and two runs are byte-identical.

Events appear in the transcript when the coordinator ingests them (under
the POLL line that drained them), in ingestion order; decisions and
sensor edges appear at action time. Terminals are listed in file order
and sharded onto buses in chunks of thirty, so a terminal's global id is
``bus_index * 32 + address``; on a one-bus scenario the id is simply the
address.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path

import yaml

from campus.bus.bus import MAX_TERMINALS, SimBus, inventory
from campus.clock import VirtualClock
from campus.coordinator.coordinator import Coordinator
from campus.coordinator.users import Role
from campus.errors import ScenarioParseError, Timeout, UndefinedReference
from campus.tag.accounts import apply_transaction
from campus.tag.layout import ALL_DAY, CARD_V1, NO_ACCESS, HolderType, Schedule, decode_field, quarter_of
from campus.tag.signing import sign_card
from campus.terminal.events import EventKind
from campus.terminal.terminal import GateTerminal, TerminalConfig

DEFAULT_DISTANCE_CM = 10.0
_DAY_KEYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


def _password_bytes(value: str) -> bytes:
    raw = value.encode("utf-8")
    if len(raw) > 8:
        raise ScenarioParseError(f"terminal password {value!r} exceeds 8 bytes")
    return raw.ljust(8, b"\x00")


def _parse_holder(value) -> int:
    if isinstance(value, int):
        return value
    try:
        return int(HolderType[value.upper()])
    except (KeyError, AttributeError):
        raise ScenarioParseError(f"unknown holder type {value!r}") from None


def _parse_window(window) -> tuple[int, int]:
    start, end = window
    if isinstance(start, str):
        start = quarter_of(start)
    if isinstance(end, str):
        end = quarter_of(end)
    return int(start), int(end)


def _parse_schedule(value) -> Schedule:
    if value is None or value == "all_day":
        return ALL_DAY
    if value == "none":
        return NO_ACCESS
    if isinstance(value, dict):
        days = []
        for key in _DAY_KEYS:
            days.append(_parse_window(value[key]) if key in value else (0, 0))
        return tuple(days)
    if isinstance(value, list):
        if len(value) != 7:
            raise ScenarioParseError("schedule list must have 7 day windows")
        return tuple(_parse_window(w) for w in value)
    raise ScenarioParseError(f"bad schedule {value!r}")


@dataclass
class _CardDef:
    card_id: str
    personal_id: int
    holder_type: int
    expiry: str
    gates: frozenset[int]
    schedule: Schedule
    balance_cents: int = 0


@dataclass
class Scenario:
    name: str
    seed: int
    start: int
    loss: float
    corrupt: float
    terminals: list[dict]
    cards: list[_CardDef]
    script: list[dict]
    passphrase: str | None = None


def load_scenario(source: str | Path | dict) -> Scenario:
    """Parse a scenario from a path, a YAML/JSON string, or a dict."""
    if isinstance(source, str) and "\n" not in source and Path(source).exists():
        source = Path(source)
    if isinstance(source, Path):
        text = source.read_text()
        raw = json.loads(text) if source.suffix == ".json" else yaml.safe_load(text)
    elif isinstance(source, dict):
        raw = source
    else:
        raw = yaml.safe_load(source)
    if not isinstance(raw, dict):
        raise ScenarioParseError("scenario must be a mapping")
    try:
        return _parse_scenario(raw)
    except ScenarioParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioParseError(str(exc)) from None


def _parse_scenario(raw: dict) -> Scenario:
    start = raw.get("start", 0)
    if isinstance(start, str):
        start = int(datetime.datetime.fromisoformat(start.replace("Z", "+00:00")).timestamp())
    faults = raw.get("faults") or {}
    terminals = []
    for t in raw.get("terminals", []):
        terminals.append(
            {
                "address": int(t["address"]),
                "gate": int(t["gate"]),
                "password": t.get("password", "terminal"),
                "strike_release_s": int(t.get("strike_release_s", 5)),
                "door_open_timeout_s": int(t.get("door_open_timeout_s", 30)),
            }
        )
    cards = []
    for c in raw.get("cards", []):
        expiry = c["expiry"]
        if isinstance(expiry, datetime.date):
            expiry = expiry.isoformat()
        cards.append(
            _CardDef(
                card_id=str(c["id"]),
                personal_id=int(c["personal_id"]),
                holder_type=_parse_holder(c.get("holder_type", "student")),
                expiry=expiry,
                gates=frozenset(int(g) for g in c.get("gates", [])),
                schedule=_parse_schedule(c.get("schedule")),
                balance_cents=int(c.get("balance_cents", 0)),
            )
        )
    script = list(raw.get("script", []))
    last_at = 0
    for entry in script:
        if not isinstance(entry, dict):
            raise ScenarioParseError(f"script entry {entry!r} is not a mapping")
        at = entry.get("at", last_at)
        if at < last_at:
            raise ScenarioParseError(f"script times must be non-decreasing (at={at} after {last_at})")
        last_at = at
    return Scenario(
        name=str(raw.get("name", "scenario")),
        seed=int(raw.get("seed", 0)),
        start=int(start),
        loss=float(faults.get("loss", 0.0)),
        corrupt=float(faults.get("corrupt", 0.0)),
        terminals=terminals,
        cards=cards,
        script=script,
        passphrase=raw.get("passphrase"),
    )


class World:
    """A live simulated campus built from a Scenario."""

    def __init__(
        self,
        scenario: Scenario,
        store_path: str | Path | None = None,
        passphrase: str | None = None,
    ):
        self.scenario = scenario
        self.clock = VirtualClock(scenario.start)
        self.rng = random.Random(scenario.seed)
        self.system_key = hashlib.sha256(f"system-key-{scenario.seed}".encode()).digest()
        self.transcript: list[str] = []

        effective_passphrase = passphrase if passphrase is not None else scenario.passphrase
        if store_path is not None and effective_passphrase is None:
            raise ScenarioParseError(
                "a store path was given but neither the scenario nor the caller "
                "provides a passphrase to seal it with"
            )
        self.coordinator = Coordinator(
            self.system_key,
            passphrase=effective_passphrase,
            store_path=store_path,
            clock=self.clock,
            rng=random.Random(self.rng.randrange(2**63)),
            auto_persist=store_path is not None,
        )
        self.coordinator.users.bootstrap("root", "rootpw", self.clock.now(), self.coordinator.rng)

        self.terminals: dict[int, GateTerminal] = {}  # terminal_id -> live object
        self._by_gate: dict[int, list[int]] = {}
        for index, spec in enumerate(scenario.terminals):
            bus_index = index // MAX_TERMINALS
            while bus_index >= len(self.coordinator.buses):
                bus = SimBus(
                    rng=random.Random(self.rng.randrange(2**63)),
                    loss_rate=scenario.loss,
                    corrupt_rate=scenario.corrupt,
                )
                self.coordinator.attach_bus(bus)
            bus = self.coordinator.buses[bus_index]
            config = TerminalConfig(
                address=spec["address"],
                gate_id=spec["gate"],
                password=_password_bytes(spec["password"]),
                strike_release_s=spec["strike_release_s"],
                door_open_timeout_s=spec["door_open_timeout_s"],
            )
            terminal = GateTerminal(config, self.system_key)
            bus.attach(terminal)
            terminal_id = self.coordinator.register_terminal(bus_index, config.address, config.gate_id)
            self.terminals[terminal_id] = terminal
            self._by_gate.setdefault(config.gate_id, []).append(terminal_id)

        self.cards: dict[str, object] = {}  # card_id -> TagImage (current bytes)
        self.uids: dict[str, int] = {}
        for card in scenario.cards:
            uid, image = self.coordinator.register_card(
                Role.OPERATOR,
                card.personal_id,
                card.holder_type,
                datetime.date.fromisoformat(card.expiry),
                card.gates,
                card.schedule,
                restaurant_cents=card.balance_cents,
            )
            self.cards[card.card_id] = image
            self.uids[card.card_id] = uid.value

    # -- reference resolution ------------------------------------------------

    def _resolve_terminal(self, entry: dict) -> int:
        if "terminal" in entry:
            terminal_id = int(entry["terminal"])
            if terminal_id not in self.terminals:
                raise UndefinedReference(f"terminal {terminal_id}")
            return terminal_id
        if "gate" in entry:
            gate = int(entry["gate"])
            ids = self._by_gate.get(gate, [])
            if not ids:
                raise UndefinedReference(f"no terminal for gate {gate}")
            if len(ids) > 1:
                raise UndefinedReference(f"gate {gate} is served by terminals {ids}; name one")
            return ids[0]
        raise ScenarioParseError(f"action needs 'terminal' or 'gate': {entry!r}")

    def _card_image(self, card_id: str):
        try:
            return self.cards[card_id]
        except KeyError:
            raise UndefinedReference(f"card {card_id!r}") from None

    # -- transcript helpers --------------------------------------------------

    def _line(self, text: str) -> None:
        self.transcript.append(f"{self.clock.now()} {text}")

    def _uid_hex(self, uid: int) -> str:
        return f"{uid:016X}" if uid else "-"

    def _emit_ingested(self, before_events: int, before_alarms: int) -> None:
        for e in self.coordinator.events[before_events:]:
            kind = EventKind(e.kind).name
            self._line(
                f"EVENT terminal={e.terminal} seq={e.seq} ts={e.ts} kind={kind} "
                f"uid={self._uid_hex(e.uid)} detail={e.detail}"
            )
        for a in self.coordinator.alarms.alarms[before_alarms:]:
            self._line(
                f"ALARM id={a.alarm_id} rule={a.rule_id} terminal={a.terminal} "
                f"kind={EventKind(a.kind).name}"
            )

    # -- actions -------------------------------------------------------------

    def _do_present(self, entry: dict) -> None:
        spec = entry["present"]
        terminal_id = self._resolve_terminal(spec)
        terminal = self.terminals[terminal_id]
        card_ids = spec.get("cards", [spec["card"]] if "card" in spec else [])
        if not card_ids:
            raise ScenarioParseError(f"present without cards: {entry!r}")
        distance = float(spec.get("distance_cm", DEFAULT_DISTANCE_CM))
        field_tags = [(self._card_image(cid), distance) for cid in card_ids]
        by_uid = {self.uids[cid]: cid for cid in card_ids}
        for image in inventory(terminal.reader, field_tags):
            card_id = by_uid[image.uid.value]
            self._line(
                f"PRESENT terminal={terminal_id} card={card_id} "
                f"uid={self._uid_hex(image.uid.value)} distance={distance:g}"
            )
            decision, new_image, _events = terminal.on_tag_read(image, self.clock.now())
            self.cards[card_id] = new_image
            reason = decision.reason.name if decision.reason is not None else "-"
            self._line(
                f"DECISION terminal={terminal_id} card={card_id} "
                f"verdict={decision.verdict.value} reason={reason}"
            )

    def _do_door(self, entry: dict) -> None:
        spec = entry["door"]
        terminal_id = self._resolve_terminal(spec)
        terminal = self.terminals[terminal_id]
        state = spec["state"].upper()
        if state not in ("OPEN", "CLOSED"):
            raise ScenarioParseError(f"door state must be OPEN or CLOSED: {entry!r}")
        terminal.tick(self.clock.now(), state == "OPEN")
        self._line(f"DOOR terminal={terminal_id} sensor={state} state={terminal.door.position.name}")

    def _do_admin(self, entry: dict) -> None:
        spec = dict(entry["admin"])
        op = spec.pop("op")
        if op == "lock":
            uid = self.uids[spec["card"]]
            result = self.coordinator.lock_card(Role.OPERATOR, uid)
            self._line(f"ADMIN op=lock card={spec['card']} pushed={result['pushed']}")
        elif op == "unlock":
            uid = self.uids[spec["card"]]
            result = self.coordinator.unlock_card(Role.OPERATOR, uid)
            self._line(f"ADMIN op=unlock card={spec['card']} queued={result['queued']}")
        elif op == "assign":
            uid = self.uids[spec["card"]]
            gates = frozenset(int(g) for g in spec["gates"])
            schedule = _parse_schedule(spec.get("schedule"))
            plan = self.coordinator.assign_rights(Role.OPERATOR, uid, gates, schedule)
            self._line(
                f"ADMIN op=assign card={spec['card']} gates={sorted(gates)} "
                f"immediate={int(plan['written_immediately'])} queued={len(plan['queued_terminals'])}"
            )
        elif op == "debit":
            card_id = spec["card"]
            image = self._card_image(card_id)
            field_name = spec.get("field", "restaurant_account")
            image = apply_transaction(CARD_V1, image, field_name, -int(spec["cents"]))
            image = sign_card(self.system_key, image)
            self.cards[card_id] = image
            balance = decode_field(CARD_V1, image, field_name)
            self._line(f"ADMIN op=debit card={card_id} field={field_name} cents={spec['cents']} balance={balance}")
        elif op == "unlock_brief":
            terminal_id = self._resolve_terminal(spec)
            self.coordinator.terminal_unlock_brief(Role.OPERATOR, terminal_id)
            self._line(f"ADMIN op=unlock_brief terminal={terminal_id}")
        elif op == "unlock_until":
            terminal_id = self._resolve_terminal(spec)
            until = self.scenario.start + int(spec["until"])
            self.coordinator.terminal_unlock_until(Role.OPERATOR, terminal_id, until)
            self._line(f"ADMIN op=unlock_until terminal={terminal_id} until={until}")
        else:
            raise ScenarioParseError(f"unknown admin op {op!r}")

    def _do_poll(self, entry: dict) -> None:
        target = entry["poll"]
        before_events = len(self.coordinator.events)
        before_alarms = len(self.coordinator.alarms.alarms)
        if target == "all":
            counts = self.coordinator.poll_all()
            total = sum(c for c in counts.values() if c > 0)
            timeouts = sorted(t for t, c in counts.items() if c < 0)
            suffix = f" timeouts={timeouts}" if timeouts else ""
            self._line(f"POLL terminal=all ingested={total}{suffix}")
        else:
            terminal_id = self._resolve_terminal(target if isinstance(target, dict) else {"terminal": target})
            try:
                count = self.coordinator.poll_terminal(terminal_id)
                self._line(f"POLL terminal={terminal_id} ingested={count}")
            except Timeout:
                self._line(f"POLL terminal={terminal_id} timeout=1")
        self._emit_ingested(before_events, before_alarms)

    # -- run loop ------------------------------------------------------------

    def run(self) -> str:
        s = self.scenario
        self.transcript.append(f"# scenario name={s.name} seed={s.seed} start={s.start}")
        for entry in s.script:
            if "at" in entry:
                self.clock.set_to(s.start + int(entry["at"]))
            if "present" in entry:
                self._do_present(entry)
            elif "door" in entry:
                self._do_door(entry)
            elif "admin" in entry:
                self._do_admin(entry)
            elif "poll" in entry:
                self._do_poll(entry)
            elif "advance" in entry:
                self.clock.advance(int(entry["advance"]))
                self._line(f"ADVANCE dt={int(entry['advance'])}")
            elif "at" in entry:
                pass  # bare time marker
            else:
                raise ScenarioParseError(f"unknown action {entry!r}")
        self.transcript.append(
            f"# end ts={self.clock.now()} events_ingested={len(self.coordinator.events)}"
        )
        return "\n".join(self.transcript) + "\n"


def run_scenario(
    source: str | Path | dict,
    store_path: str | Path | None = None,
    passphrase: str | None = None,
) -> str:
    """Execute a scenario and return its transcript.

    ``passphrase`` seals the store when given, overriding any passphrase the
    scenario itself declares.
    """
    world = World(load_scenario(source), store_path=store_path, passphrase=passphrase)
    return world.run()
