"""Alarm rules evaluated over the ingested event stream.

A rule names the event kinds (and optionally the gates) it watches; each
(rule, event) pair raises at most one alarm no matter how often the
event is re-seen, which makes re-drained duplicates harmless here too.
Two rules ship by default: forced door and door left open.
"""

from __future__ import annotations

from dataclasses import dataclass

from campus.errors import UnknownAlarm
from campus.terminal.events import EventKind, EventRecord


@dataclass(frozen=True)
class AlarmRule:
    rule_id: int
    kinds: frozenset[int]
    gates: frozenset[int] | None = None  # None = all gates
    enabled: bool = True

    def matches(self, kind: int, gate: int) -> bool:
        if not self.enabled or kind not in self.kinds:
            return False
        return self.gates is None or gate in self.gates


@dataclass
class Alarm:
    alarm_id: int
    rule_id: int
    terminal: int
    gate: int
    seq: int
    ts: int
    kind: int
    raised_at: int
    acknowledged_by: str | None = None


def default_rules() -> dict[int, AlarmRule]:
    return {
        1: AlarmRule(rule_id=1, kinds=frozenset({int(EventKind.DOOR_FORCED)})),
        2: AlarmRule(rule_id=2, kinds=frozenset({int(EventKind.DOOR_LEFT_OPEN)})),
    }


class AlarmEngine:
    def __init__(self, rules: dict[int, AlarmRule] | None = None):
        self.rules = dict(rules) if rules is not None else default_rules()
        self.alarms: list[Alarm] = []
        self._next_id = 1
        self._seen: set[tuple[int, int, int]] = set()  # (rule, terminal, seq)

    def evaluate(self, terminal: int, gate: int, event: EventRecord, now: int) -> list[Alarm]:
        raised = []
        for rule in self.rules.values():
            if not rule.matches(event.kind, gate):
                continue
            key = (rule.rule_id, terminal, event.seq)
            if key in self._seen:
                continue
            self._seen.add(key)
            alarm = Alarm(
                alarm_id=self._next_id,
                rule_id=rule.rule_id,
                terminal=terminal,
                gate=gate,
                seq=event.seq,
                ts=event.ts,
                kind=int(event.kind),
                raised_at=now,
            )
            self._next_id += 1
            self.alarms.append(alarm)
            raised.append(alarm)
        return raised

    def acknowledge(self, alarm_id: int, username: str) -> Alarm:
        for alarm in self.alarms:
            if alarm.alarm_id == alarm_id:
                alarm.acknowledged_by = username
                return alarm
        raise UnknownAlarm(alarm_id)

    def unacknowledged(self, terminal: int | None = None) -> list[Alarm]:
        return [
            a
            for a in self.alarms
            if a.acknowledged_by is None and (terminal is None or a.terminal == terminal)
        ]

    # -- serialization -------------------------------------------------------

    def to_state(self) -> dict:
        return {
            "next_id": self._next_id,
            "seen": sorted(list(k) for k in self._seen),
            "alarms": [
                {
                    "alarm_id": a.alarm_id,
                    "rule_id": a.rule_id,
                    "terminal": a.terminal,
                    "gate": a.gate,
                    "seq": a.seq,
                    "ts": a.ts,
                    "kind": a.kind,
                    "raised_at": a.raised_at,
                    "ack_by": a.acknowledged_by,
                }
                for a in self.alarms
            ],
            "rules": [
                {
                    "rule_id": r.rule_id,
                    "kinds": sorted(r.kinds),
                    "gates": sorted(r.gates) if r.gates is not None else None,
                    "enabled": r.enabled,
                }
                for r in self.rules.values()
            ],
        }

    @classmethod
    def from_state(cls, state: dict) -> "AlarmEngine":
        rules = {
            r["rule_id"]: AlarmRule(
                rule_id=r["rule_id"],
                kinds=frozenset(r["kinds"]),
                gates=frozenset(r["gates"]) if r["gates"] is not None else None,
                enabled=r["enabled"],
            )
            for r in state["rules"]
        }
        engine = cls(rules)
        engine._next_id = state["next_id"]
        engine._seen = {tuple(k) for k in state["seen"]}
        for rec in state["alarms"]:
            engine.alarms.append(
                Alarm(
                    alarm_id=rec["alarm_id"],
                    rule_id=rec["rule_id"],
                    terminal=rec["terminal"],
                    gate=rec["gate"],
                    seq=rec["seq"],
                    ts=rec["ts"],
                    kind=rec["kind"],
                    raised_at=rec["raised_at"],
                    acknowledged_by=rec["ack_by"],
                )
            )
        return engine
