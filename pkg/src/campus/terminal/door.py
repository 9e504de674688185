"""Door strike and sensor state machine.

States: LOCKED, RELEASED(until), OPEN(since), OPEN_ALARMED(since).
A grant releases the strike; an unopened release expires back to LOCKED
at its deadline. An open door alarms exactly once per episode when it has
stayed open for the configured timeout. Opening a LOCKED door is forced
entry. Closing always re-engages the strike.

Timer deadlines are processed with their exact timestamps even when the
clock advances past them in one jump, so sparse ticking cannot skew event
times.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from campus.terminal.events import EventKind


class DoorPosition(str, Enum):
    LOCKED = "LOCKED"
    RELEASED = "RELEASED"
    OPEN = "OPEN"
    OPEN_ALARMED = "OPEN_ALARMED"


@dataclass
class DoorState:
    position: DoorPosition = DoorPosition.LOCKED
    deadline: int = 0  # RELEASED: relock time; OPEN*: opened-at time
    sensor_open: bool = False

    def advance(self, now: int, open_timeout_s: int) -> list[tuple[EventKind, int]]:
        """Process timer deadlines up to `now`; returns (kind, ts) pairs."""
        events: list[tuple[EventKind, int]] = []
        if self.position is DoorPosition.RELEASED and now >= self.deadline:
            self.position = DoorPosition.LOCKED
        elif self.position is DoorPosition.OPEN:
            alarm_at = self.deadline + open_timeout_s
            if now >= alarm_at:
                self.position = DoorPosition.OPEN_ALARMED
                events.append((EventKind.DOOR_LEFT_OPEN, alarm_at))
        return events

    def release(self, now: int, duration_s: int) -> None:
        """Strike released for `duration_s`; no-op while the door is open."""
        if self.position is DoorPosition.LOCKED:
            self.position = DoorPosition.RELEASED
            self.deadline = now + duration_s
        elif self.position is DoorPosition.RELEASED:
            self.deadline = max(self.deadline, now + duration_s)

    def set_sensor(self, now: int, is_open: bool) -> list[tuple[EventKind, int]]:
        """Apply a sensor reading; emits edge events. Call advance() first."""
        events: list[tuple[EventKind, int]] = []
        if is_open and not self.sensor_open:
            forced = self.position is DoorPosition.LOCKED
            self.position = DoorPosition.OPEN
            self.deadline = now
            events.append((EventKind.DOOR_OPENED, now))
            if forced:
                events.append((EventKind.DOOR_FORCED, now))
        elif not is_open and self.sensor_open:
            self.position = DoorPosition.LOCKED
            events.append((EventKind.DOOR_CLOSED, now))
        self.sensor_open = is_open
        return events
