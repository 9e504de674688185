"""Gate terminal: local authorization, door model, event queue, commands."""

from campus.terminal.events import (
    EVENT_WIRE_SIZE,
    DenyReason,
    EventKind,
    EventRecord,
    pack_events,
    unpack_events,
)
from campus.terminal.door import DoorPosition, DoorState
from campus.terminal.terminal import (
    AccessDecision,
    CommRate,
    GateTerminal,
    TerminalConfig,
    TerminalMode,
    Verdict,
)

__all__ = [
    "AccessDecision",
    "CommRate",
    "DenyReason",
    "DoorPosition",
    "DoorState",
    "EventKind",
    "EventRecord",
    "EVENT_WIRE_SIZE",
    "GateTerminal",
    "TerminalConfig",
    "TerminalMode",
    "Verdict",
    "pack_events",
    "unpack_events",
]
