"""Central application: registry, event store, reports, alarms, users, persistence."""

from campus.coordinator.alarms import Alarm, AlarmEngine, AlarmRule
from campus.coordinator.coordinator import Coordinator, RegistryEntry, StoredEvent, TerminalLink
from campus.coordinator.reports import ReportQuery, render_report
from campus.coordinator.store import open_container, seal_container
from campus.coordinator.users import Role, UserAccount, UserDirectory

__all__ = [
    "Alarm",
    "AlarmEngine",
    "AlarmRule",
    "Coordinator",
    "RegistryEntry",
    "StoredEvent",
    "TerminalLink",
    "ReportQuery",
    "render_report",
    "seal_container",
    "open_container",
    "Role",
    "UserAccount",
    "UserDirectory",
]
