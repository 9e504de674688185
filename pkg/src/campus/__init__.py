"""Desk-scale simulation of an RFID campus access control system.

Subpackages:
    tag         - transponder memory images, layouts, field codecs, signing
    terminal    - gate terminal state machine: authorization, door, events
    bus         - framed master/terminal bus with loss/corruption simulation
    coordinator - registry, event store, reports, alarms, encrypted persistence
    service     - HTTP API, scenario runner, report figures
"""

__version__ = "0.1.0"
