"""Framed multi-drop bus: codec, master transaction loop, discovery,
reader-field inventory, and loss/corruption fault injection."""

from campus.bus.crc import crc16_ccitt
from campus.bus.frame import (
    BROADCAST_ADDR,
    MASTER_ADDR,
    MAX_PAYLOAD,
    Frame,
    decode_frame,
    encode_frame,
)
from campus.bus import commands
from campus.bus.bus import BusConfig, SimBus, inventory

__all__ = [
    "BROADCAST_ADDR",
    "BusConfig",
    "MASTER_ADDR",
    "MAX_PAYLOAD",
    "Frame",
    "SimBus",
    "commands",
    "crc16_ccitt",
    "decode_frame",
    "encode_frame",
    "inventory",
]
