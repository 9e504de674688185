"""Bus frame codec.

Layout: ``[addr:1][code:1][len:2 LE][payload:len][crc:2 LE]`` with the CRC
(CRC-16/CCITT-FALSE) computed over addr..payload. Address 0x00 is the
master, 0x01..0x1E are terminals, 0xFF is broadcast.

A receiver that sees a bad CRC cannot trust even the address byte, so the
policy is silence: decode raises BadCrc, the addressed terminal never
answers, and the master retries. Frames are delivered as exact byte
strings; anything shorter than an empty frame is Truncated, and any other
mismatch (length field disagreeing with the delivery included) is an
integrity failure reported as BadCrc.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from campus.bus.crc import crc16_ccitt
from campus.errors import BadCrc, PayloadTooLong, Truncated

MASTER_ADDR = 0x00
BROADCAST_ADDR = 0xFF
MAX_PAYLOAD = 1024

_HEADER = struct.Struct("<BBH")
HEADER_SIZE = _HEADER.size  # 4
CRC_SIZE = 2
MIN_FRAME = HEADER_SIZE + CRC_SIZE


@dataclass(frozen=True)
class Frame:
    addr: int
    code: int
    payload: bytes = b""


def encode_frame(addr: int, code: int, payload: bytes = b"") -> bytes:
    if len(payload) > MAX_PAYLOAD:
        raise PayloadTooLong(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")
    if not 0 <= addr <= 0xFF or not 0 <= code <= 0xFF:
        raise ValueError("addr and code must be single bytes")
    body = _HEADER.pack(addr, code, len(payload)) + payload
    return body + struct.pack("<H", crc16_ccitt(body))


def decode_frame(raw: bytes) -> Frame:
    """Decode exactly one delivered frame; raises Truncated or BadCrc."""
    if len(raw) < MIN_FRAME:
        raise Truncated(f"{len(raw)} bytes is shorter than an empty frame")
    addr, code, length = _HEADER.unpack_from(raw)
    if HEADER_SIZE + length + CRC_SIZE != len(raw):
        raise BadCrc(f"length field {length} disagrees with {len(raw)} delivered bytes")
    (crc,) = struct.unpack_from("<H", raw, len(raw) - CRC_SIZE)
    if crc != crc16_ccitt(raw[:-CRC_SIZE]):
        raise BadCrc("crc mismatch")
    return Frame(addr=addr, code=code, payload=raw[HEADER_SIZE : HEADER_SIZE + length])
