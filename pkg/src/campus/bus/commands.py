"""Command and response codes, with payload pack/parse helpers.

Commands marked with a dagger in the table below carry the terminal's
8-byte password as a payload prefix.

    PING=0x01  GET_STATUS=0x02  DRAIN_EVENTS=0x03 (u8 max)
    ACK_EVENTS=0x04 (u32 seq)  SET_CONFIG+=0x05  GET_CONFIG=0x06
    UNLOCK_BRIEF+=0x07  UNLOCK_UNTIL+=0x08 (u64 ts)  SET_MODE+=0x09
    PUSH_REVOCATION+=0x0A (u8 count + uids)
    QUEUE_CARD_WRITE+=0x0B (uid + field id u8 + value bytes)
    SET_TIME+=0x0C (u64)  DISCOVER=0x0D (broadcast)

Responses: ACK=0x06, DATA=0x02 (payload follows), ERR=0x15 with a one-byte
error code payload.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

PASSWORD_SIZE = 8

CMD_PING = 0x01
CMD_GET_STATUS = 0x02
CMD_DRAIN_EVENTS = 0x03
CMD_ACK_EVENTS = 0x04
CMD_SET_CONFIG = 0x05
CMD_GET_CONFIG = 0x06
CMD_UNLOCK_BRIEF = 0x07
CMD_UNLOCK_UNTIL = 0x08
CMD_SET_MODE = 0x09
CMD_PUSH_REVOCATION = 0x0A
CMD_QUEUE_CARD_WRITE = 0x0B
CMD_SET_TIME = 0x0C
CMD_DISCOVER = 0x0D

RESP_ACK = 0x06
RESP_DATA = 0x02
RESP_ERR = 0x15

ERR_UNKNOWN_CMD = 0x01
ERR_AUTH = 0x02
ERR_BAD_ARG = 0x03

# Commands whose payload starts with the terminal password.
PASSWORD_COMMANDS = frozenset(
    {
        CMD_SET_CONFIG,
        CMD_UNLOCK_BRIEF,
        CMD_UNLOCK_UNTIL,
        CMD_SET_MODE,
        CMD_PUSH_REVOCATION,
        CMD_QUEUE_CARD_WRITE,
        CMD_SET_TIME,
    }
)


class ModeCode(IntEnum):
    NORMAL = 0
    UNLOCKED_UNTIL = 1
    CATEGORY = 2


class DoorCode(IntEnum):
    LOCKED = 0
    RELEASED = 1
    OPEN = 2
    OPEN_ALARMED = 3


# SET_CONFIG body (after password) / GET_CONFIG response:
# [address:1][gate_id:1][comm_rate:1][strike_release_s:2 LE][door_open_timeout_s:2 LE]
CONFIG_BODY = struct.Struct("<BBBHH")
# SET_CONFIG additionally carries a new 8-byte password after the body.

# GET_STATUS response:
# [door:1][mode:1][queue_len:2 LE][last_seq:4 LE][local_time:8 LE]
STATUS_BODY = struct.Struct("<BBHIQ")


@dataclass(frozen=True)
class StatusReply:
    door: DoorCode
    mode: ModeCode
    queue_len: int
    last_seq: int
    local_time: int


def pack_status(reply: StatusReply) -> bytes:
    return STATUS_BODY.pack(
        reply.door, reply.mode, reply.queue_len, reply.last_seq, reply.local_time
    )


def parse_status(payload: bytes) -> StatusReply:
    door, mode, queue_len, last_seq, local_time = STATUS_BODY.unpack(payload)
    return StatusReply(DoorCode(door), ModeCode(mode), queue_len, last_seq, local_time)


def with_password(password: bytes, body: bytes = b"") -> bytes:
    if len(password) != PASSWORD_SIZE:
        raise ValueError(f"password must be {PASSWORD_SIZE} bytes")
    return password + body


def pack_drain(max_events: int) -> bytes:
    return struct.pack("<B", max_events)


def pack_ack_events(seq: int) -> bytes:
    return struct.pack("<I", seq)


def pack_unlock_until(ts: int) -> bytes:
    return struct.pack("<Q", ts)


def pack_set_time(ts: int) -> bytes:
    return struct.pack("<Q", ts)


def pack_set_mode(mode: ModeCode, until: int = 0, categories: int = 0) -> bytes:
    """Mode body: [mode:1] then u64 until (UNLOCKED_UNTIL) or u8 category
    bitmask (CATEGORY, bit = holder type code)."""
    if mode is ModeCode.UNLOCKED_UNTIL:
        return struct.pack("<BQ", mode, until)
    if mode is ModeCode.CATEGORY:
        return struct.pack("<BB", mode, categories)
    return struct.pack("<B", mode)


def pack_revocations(uids: list[int]) -> bytes:
    out = bytearray(struct.pack("<B", len(uids)))
    for uid in uids:
        out += uid.to_bytes(8, "big")
    return bytes(out)


def pack_card_write(uid: int, field_id: int, value: bytes) -> bytes:
    return uid.to_bytes(8, "big") + struct.pack("<B", field_id) + value


def err_payload(code: int) -> bytes:
    return bytes([code])
