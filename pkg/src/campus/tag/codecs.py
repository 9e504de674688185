"""Field value codecs.

Every encoding maps a typed value to a fixed byte range and back; for all
representable values decode(encode(v)) == v.

    UINT-LE            unsigned little-endian integer, 1..8 bytes
    DATE-D2000         u16 days since 2000-01-01 (covers to mid-2179)
    MONEY-CENTS        u32 little-endian, non-negative cents
    BITSET             set of bit positions; byte i bit j = position i*8+j
    OPAQUE             raw bytes, exact field length
    QUARTER-HOUR-PAIR  (start, end) quarter-hour u8 pairs, one per 2 bytes
"""

from __future__ import annotations

import datetime
from enum import Enum

from campus.errors import ValueOverflow

D2000_EPOCH = datetime.date(2000, 1, 1)
QUARTERS_PER_DAY = 96


class Encoding(str, Enum):
    UINT_LE = "UINT-LE"
    DATE_D2000 = "DATE-D2000"
    MONEY_CENTS = "MONEY-CENTS"
    BITSET = "BITSET"
    OPAQUE = "OPAQUE"
    QUARTER_HOUR_PAIR = "QUARTER-HOUR-PAIR"


# Encodings with one legal byte width.
FIXED_SIZES = {
    Encoding.DATE_D2000: 2,
    Encoding.MONEY_CENTS: 4,
}


def valid_length(encoding: Encoding, length: int) -> bool:
    if length < 1:
        return False
    fixed = FIXED_SIZES.get(encoding)
    if fixed is not None:
        return length == fixed
    if encoding is Encoding.UINT_LE:
        return length <= 8
    if encoding is Encoding.QUARTER_HOUR_PAIR:
        return length % 2 == 0
    return True


def encode_value(encoding: Encoding, length: int, value) -> bytes:
    """Encode `value` into exactly `length` bytes. Raises ValueOverflow."""
    if encoding is Encoding.UINT_LE:
        return _encode_uint(length, value)
    if encoding is Encoding.DATE_D2000:
        return _encode_uint(2, _days_since_2000(value))
    if encoding is Encoding.MONEY_CENTS:
        if not isinstance(value, int) or value < 0:
            raise ValueOverflow(f"money must be a non-negative cent count: {value!r}")
        return _encode_uint(4, value)
    if encoding is Encoding.BITSET:
        return _encode_bitset(length, value)
    if encoding is Encoding.OPAQUE:
        raw = bytes(value)
        if len(raw) != length:
            raise ValueOverflow(f"opaque value must be exactly {length} bytes, got {len(raw)}")
        return raw
    if encoding is Encoding.QUARTER_HOUR_PAIR:
        return _encode_quarter_pairs(length, value)
    raise ValueError(f"unhandled encoding {encoding}")


def decode_value(encoding: Encoding, length: int, raw: bytes):
    if len(raw) != length:
        raise ValueError(f"expected {length} bytes, got {len(raw)}")
    if encoding is Encoding.UINT_LE:
        return int.from_bytes(raw, "little")
    if encoding is Encoding.DATE_D2000:
        return D2000_EPOCH + datetime.timedelta(days=int.from_bytes(raw, "little"))
    if encoding is Encoding.MONEY_CENTS:
        return int.from_bytes(raw, "little")
    if encoding is Encoding.BITSET:
        value = int.from_bytes(raw, "little")
        return frozenset(i for i in range(length * 8) if value >> i & 1)
    if encoding is Encoding.OPAQUE:
        return raw
    if encoding is Encoding.QUARTER_HOUR_PAIR:
        return tuple((raw[i], raw[i + 1]) for i in range(0, length, 2))
    raise ValueError(f"unhandled encoding {encoding}")


def _encode_uint(length: int, value) -> bytes:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueOverflow(f"expected an integer, got {value!r}")
    if not 0 <= value < 1 << (8 * length):
        raise ValueOverflow(f"{value} does not fit in {length} bytes")
    return value.to_bytes(length, "little")


def _days_since_2000(value) -> int:
    if isinstance(value, datetime.datetime):
        value = value.date()
    if not isinstance(value, datetime.date):
        raise ValueOverflow(f"expected a date, got {value!r}")
    days = (value - D2000_EPOCH).days
    if not 0 <= days < 1 << 16:
        raise ValueOverflow(f"date {value} outside the 2000-01-01 + 65535d range")
    return days


def _encode_bitset(length: int, value) -> bytes:
    bits = 0
    for pos in value:
        if not isinstance(pos, int) or not 0 <= pos < length * 8:
            raise ValueOverflow(f"bit position {pos!r} outside 0..{length * 8 - 1}")
        bits |= 1 << pos
    return bits.to_bytes(length, "little")


def _encode_quarter_pairs(length: int, value) -> bytes:
    pairs = tuple(value)
    if len(pairs) != length // 2:
        raise ValueOverflow(f"expected {length // 2} (start, end) pairs, got {len(pairs)}")
    out = bytearray()
    for pair in pairs:
        start, end = pair
        if not (0 <= start <= end <= QUARTERS_PER_DAY):
            raise ValueOverflow(f"bad quarter-hour window {pair!r}")
        out += bytes((start, end))
    return bytes(out)
