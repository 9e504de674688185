"""Layout templates: named fields mapped onto byte ranges of a tag image.

Layouts are user-definable; CARD_V1 below is the default campus card. The
layout id itself lives in the card's first two bytes so a terminal can pick
the right template before decoding anything else.

Layout definition file: first line ``layout <id>``, then one field per
line ``name offset length encoding``; ``#`` starts a comment.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass
from enum import IntEnum

from campus.errors import (
    DuplicateName,
    FieldOutOfRange,
    LayoutFileError,
    OverlappingFields,
    UnknownField,
)
from campus.tag.codecs import Encoding, decode_value, encode_value, valid_length
from campus.tag.image import DATA_LIMIT, TagImage


@dataclass(frozen=True)
class FieldSpec:
    name: str
    offset: int
    length: int
    encoding: Encoding


@dataclass(frozen=True)
class Layout:
    layout_id: int
    fields: tuple[FieldSpec, ...]

    def field(self, name: str) -> FieldSpec:
        for spec in self.fields:
            if spec.name == name:
                return spec
        raise UnknownField(name)

    def field_id(self, name: str) -> int:
        """Wire id of a field: its position in the ordered field list."""
        for i, spec in enumerate(self.fields):
            if spec.name == name:
                return i
        raise UnknownField(name)

    def field_by_id(self, field_id: int) -> FieldSpec:
        if not 0 <= field_id < len(self.fields):
            raise UnknownField(f"#{field_id}")
        return self.fields[field_id]


def define_layout(spec: list[FieldSpec], layout_id: int) -> Layout:
    """Validate field specs into a Layout.

    Fields must sit entirely below the reserved region (byte 244), carry
    unique names, use widths legal for their encoding, and be pairwise
    disjoint.
    """
    if not 0 < layout_id < 1 << 16:
        raise ValueError(f"layout id must be a positive u16, got {layout_id}")
    seen: dict[str, FieldSpec] = {}
    for field in spec:
        if field.name in seen:
            raise DuplicateName(field.name)
        if field.offset < 0 or field.offset + field.length > DATA_LIMIT:
            raise FieldOutOfRange(field.name)
        if not valid_length(field.encoding, field.length):
            raise FieldOutOfRange(field.name)
        seen[field.name] = field
    ordered = sorted(spec, key=lambda f: f.offset)
    for a, b in zip(ordered, ordered[1:]):
        if a.offset + a.length > b.offset:
            raise OverlappingFields(a.name, b.name)
    return Layout(layout_id=layout_id, fields=tuple(spec))


def encode_field(layout: Layout, image: TagImage, name: str, value) -> TagImage:
    """Write one field. Only that byte range changes."""
    spec = layout.field(name)
    raw = encode_value(spec.encoding, spec.length, value)
    return image.with_bytes(spec.offset, raw)


def decode_field(layout: Layout, image: TagImage, name: str):
    spec = layout.field(name)
    return decode_value(spec.encoding, spec.length, image.read(spec.offset, spec.length))


# -- default campus card (layout id 1) ---------------------------------------

class HolderType(IntEnum):
    PERSONNEL = 0
    STUDENT = 1
    VISITOR = 2


FLAG_LOCKED = 0  # bit position inside the flags field

CARD_V1 = define_layout(
    [
        FieldSpec("layout_id", 0, 2, Encoding.UINT_LE),
        FieldSpec("personal_id", 2, 4, Encoding.UINT_LE),
        FieldSpec("expiry_date", 6, 2, Encoding.DATE_D2000),
        FieldSpec("issue_number", 8, 1, Encoding.UINT_LE),
        FieldSpec("holder_type", 9, 1, Encoding.UINT_LE),
        FieldSpec("flags", 10, 1, Encoding.BITSET),
        FieldSpec("meal_plan", 11, 1, Encoding.UINT_LE),
        FieldSpec("restaurant_account", 12, 4, Encoding.MONEY_CENTS),
        FieldSpec("service_account_1", 16, 4, Encoding.MONEY_CENTS),
        # packed: last-payment DATE-D2000 in the low 16 bits, status above
        FieldSpec("tax_payment_record", 20, 4, Encoding.UINT_LE),
        FieldSpec("medical_record_1", 24, 8, Encoding.OPAQUE),
        # stored verbatim, not enforced by the simulated reader
        FieldSpec("data_access_block", 32, 2, Encoding.BITSET),
        FieldSpec("gate_list", 34, 8, Encoding.BITSET),
        # per weekday Mon=0: (start, end) quarter-hours; access iff start <= q < end
        FieldSpec("schedule", 42, 14, Encoding.QUARTER_HOUR_PAIR),
    ],
    layout_id=1,
)


# -- schedule helpers --------------------------------------------------------

Schedule = tuple[tuple[int, int], ...]

ALL_DAY: Schedule = ((0, 96),) * 7
NO_ACCESS: Schedule = ((0, 0),) * 7


def quarter_of(hhmm: str) -> int:
    """'08:15' -> quarter-hour index 33. '24:00' maps to 96 (end of day)."""
    hours, minutes = hhmm.split(":")
    q, rem = divmod(int(hours) * 60 + int(minutes), 15)
    if rem:
        raise ValueError(f"{hhmm!r} is not on a quarter-hour boundary")
    if not 0 <= q <= 96:
        raise ValueError(f"{hhmm!r} outside 00:00..24:00")
    return q


def schedule_allows(schedule: Schedule, local_ts: int) -> bool:
    """True if the weekday window at `local_ts` (epoch seconds, UTC) is open."""
    day = datetime.date(1970, 1, 1) + datetime.timedelta(days=local_ts // 86400)
    start, end = schedule[day.weekday()]
    quarter = local_ts % 86400 // 900
    return start <= quarter < end


# -- layout files ------------------------------------------------------------

def parse_layout_file(text: str) -> Layout:
    layout_id = None
    fields = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if layout_id is None:
            if len(parts) != 2 or parts[0] != "layout":
                raise LayoutFileError(f"line {lineno}: expected 'layout <id>' first")
            try:
                layout_id = int(parts[1])
            except ValueError:
                raise LayoutFileError(f"line {lineno}: bad layout id {parts[1]!r}") from None
            continue
        if len(parts) != 4:
            raise LayoutFileError(f"line {lineno}: expected 'name offset length encoding'")
        name, offset, length, encoding = parts
        try:
            fields.append(FieldSpec(name, int(offset), int(length), Encoding(encoding)))
        except ValueError as exc:
            raise LayoutFileError(f"line {lineno}: {exc}") from None
    if layout_id is None:
        raise LayoutFileError("missing 'layout <id>' line")
    return define_layout(fields, layout_id)


def format_layout_file(layout: Layout) -> str:
    lines = [f"layout {layout.layout_id}"]
    lines += [
        f"{f.name} {f.offset} {f.length} {f.encoding.value}" for f in layout.fields
    ]
    return "\n".join(lines) + "\n"
