"""Transponder memory images.

A tag holds 64 blocks of 4 bytes (256 bytes total) plus one write-protect
bit per block. Byte addressing runs 0..255; block b covers bytes 4b..4b+3.
The top of memory is reserved: bytes 244..247 are padding, bytes 248..255
hold the registration signature.

Card image file format ("TIMG", used for fixtures and mobile reader
sessions): magic ``TIMG`` + 8-byte UID big-endian + 256 data bytes +
8 lock-bit bytes (byte i bit j protects block i*8+j). Bit-exact.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from campus.errors import BlockLocked, ImageFileError

BLOCK_COUNT = 64
BLOCK_SIZE = 4
IMAGE_SIZE = BLOCK_COUNT * BLOCK_SIZE  # 256

# Field data may use bytes 0..243 only.
DATA_LIMIT = 244
SIG_OFFSET = 248
SIG_SIZE = 8

UID_PREFIX = 0xE0  # ISO 15693 allocation class, fixed MSB

TIMG_MAGIC = b"TIMG"
TIMG_SIZE = 4 + 8 + IMAGE_SIZE + 8


@dataclass(frozen=True)
class TagUid:
    """64-bit factory serial number, most significant byte 0xE0."""

    value: int

    def __post_init__(self):
        if not 0 <= self.value < 1 << 64:
            raise ValueError(f"uid out of range: {self.value:#x}")
        if (self.value >> 56) != UID_PREFIX:
            raise ValueError(f"uid must start with 0x{UID_PREFIX:02X}: {self.value:#018x}")

    @property
    def hex(self) -> str:
        return f"{self.value:016X}"

    @classmethod
    def from_hex(cls, text: str) -> "TagUid":
        return cls(int(text, 16))

    @classmethod
    def generate(cls, rng: random.Random) -> "TagUid":
        return cls(UID_PREFIX << 56 | rng.getrandbits(56))

    def pack(self) -> bytes:
        return self.value.to_bytes(8, "big")

    @classmethod
    def unpack(cls, raw: bytes) -> "TagUid":
        return cls(int.from_bytes(raw, "big"))

    def __str__(self) -> str:
        return self.hex


@dataclass(frozen=True)
class TagImage:
    """Immutable snapshot of one tag's memory. Writes return new images."""

    uid: TagUid
    data: bytes
    lock_mask: int = 0  # bit b set = block b write-protected

    def __post_init__(self):
        if len(self.data) != IMAGE_SIZE:
            raise ValueError(f"image must be {IMAGE_SIZE} bytes, got {len(self.data)}")
        if not 0 <= self.lock_mask < 1 << BLOCK_COUNT:
            raise ValueError("lock mask out of range")

    @classmethod
    def blank(cls, uid: TagUid) -> "TagImage":
        return cls(uid=uid, data=bytes(IMAGE_SIZE))

    def block_locked(self, block: int) -> bool:
        return bool(self.lock_mask >> block & 1)

    def read(self, offset: int, length: int) -> bytes:
        if not (0 <= offset and offset + length <= IMAGE_SIZE):
            raise ValueError(f"read out of range: {offset}+{length}")
        return self.data[offset : offset + length]

    def with_bytes(self, offset: int, payload: bytes) -> "TagImage":
        """Return a copy with `payload` written at `offset`.

        Rejected with BlockLocked if any touched block is write-protected;
        no partial write happens.
        """
        end = offset + len(payload)
        if not (0 <= offset and end <= IMAGE_SIZE):
            raise ValueError(f"write out of range: {offset}+{len(payload)}")
        for block in range(offset // BLOCK_SIZE, (end + BLOCK_SIZE - 1) // BLOCK_SIZE):
            if self.block_locked(block):
                raise BlockLocked(block)
        data = self.data[:offset] + payload + self.data[end:]
        return TagImage(uid=self.uid, data=data, lock_mask=self.lock_mask)

    def with_lock(self, block: int, locked: bool = True) -> "TagImage":
        if not 0 <= block < BLOCK_COUNT:
            raise ValueError(f"no block {block}")
        mask = self.lock_mask | 1 << block if locked else self.lock_mask & ~(1 << block)
        return TagImage(uid=self.uid, data=self.data, lock_mask=mask)


def dump_timg(image: TagImage) -> bytes:
    return (
        TIMG_MAGIC
        + image.uid.pack()
        + image.data
        + image.lock_mask.to_bytes(8, "little")
    )


def load_timg(raw: bytes) -> TagImage:
    if len(raw) != TIMG_SIZE:
        raise ImageFileError(f"TIMG file must be {TIMG_SIZE} bytes, got {len(raw)}")
    if raw[:4] != TIMG_MAGIC:
        raise ImageFileError("bad magic")
    uid = TagUid.unpack(raw[4:12])
    data = raw[12 : 12 + IMAGE_SIZE]
    lock_mask = int.from_bytes(raw[12 + IMAGE_SIZE :], "little")
    return TagImage(uid=uid, data=data, lock_mask=lock_mask)
