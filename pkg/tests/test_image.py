"""Tag memory geometry, block locking, and the image file format."""

import random

import pytest
from hypothesis import given, strategies as st

from campus.errors import BlockLocked, ImageFileError
from campus.tag.image import TagImage, TagUid, dump_timg, load_timg


def test_blank_image_geometry():
    image = TagImage.blank(TagUid(0xE000000000000001))
    assert len(image.data) == 256
    assert image.data == bytes(256)
    assert all(not image.block_locked(b) for b in range(64))


def test_uid_msb_convention():
    TagUid(0xE0FFFFFFFFFFFFFF)
    with pytest.raises(ValueError):
        TagUid(0x1122334455667788)


def test_uid_hex_and_pack():
    uid = TagUid(0xE011223344556677)
    assert uid.hex == "E011223344556677"
    assert uid.pack() == bytes.fromhex("E011223344556677")
    assert TagUid.unpack(uid.pack()) == uid
    assert TagUid.from_hex("e011223344556677") == uid


@given(st.integers(min_value=0, max_value=2**20))
def test_uid_generate_always_well_formed(seed):
    uid = TagUid.generate(random.Random(seed))
    assert uid.value >> 56 == 0xE0


def test_write_changes_only_target_range():
    image = TagImage.blank(TagUid(0xE000000000000001))
    updated = image.with_bytes(10, b"\xaa\xbb\xcc")
    for i in range(256):
        if 10 <= i < 13:
            assert updated.data[i] == b"\xaa\xbb\xcc"[i - 10]
        else:
            assert updated.data[i] == 0
    # Original untouched (images are value objects).
    assert image.data == bytes(256)


def test_read_write_round_trip():
    image = TagImage.blank(TagUid(0xE000000000000001)).with_bytes(100, bytes(range(20)))
    assert image.read(100, 20) == bytes(range(20))


def test_locked_block_rejects_writes():
    image = TagImage.blank(TagUid(0xE000000000000001)).with_lock(2)
    # Block 2 covers bytes 8..11.
    with pytest.raises(BlockLocked):
        image.with_bytes(8, b"\x01")
    with pytest.raises(BlockLocked):
        image.with_bytes(7, b"\x01\x02")  # straddles into block 2
    image.with_bytes(4, b"\x01\x02\x03\x04")  # neighboring block still writable


def test_out_of_range_access():
    image = TagImage.blank(TagUid(0xE000000000000001))
    with pytest.raises(ValueError):
        image.with_bytes(255, b"\x01\x02")
    with pytest.raises(ValueError):
        image.read(250, 10)


# -- .timg container ----------------------------------------------------------


def test_timg_round_trip_and_exact_layout():
    uid = TagUid(0xE0AABBCCDDEEFF00)
    image = TagImage.blank(uid).with_bytes(0, b"\x2a").with_lock(63)
    raw = dump_timg(image)
    assert raw[:4] == b"TIMG"
    assert raw[4:12] == uid.pack()
    assert raw[12] == 0x2A
    assert len(raw) == 4 + 8 + 256 + 8
    # Lock bit for block 63 is the top bit of the last byte.
    assert raw[-1] == 0x80

    back = load_timg(raw)
    assert back.uid == uid
    assert back.data == image.data
    assert back.block_locked(63) and not back.block_locked(0)


def test_timg_rejects_damage():
    raw = dump_timg(TagImage.blank(TagUid(0xE000000000000001)))
    with pytest.raises(ImageFileError):
        load_timg(b"XIMG" + raw[4:])
    with pytest.raises(ImageFileError):
        load_timg(raw[:-1])
