"""Registration signatures.

Bytes 248..255 of an image hold an 8-byte truncated HMAC-SHA256 over
uid (8 bytes big-endian) followed by data bytes 0..243, keyed with the
system key. A copied payload under a different UID, or any byte tamper,
fails verification.
"""

import hmac
import hashlib

from campus.tag.image import DATA_LIMIT, SIG_OFFSET, SIG_SIZE, TagImage


def compute_mac(key: bytes, image: TagImage) -> bytes:
    material = image.uid.pack() + image.data[:DATA_LIMIT]
    return hmac.new(key, material, hashlib.sha256).digest()[:SIG_SIZE]


def sign_card(key: bytes, image: TagImage) -> TagImage:
    return image.with_bytes(SIG_OFFSET, compute_mac(key, image))


def verify_card(key: bytes, image: TagImage) -> bool:
    stored = image.read(SIG_OFFSET, SIG_SIZE)
    return hmac.compare_digest(stored, compute_mac(key, image))
