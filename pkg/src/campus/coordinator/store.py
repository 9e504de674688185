"""Encrypted state container.

File layout: magic ``CGDB`` + version u8 + 16-byte salt + 24-byte nonce
+ ciphertext. The passphrase is stretched with scrypt over the salt; the
24-byte nonce is folded into a per-file subkey by keyed hashing, and the
payload is sealed with ChaCha20-Poly1305 under that subkey (the AEAD
nonce can then be constant because the subkey is unique per file). The
header doubles as associated data, so no header byte can be altered
without failing authentication.

Failure split: files whose structure is wrong (bad magic, unknown
version, shorter than the minimum sealed length) raise CorruptContainer;
anything that fails authentication — which a wrong passphrase always
does — raises BadPassphrase. No plaintext is ever returned partially.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import random

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

from campus.errors import BadPassphrase, CorruptContainer

MAGIC = b"CGDB"
VERSION = 1
SALT_SIZE = 16
NONCE_SIZE = 24
HEADER_SIZE = len(MAGIC) + 1 + SALT_SIZE + NONCE_SIZE
TAG_SIZE = 16
MIN_FILE_SIZE = HEADER_SIZE + TAG_SIZE

_SCRYPT_N = 2**14
_SCRYPT_R = 8
_SCRYPT_P = 1


def _master_key(passphrase: str, salt: bytes) -> bytes:
    return hashlib.scrypt(
        passphrase.encode("utf-8"),
        salt=salt,
        n=_SCRYPT_N,
        r=_SCRYPT_R,
        p=_SCRYPT_P,
        maxmem=64 * 1024 * 1024,
        dklen=32,
    )


def _subkey(master: bytes, nonce: bytes) -> bytes:
    return hmac.new(master, nonce, hashlib.sha256).digest()


def seal_container(passphrase: str, payload: bytes, rng: random.Random | None = None) -> bytes:
    """Encrypt ``payload`` under ``passphrase`` into a fresh container.

    ``rng`` exists for reproducible fixtures; live code leaves it None
    and gets OS randomness for salt and nonce.
    """
    if rng is None:
        salt = os.urandom(SALT_SIZE)
        nonce = os.urandom(NONCE_SIZE)
    else:
        salt = rng.randbytes(SALT_SIZE)
        nonce = rng.randbytes(NONCE_SIZE)
    header = MAGIC + bytes([VERSION]) + salt + nonce
    cipher = ChaCha20Poly1305(_subkey(_master_key(passphrase, salt), nonce))
    return header + cipher.encrypt(b"\x00" * 12, payload, header)


def open_container(passphrase: str, blob: bytes) -> bytes:
    """Decrypt a container; returns the full payload or raises."""
    if len(blob) < len(MAGIC) or blob[: len(MAGIC)] != MAGIC:
        raise CorruptContainer("missing container magic")
    if blob[len(MAGIC)] != VERSION:
        raise CorruptContainer(f"unsupported container version {blob[len(MAGIC)]}")
    if len(blob) < MIN_FILE_SIZE:
        raise CorruptContainer(f"{len(blob)} bytes is shorter than a sealed empty container")
    salt = blob[5 : 5 + SALT_SIZE]
    nonce = blob[5 + SALT_SIZE : HEADER_SIZE]
    header = blob[:HEADER_SIZE]
    cipher = ChaCha20Poly1305(_subkey(_master_key(passphrase, salt), nonce))
    try:
        return cipher.decrypt(b"\x00" * 12, blob[HEADER_SIZE:], header)
    except InvalidTag:
        raise BadPassphrase("container failed authentication") from None
