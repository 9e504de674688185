"""Operator accounts and role gating.

Roles order VIEWER < OPERATOR < ADMIN; an operation gated at role R
accepts R or anything above it. The directory always contains at least
one ADMIN — the bootstrap account — and refuses the removal or demotion
that would break that.

Passwords are stored as salted PBKDF2-HMAC-SHA256 digests only.
"""

from __future__ import annotations

import hashlib
import hmac
import random
from dataclasses import dataclass
from enum import IntEnum

from campus.errors import AuthDenied, DuplicateUser, LastAdmin, UnknownUser

PBKDF2_ITERATIONS = 10_000
SALT_SIZE = 16


class Role(IntEnum):
    VIEWER = 0
    OPERATOR = 1
    ADMIN = 2

    @classmethod
    def parse(cls, name: str) -> "Role":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown role {name!r}") from None


def require_role(actual: Role, minimum: Role) -> None:
    if actual < minimum:
        raise AuthDenied(f"requires {minimum.name}, acting role is {actual.name}")


def _digest(password: str, salt: bytes) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, PBKDF2_ITERATIONS)


@dataclass
class UserAccount:
    username: str
    role: Role
    salt: bytes
    password_hash: bytes
    created_at: int

    def check_password(self, password: str) -> bool:
        return hmac.compare_digest(_digest(password, self.salt), self.password_hash)


class UserDirectory:
    def __init__(self):
        self._users: dict[str, UserAccount] = {}

    # -- queries -------------------------------------------------------------

    def get(self, username: str) -> UserAccount:
        try:
            return self._users[username]
        except KeyError:
            raise UnknownUser(username) from None

    def listing(self) -> list[UserAccount]:
        return [self._users[name] for name in sorted(self._users)]

    def authenticate(self, username: str, password: str) -> UserAccount | None:
        account = self._users.get(username)
        if account is not None and account.check_password(password):
            return account
        return None

    def _admin_count(self) -> int:
        return sum(1 for u in self._users.values() if u.role is Role.ADMIN)

    # -- mutations -----------------------------------------------------------

    def bootstrap(self, username: str, password: str, now: int, rng: random.Random) -> UserAccount:
        """Create the first account; it must be the system's initial ADMIN."""
        if self._users:
            raise DuplicateUser("directory already bootstrapped")
        return self._insert(username, password, Role.ADMIN, now, rng)

    def add(self, acting: Role, username: str, password: str, role: Role, now: int, rng: random.Random) -> UserAccount:
        require_role(acting, Role.ADMIN)
        if username in self._users:
            raise DuplicateUser(username)
        return self._insert(username, password, role, now, rng)

    def remove(self, acting: Role, username: str) -> None:
        require_role(acting, Role.ADMIN)
        account = self.get(username)
        if account.role is Role.ADMIN and self._admin_count() == 1:
            raise LastAdmin(username)
        del self._users[username]

    def set_role(self, acting: Role, username: str, role: Role) -> None:
        require_role(acting, Role.ADMIN)
        account = self.get(username)
        if account.role is Role.ADMIN and role is not Role.ADMIN and self._admin_count() == 1:
            raise LastAdmin(username)
        account.role = role

    def set_password(self, acting: Role, username: str, password: str, rng: random.Random) -> None:
        require_role(acting, Role.ADMIN)
        account = self.get(username)
        account.salt = rng.randbytes(SALT_SIZE)
        account.password_hash = _digest(password, account.salt)

    def _insert(self, username: str, password: str, role: Role, now: int, rng: random.Random) -> UserAccount:
        if not username or any(c.isspace() for c in username):
            raise ValueError(f"bad username {username!r}")
        salt = rng.randbytes(SALT_SIZE)
        account = UserAccount(
            username=username,
            role=role,
            salt=salt,
            password_hash=_digest(password, salt),
            created_at=now,
        )
        self._users[username] = account
        return account

    # -- serialization -------------------------------------------------------

    def to_state(self) -> dict:
        return {
            u.username: {
                "role": u.role.name,
                "salt": u.salt.hex(),
                "hash": u.password_hash.hex(),
                "created_at": u.created_at,
            }
            for u in self._users.values()
        }

    @classmethod
    def from_state(cls, state: dict) -> "UserDirectory":
        directory = cls()
        for username, rec in state.items():
            directory._users[username] = UserAccount(
                username=username,
                role=Role[rec["role"]],
                salt=bytes.fromhex(rec["salt"]),
                password_hash=bytes.fromhex(rec["hash"]),
                created_at=rec["created_at"],
            )
        return directory
