"""Exception types shared across the package.

Terminal command failures travel the bus as ERR response frames, not as
exceptions; everything here is raised on the caller's side of an API.
"""


class CampusError(Exception):
    """Base class for all package errors."""


# -- card memory / layouts ---------------------------------------------------

class OverlappingFields(CampusError):
    def __init__(self, name_a: str, name_b: str):
        super().__init__(f"fields overlap: {name_a!r} and {name_b!r}")
        self.name_a = name_a
        self.name_b = name_b


class FieldOutOfRange(CampusError):
    def __init__(self, name: str):
        super().__init__(f"field {name!r} extends into the reserved region")
        self.name = name


class DuplicateName(CampusError):
    def __init__(self, name: str):
        super().__init__(f"duplicate field name {name!r}")
        self.name = name


class UnknownField(CampusError):
    def __init__(self, name: str):
        super().__init__(f"no field named {name!r} in layout")
        self.name = name


class ValueOverflow(CampusError):
    """Value does not fit the field's encoding or width."""


class BlockLocked(CampusError):
    def __init__(self, block: int):
        super().__init__(f"block {block} is write-protected")
        self.block = block


class InsufficientFunds(CampusError):
    """Transaction would drive an account balance negative."""


class NotAnAccount(CampusError):
    def __init__(self, name: str):
        super().__init__(f"field {name!r} is not a money field")
        self.name = name


class LayoutFileError(CampusError):
    """Malformed layout definition file."""


class ImageFileError(CampusError):
    """Malformed card image file."""


# -- bus / frames ------------------------------------------------------------

class PayloadTooLong(CampusError):
    """Frame payload exceeds the 1024-byte limit."""


class BadCrc(CampusError):
    """Frame failed its CRC check; receivers stay silent on this."""


class Truncated(CampusError):
    """Byte string is not exactly one well-formed frame."""


class Timeout(CampusError):
    """All transaction retries exhausted without a valid response."""


class NoSuchTerminal(CampusError):
    def __init__(self, addr: int):
        super().__init__(f"no terminal at address {addr}")
        self.addr = addr


# -- terminal ----------------------------------------------------------------

class ClockWentBackwards(CampusError):
    def __init__(self, now: int, last: int):
        super().__init__(f"time moved backwards: {now} < {last}")
        self.now = now
        self.last = last


# -- coordinator -------------------------------------------------------------

class AuthDenied(CampusError):
    """Acting user is missing, unknown, or below the required role."""


class DuplicateActiveCard(CampusError):
    def __init__(self, personal_id: int):
        super().__init__(f"personal id {personal_id} already holds an active card")
        self.personal_id = personal_id


class UnknownCard(CampusError):
    def __init__(self, uid: str):
        super().__init__(f"no registered card with uid {uid}")
        self.uid = uid


class DuplicateUser(CampusError):
    def __init__(self, username: str):
        super().__init__(f"user {username!r} already exists")
        self.username = username


class UnknownUser(CampusError):
    def __init__(self, username: str):
        super().__init__(f"no user named {username!r}")
        self.username = username


class LastAdmin(CampusError):
    """Operation would leave the system without an admin."""


class BadRange(CampusError):
    """Report time range has from > to."""


class BadPassphrase(CampusError):
    """Store decryption failed authentication."""


class CorruptContainer(CampusError):
    """Store file is structurally invalid."""


class MalformedLog(CampusError):
    """Mobile session log could not be parsed."""


class UnknownAlarm(CampusError):
    def __init__(self, alarm_id: int):
        super().__init__(f"no alarm with id {alarm_id}")
        self.alarm_id = alarm_id


# -- scenarios ---------------------------------------------------------------

class ScenarioParseError(CampusError):
    """Scenario file is malformed."""


class UndefinedReference(CampusError):
    """Scenario script references an undefined card, gate, or terminal."""
