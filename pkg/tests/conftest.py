import datetime
import random

import pytest

from campus.clock import VirtualClock
from campus.coordinator.coordinator import Coordinator
from campus.tag import CARD_V1, ALL_DAY, TagImage, TagUid, encode_field, sign_card
from campus.terminal.terminal import GateTerminal, TerminalConfig

SYSTEM_KEY = bytes(range(32))
PASSWORD = b"secret00"

# Monday 2026-03-02 00:00 UTC — all schedule tests are relative to this week.
MONDAY = 1772409600


def make_card(
    uid_value: int = 0xE011223344556677,
    personal_id: int = 4242,
    expiry=datetime.date(2027, 1, 1),
    holder_type: int = 1,
    flags=frozenset(),
    gates=(1, 2, 3),
    schedule=ALL_DAY,
    issue_number: int = 1,
    restaurant_cents: int = 0,
    key: bytes = SYSTEM_KEY,
) -> TagImage:
    image = TagImage.blank(TagUid(uid_value))
    image = encode_field(CARD_V1, image, "layout_id", CARD_V1.layout_id)
    image = encode_field(CARD_V1, image, "personal_id", personal_id)
    image = encode_field(CARD_V1, image, "expiry_date", expiry)
    image = encode_field(CARD_V1, image, "issue_number", issue_number)
    image = encode_field(CARD_V1, image, "holder_type", holder_type)
    image = encode_field(CARD_V1, image, "flags", flags)
    image = encode_field(CARD_V1, image, "restaurant_account", restaurant_cents)
    image = encode_field(CARD_V1, image, "gate_list", frozenset(gates))
    image = encode_field(CARD_V1, image, "schedule", schedule)
    return sign_card(key, image)


def make_terminal(
    address: int = 1,
    gate_id: int = 1,
    strike_release_s: int = 5,
    door_open_timeout_s: int = 30,
    key: bytes = SYSTEM_KEY,
) -> GateTerminal:
    config = TerminalConfig(
        address=address,
        gate_id=gate_id,
        password=PASSWORD,
        strike_release_s=strike_release_s,
        door_open_timeout_s=door_open_timeout_s,
    )
    return GateTerminal(config, key)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


@pytest.fixture
def terminal():
    return make_terminal()


@pytest.fixture
def card():
    return make_card()


@pytest.fixture
def clock():
    return VirtualClock(MONDAY)


@pytest.fixture
def coordinator(clock, tmp_path):
    c = Coordinator(
        system_key=SYSTEM_KEY,
        passphrase="testpass",
        store_path=tmp_path / "store.cgdb",
        clock=clock,
        rng=random.Random(99),
    )
    c.users.bootstrap("root", "rootpw", clock.now(), c.rng)
    return c
