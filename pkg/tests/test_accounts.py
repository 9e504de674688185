"""On-card debit account arithmetic."""

import pytest
from hypothesis import given, strategies as st

from campus.errors import InsufficientFunds, NotAnAccount, ValueOverflow
from campus.tag import CARD_V1, apply_transaction, decode_field

from conftest import make_card

U32_MAX = (1 << 32) - 1


def balance(image):
    return decode_field(CARD_V1, image, "restaurant_account")


def test_debit():
    image = make_card(restaurant_cents=500)
    after = apply_transaction(CARD_V1, image, "restaurant_account", -200)
    assert balance(after) == 300


def test_overdraft_rejected():
    image = make_card(restaurant_cents=100)
    with pytest.raises(InsufficientFunds):
        apply_transaction(CARD_V1, image, "restaurant_account", -200)
    assert balance(image) == 100  # untouched


def test_credit_then_debit_round_trips_bytes():
    image = make_card(restaurant_cents=0)
    spec = CARD_V1.field("restaurant_account")
    before = image.read(spec.offset, spec.length)
    up = apply_transaction(CARD_V1, image, "restaurant_account", 10**6)
    down = apply_transaction(CARD_V1, up, "restaurant_account", -(10**6))
    assert balance(down) == 0
    assert down.read(spec.offset, spec.length) == before


def test_non_account_field_rejected():
    with pytest.raises(NotAnAccount):
        apply_transaction(CARD_V1, make_card(), "personal_id", -1)


def test_overflow_rejected():
    image = make_card(restaurant_cents=U32_MAX)
    with pytest.raises(ValueOverflow):
        apply_transaction(CARD_V1, image, "restaurant_account", 1)


@given(st.lists(st.integers(min_value=-2000, max_value=2000), max_size=30))
def test_no_sequence_goes_negative_or_wraps(deltas):
    image = make_card(restaurant_cents=1000)
    expected = 1000
    for delta in deltas:
        try:
            image = apply_transaction(CARD_V1, image, "restaurant_account", delta)
        except InsufficientFunds:
            assert expected + delta < 0
        else:
            expected += delta
        assert balance(image) == expected
        assert 0 <= expected <= U32_MAX


def test_second_account_is_independent():
    image = make_card(restaurant_cents=500)
    image = apply_transaction(CARD_V1, image, "service_account_1", 250)
    assert decode_field(CARD_V1, image, "service_account_1") == 250
    assert balance(image) == 500
