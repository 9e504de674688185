"""Authorization decisions checked against an independent rule table.

The oracle below re-states the deny precedence from scratch; the
cross-product test then runs every combination of card and terminal
state through both paths and demands byte-for-byte agreement.
"""

import datetime
import time

from campus.bus import commands as cmd
from campus.tag import CARD_V1, verify_card
from campus.terminal.events import DenyReason, EventKind
from campus.terminal.terminal import TerminalMode, Verdict

from conftest import MONDAY, PASSWORD, SYSTEM_KEY, make_card, make_terminal

UID = 0xE0AA00BB11CC22DD
NOW = MONDAY + 10 * 3600  # Monday 10:00
GATE = 1

IN_WINDOW = tuple((32, 72) for _ in range(7))      # 08:00-18:00 daily
OUT_WINDOW = tuple((0, 4) for _ in range(7))       # 00:00-01:00 daily
PAST = datetime.date(2026, 3, 1)                   # day before NOW
FUTURE = datetime.date(2027, 3, 1)

MODE_NORMAL = "normal"
MODE_UNLOCKED = "unlocked"
MODE_CATEGORY = "category"


def oracle(signed, revoked, locked, expired, gate_ok, sched_ok, mode):
    """Independent restatement of the precedence rules."""
    if not signed:
        return (Verdict.DENY, DenyReason.UNREGISTERED)
    if revoked:
        return (Verdict.DENY, DenyReason.REVOKED)
    if locked:
        return (Verdict.DENY, DenyReason.LOCKED)
    if expired:
        return (Verdict.DENY, DenyReason.EXPIRED)
    if mode == MODE_UNLOCKED:
        return (Verdict.GRANT, None)
    if mode == MODE_CATEGORY:  # card's holder type is always in the set below
        return (Verdict.GRANT, None)
    if not gate_ok:
        return (Verdict.DENY, DenyReason.GATE_NOT_ALLOWED)
    if not sched_ok:
        return (Verdict.DENY, DenyReason.OUT_OF_SCHEDULE)
    return (Verdict.GRANT, None)


def build_case(signed, revoked, locked, expired, gate_ok, sched_ok, mode):
    card = make_card(
        uid_value=UID,
        expiry=PAST if expired else FUTURE,
        holder_type=1,
        flags={0} if locked else frozenset(),
        gates=(GATE, 5) if gate_ok else (5,),
        schedule=IN_WINDOW if sched_ok else OUT_WINDOW,
    )
    if not signed:
        card = card.with_bytes(2, bytes([card.data[2] ^ 0xFF]))

    terminal = make_terminal(gate_id=GATE)
    if revoked:
        resp, _ = terminal.handle_command(
            cmd.CMD_PUSH_REVOCATION,
            cmd.with_password(PASSWORD, cmd.pack_revocations([UID])),
            NOW - 60,
        )
        assert resp == cmd.RESP_ACK
    if mode == MODE_UNLOCKED:
        terminal.mode = TerminalMode.unlocked_until(NOW + 3600)
    elif mode == MODE_CATEGORY:
        terminal.mode = TerminalMode.category({1})
    return terminal, card


def all_cases():
    for signed in (True, False):
        for revoked in (True, False):
            for locked in (True, False):
                for expired in (True, False):
                    for gate_ok in (True, False):
                        for sched_ok in (True, False):
                            for mode in (MODE_NORMAL, MODE_UNLOCKED, MODE_CATEGORY):
                                yield signed, revoked, locked, expired, gate_ok, sched_ok, mode


def test_cross_product_matches_oracle_under_one_second():
    started = time.perf_counter()
    cases = 0
    for signed, revoked, locked, expired, gate_ok, sched_ok, mode in all_cases():
        expected = oracle(signed, revoked, locked, expired, gate_ok, sched_ok, mode)
        terminal, card = build_case(signed, revoked, locked, expired, gate_ok, sched_ok, mode)
        decision, image, events = terminal.on_tag_read(card, NOW)
        label = (signed, revoked, locked, expired, gate_ok, sched_ok, mode)

        assert (decision.verdict, decision.reason) == expected, label

        # Exactly one access event per read.
        access = [e for e in events if e.kind in (EventKind.ACCESS_GRANTED, EventKind.ACCESS_DENIED)]
        assert len(access) == 1, label
        assert access[0].uid == UID

        # Every card the terminal touched still verifies; unregistered
        # cards are returned untouched.
        if signed:
            assert verify_card(SYSTEM_KEY, image), label
        else:
            assert image.data == card.data

        # Determinism: a freshly built identical case decides identically.
        terminal2, card2 = build_case(signed, revoked, locked, expired, gate_ok, sched_ok, mode)
        decision2, _, _ = terminal2.on_tag_read(card2, NOW)
        assert decision2 == decision, label
        cases += 1

    assert cases == 192
    assert time.perf_counter() - started < 1.0


def test_revoked_read_writes_lock_and_clears_entry():
    terminal, card = build_case(True, True, False, False, True, True, MODE_NORMAL)
    decision, image, events = terminal.on_tag_read(card, NOW)
    assert decision.reason is DenyReason.REVOKED
    assert not terminal.is_revoked(UID)
    # The lock flag now lives on the card, recorded as a field write.
    writes = [e for e in events if e.kind is EventKind.CARD_WRITTEN]
    assert [w.detail for w in writes] == [CARD_V1.field_id("flags")]
    decision2, _, _ = terminal.on_tag_read(image, NOW + 1)
    assert decision2.reason is DenyReason.LOCKED


def test_unlocked_until_in_past_reverts_to_normal_rules():
    terminal, card = build_case(True, False, False, False, False, True, MODE_NORMAL)
    terminal.mode = TerminalMode.unlocked_until(NOW - 1)
    decision, _, _ = terminal.on_tag_read(card, NOW)
    assert decision.reason is DenyReason.GATE_NOT_ALLOWED


def test_category_mode_ignores_other_holder_types():
    terminal, card = build_case(True, False, False, False, False, True, MODE_NORMAL)
    terminal.mode = TerminalMode.category({2})  # visitors only; card is a student
    decision, _, _ = terminal.on_tag_read(card, NOW)
    assert decision.reason is DenyReason.GATE_NOT_ALLOWED


def test_unknown_layout_id_is_unregistered():
    card = make_card(uid_value=UID)
    terminal = make_terminal(gate_id=GATE)
    terminal.layouts = {}  # no known templates
    decision, image, _ = terminal.on_tag_read(card, NOW)
    assert decision.reason is DenyReason.UNREGISTERED
    assert image.data == card.data


def test_unregistered_card_skips_pending_writes():
    terminal = make_terminal(gate_id=GATE)
    resp, _ = terminal.handle_command(
        cmd.CMD_QUEUE_CARD_WRITE,
        cmd.with_password(PASSWORD, cmd.pack_card_write(UID, CARD_V1.field_id("meal_plan"), b"\x07")),
        NOW,
    )
    assert resp == cmd.RESP_ACK
    bogus = make_card(uid_value=UID).with_bytes(3, b"\x99")
    _, image, _ = terminal.on_tag_read(bogus, NOW)
    assert image.read(11, 1) == b"\x00"  # meal plan untouched
    assert terminal.pending_write_fields(UID)  # still queued for later


def test_grant_releases_strike_deny_does_not():
    terminal, card = build_case(True, False, False, False, True, True, MODE_NORMAL)
    terminal.on_tag_read(card, NOW)
    assert terminal.door.position.name == "RELEASED"

    terminal2, card2 = build_case(True, False, False, False, True, False, MODE_NORMAL)
    terminal2.on_tag_read(card2, NOW)
    assert terminal2.door.position.name == "LOCKED"
