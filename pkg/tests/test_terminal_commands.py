"""The terminal's bus command handler."""

from campus.bus import commands as cmd
from campus.tag import CARD_V1, decode_field
from campus.terminal.door import DoorPosition
from campus.terminal.events import EventKind
from campus.terminal.terminal import REVOCATION_CAPACITY, TerminalConfig

from conftest import MONDAY, PASSWORD, make_card, make_terminal

NOW = MONDAY + 10 * 3600


def last_event(terminal):
    return terminal.peek_events(10_000)[-1]


def test_ping():
    assert make_terminal().handle_command(cmd.CMD_PING, b"", NOW) == (cmd.RESP_ACK, b"")


def test_unknown_command_code():
    resp, payload = make_terminal().handle_command(0x7F, b"", NOW)
    assert resp == cmd.RESP_ERR
    assert payload == bytes([cmd.ERR_UNKNOWN_CMD])


def test_get_status_reflects_state():
    terminal = make_terminal()
    resp, payload = terminal.handle_command(cmd.CMD_GET_STATUS, b"", NOW)
    assert resp == cmd.RESP_DATA
    status = cmd.parse_status(payload)
    assert status.door is cmd.DoorCode.LOCKED
    assert status.mode is cmd.ModeCode.NORMAL
    assert status.queue_len == 0
    assert status.last_seq == 0
    assert status.local_time == NOW


def test_drain_and_ack_through_commands():
    terminal = make_terminal()
    terminal.on_tag_read(make_card(), NOW)  # one ACCESS_GRANTED
    resp, payload = terminal.handle_command(cmd.CMD_DRAIN_EVENTS, cmd.pack_drain(10), NOW)
    assert resp == cmd.RESP_DATA
    from campus.terminal.events import unpack_events

    events = unpack_events(payload)
    assert [e.kind for e in events] == [EventKind.ACCESS_GRANTED]
    # Drain again: identical answer until acked.
    again, payload2 = terminal.handle_command(cmd.CMD_DRAIN_EVENTS, cmd.pack_drain(10), NOW)
    assert payload2 == payload
    resp, _ = terminal.handle_command(cmd.CMD_ACK_EVENTS, cmd.pack_ack_events(events[-1].seq), NOW)
    assert resp == cmd.RESP_ACK
    _, empty = terminal.handle_command(cmd.CMD_DRAIN_EVENTS, cmd.pack_drain(10), NOW)
    assert empty == b""


def test_drain_caps_batch_at_frame_limit():
    terminal = make_terminal()
    for i in range(60):
        terminal.handle_command(
            cmd.CMD_SET_TIME, cmd.with_password(PASSWORD, cmd.pack_set_time(NOW + i)), NOW + i
        )
    _, payload = terminal.handle_command(cmd.CMD_DRAIN_EVENTS, cmd.pack_drain(255), NOW + 99)
    assert len(payload) == 44 * 23  # at most 44 records per frame


def test_set_config_auth_gate():
    terminal = make_terminal()
    body = cmd.CONFIG_BODY.pack(2, 7, cmd.ModeCode.NORMAL, 4, 40) + b"newpass0"
    before = terminal.config

    resp, payload = terminal.handle_command(cmd.CMD_SET_CONFIG, b"bad!", NOW)
    assert (resp, payload) == (cmd.RESP_ERR, bytes([cmd.ERR_BAD_ARG]))  # shorter than a password

    resp, payload = terminal.handle_command(cmd.CMD_SET_CONFIG, b"wrongpw!" + body, NOW)
    assert (resp, payload) == (cmd.RESP_ERR, bytes([cmd.ERR_AUTH]))
    assert terminal.config == before

    resp, _ = terminal.handle_command(cmd.CMD_SET_CONFIG, cmd.with_password(PASSWORD, body), NOW)
    assert resp == cmd.RESP_ACK
    assert (terminal.config.address, terminal.config.gate_id) == (2, 7)
    assert terminal.config.password == b"newpass0"
    event = last_event(terminal)
    assert event.kind is EventKind.CONFIG_CHANGED
    assert event.detail == cmd.CMD_SET_CONFIG

    # The old password no longer authenticates.
    resp, payload = terminal.handle_command(cmd.CMD_SET_CONFIG, cmd.with_password(PASSWORD, body), NOW)
    assert (resp, payload) == (cmd.RESP_ERR, bytes([cmd.ERR_AUTH]))


def test_set_config_rejects_invalid_values():
    terminal = make_terminal()
    # gate 64 is out of range; timeout 3 does not exceed strike 5
    for body in (
        cmd.CONFIG_BODY.pack(1, 64, 0, 5, 30) + b"newpass0",
        cmd.CONFIG_BODY.pack(1, 1, 0, 5, 3) + b"newpass0",
    ):
        resp, payload = terminal.handle_command(cmd.CMD_SET_CONFIG, cmd.with_password(PASSWORD, body), NOW)
        assert (resp, payload) == (cmd.RESP_ERR, bytes([cmd.ERR_BAD_ARG]))


def test_get_config():
    terminal = make_terminal(address=3, gate_id=9)
    resp, payload = terminal.handle_command(cmd.CMD_GET_CONFIG, b"", NOW)
    assert resp == cmd.RESP_DATA
    address, gate_id, rate, strike, timeout = cmd.CONFIG_BODY.unpack(payload)
    assert (address, gate_id) == (3, 9)
    assert (strike, timeout) == (5, 30)


def test_unlock_brief_releases_and_logs_mode_change():
    terminal = make_terminal()
    resp, _ = terminal.handle_command(cmd.CMD_UNLOCK_BRIEF, cmd.with_password(PASSWORD, b""), NOW)
    assert resp == cmd.RESP_ACK
    assert terminal.door.position is DoorPosition.RELEASED
    event = last_event(terminal)
    assert event.kind is EventKind.MODE_CHANGED
    assert event.detail == 0xFF
    # One-shot: relocks at the strike deadline.
    terminal.tick(NOW + 5, sensor_open=False)
    assert terminal.door.position is DoorPosition.LOCKED


def test_unlock_until_and_set_mode():
    terminal = make_terminal()
    resp, _ = terminal.handle_command(
        cmd.CMD_UNLOCK_UNTIL, cmd.with_password(PASSWORD, cmd.pack_unlock_until(NOW + 600)), NOW
    )
    assert resp == cmd.RESP_ACK
    assert terminal.mode.code is cmd.ModeCode.UNLOCKED_UNTIL
    assert terminal.mode.until == NOW + 600
    assert last_event(terminal).detail == cmd.ModeCode.UNLOCKED_UNTIL

    resp, _ = terminal.handle_command(
        cmd.CMD_SET_MODE, cmd.with_password(PASSWORD, cmd.pack_set_mode(cmd.ModeCode.CATEGORY, categories=0b110)), NOW
    )
    assert resp == cmd.RESP_ACK
    assert terminal.mode.categories == {1, 2}

    resp, _ = terminal.handle_command(
        cmd.CMD_SET_MODE, cmd.with_password(PASSWORD, cmd.pack_set_mode(cmd.ModeCode.NORMAL)), NOW
    )
    assert terminal.mode.code is cmd.ModeCode.NORMAL


def test_push_revocation_fifo_capacity():
    terminal = make_terminal()
    uids = [0xE000000000000100 + i for i in range(REVOCATION_CAPACITY + 6)]
    for chunk_start in range(0, len(uids), 10):
        chunk = uids[chunk_start : chunk_start + 10]
        resp, _ = terminal.handle_command(
            cmd.CMD_PUSH_REVOCATION, cmd.with_password(PASSWORD, cmd.pack_revocations(chunk)), NOW
        )
        assert resp == cmd.RESP_ACK
    # The six oldest entries were evicted.
    assert all(not terminal.is_revoked(u) for u in uids[:6])
    assert all(terminal.is_revoked(u) for u in uids[6:])


def test_push_revocation_length_mismatch():
    terminal = make_terminal()
    resp, payload = terminal.handle_command(
        cmd.CMD_PUSH_REVOCATION, cmd.with_password(PASSWORD, b"\x02" + b"\x00" * 8), NOW
    )
    assert (resp, payload) == (cmd.RESP_ERR, bytes([cmd.ERR_BAD_ARG]))


def test_queue_card_write_applies_on_next_sight():
    terminal = make_terminal()
    card = make_card()
    field_id = CARD_V1.field_id("meal_plan")
    resp, _ = terminal.handle_command(
        cmd.CMD_QUEUE_CARD_WRITE,
        cmd.with_password(PASSWORD, cmd.pack_card_write(card.uid.value, field_id, b"\x05")),
        NOW,
    )
    assert resp == cmd.RESP_ACK
    # Replacing the same field keeps one entry with the newest value.
    terminal.handle_command(
        cmd.CMD_QUEUE_CARD_WRITE,
        cmd.with_password(PASSWORD, cmd.pack_card_write(card.uid.value, field_id, b"\x09")),
        NOW,
    )
    assert terminal.pending_write_fields(card.uid.value) == [field_id]

    decision, image, events = terminal.on_tag_read(card, NOW)
    assert decision.granted
    assert decode_field(CARD_V1, image, "meal_plan") == 9
    writes = [e for e in events if e.kind is EventKind.CARD_WRITTEN]
    assert [w.detail for w in writes] == [field_id]
    assert terminal.pending_write_fields(card.uid.value) == []


def test_queue_card_write_wrong_length_is_dropped_on_apply():
    terminal = make_terminal()
    card = make_card()
    field_id = CARD_V1.field_id("meal_plan")
    terminal.handle_command(
        cmd.CMD_QUEUE_CARD_WRITE,
        cmd.with_password(PASSWORD, cmd.pack_card_write(card.uid.value, field_id, b"\x01\x02")),
        NOW,
    )
    _, image, events = terminal.on_tag_read(card, NOW)
    assert decode_field(CARD_V1, image, "meal_plan") == 0
    assert not [e for e in events if e.kind is EventKind.CARD_WRITTEN]


def test_set_time_shifts_local_clock():
    terminal = make_terminal()
    resp, _ = terminal.handle_command(
        cmd.CMD_SET_TIME, cmd.with_password(PASSWORD, cmd.pack_set_time(NOW + 7200)), NOW
    )
    assert resp == cmd.RESP_ACK
    assert terminal.config.clock_offset_s == 7200
    assert terminal.local_time(NOW) == NOW + 7200
    _, payload = terminal.handle_command(cmd.CMD_GET_STATUS, b"", NOW)
    assert cmd.parse_status(payload).local_time == NOW + 7200


def test_discover_answers_own_address():
    terminal = make_terminal(address=17)
    resp, payload = terminal.handle_command(cmd.CMD_DISCOVER, b"", NOW)
    assert (resp, payload) == (cmd.RESP_DATA, bytes([17]))


def test_malformed_bodies_answer_bad_arg():
    terminal = make_terminal()
    for code, body in (
        (cmd.CMD_DRAIN_EVENTS, b""),
        (cmd.CMD_ACK_EVENTS, b"\x01"),
        (cmd.CMD_UNLOCK_UNTIL, cmd.with_password(PASSWORD, b"\x01\x02")),
        (cmd.CMD_SET_MODE, cmd.with_password(PASSWORD, b"")),
        (cmd.CMD_SET_MODE, cmd.with_password(PASSWORD, b"\x09")),
        (cmd.CMD_QUEUE_CARD_WRITE, cmd.with_password(PASSWORD, b"\x01\x02\x03")),
    ):
        resp, payload = terminal.handle_command(code, body, NOW)
        assert (resp, payload) == (cmd.RESP_ERR, bytes([cmd.ERR_BAD_ARG])), hex(code)


def test_local_assign_rights():
    import pytest

    from campus.errors import AuthDenied, UnknownCard

    terminal = make_terminal(gate_id=9)
    card = make_card(gates=(1,))

    with pytest.raises(AuthDenied):
        terminal.local_assign_rights(card, {9}, ((0, 96),) * 7, b"badpass!", NOW)

    with pytest.raises(UnknownCard):
        terminal.local_assign_rights(
            card.with_bytes(5, b"\xee"), {9}, ((0, 96),) * 7, PASSWORD, NOW
        )

    updated = terminal.local_assign_rights(card, {9}, ((0, 96),) * 7, PASSWORD, NOW)
    decision, _, _ = terminal.on_tag_read(updated, NOW)
    assert decision.granted
    writes = [e for e in terminal.peek_events(100) if e.kind is EventKind.CARD_WRITTEN]
    assert {w.detail for w in writes} == {CARD_V1.field_id("gate_list"), CARD_V1.field_id("schedule")}


def test_config_validation_rules():
    import pytest

    with pytest.raises(ValueError):
        TerminalConfig(address=0, gate_id=1, password=PASSWORD)
    with pytest.raises(ValueError):
        TerminalConfig(address=31, gate_id=1, password=PASSWORD)
    with pytest.raises(ValueError):
        TerminalConfig(address=1, gate_id=1, password=b"short")
    with pytest.raises(ValueError):
        TerminalConfig(address=1, gate_id=1, password=PASSWORD, strike_release_s=0)
    with pytest.raises(ValueError):
        TerminalConfig(address=1, gate_id=1, password=PASSWORD, strike_release_s=10, door_open_timeout_s=10)
