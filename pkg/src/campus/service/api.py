"""HTTP facade over the coordinator.

Every endpoint is a thin adapter: parse request, call the coordinator
method, map domain errors to status codes (401 bad token, 403 role, 404
unknown id, 400 malformed, 409 conflicts, 504 bus timeout). State
changes happen only inside coordinator calls, so the API cannot drift
from the direct-call semantics.

The live stream is server-sent events: each subscriber walks its own
cursor over the ingested-event list and the alarm list, so ingestion is
never blocked by a slow consumer and every subscriber sees each record
exactly once, in ingestion order (per-terminal seq order preserved).
 A ``once=1`` query makes the stream return everything new and close,
which suits both tests and auto-reconnecting EventSource clients.
"""

from __future__ import annotations

import asyncio
import datetime
import json
from typing import Iterator

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse

from campus.bus import commands as cmd
from campus.coordinator.coordinator import Coordinator
from campus.coordinator.reports import ReportQuery
from campus.coordinator.users import Role
from campus.errors import (
    AuthDenied,
    BadRange,
    CampusError,
    DuplicateActiveCard,
    DuplicateUser,
    LastAdmin,
    MalformedLog,
    NoSuchTerminal,
    ScenarioParseError,
    Timeout,
    UnknownAlarm,
    UnknownCard,
    UnknownUser,
)
from campus.terminal.events import EventKind

TOKEN_TTL_S = 8 * 3600

_STATUS_BY_ERROR = [
    (AuthDenied, 403),
    (Timeout, 504),
    ((UnknownCard, NoSuchTerminal, UnknownUser, UnknownAlarm), 404),
    ((DuplicateActiveCard, DuplicateUser, LastAdmin), 409),
    ((BadRange, MalformedLog, ScenarioParseError), 400),
]


class _Sessions:
    def __init__(self, coordinator: Coordinator):
        self.coordinator = coordinator
        self.tokens: dict[str, dict] = {}

    def login(self, username: str, password: str) -> dict | None:
        account = self.coordinator.users.authenticate(username, password)
        if account is None:
            return None
        token = "%032x" % self.coordinator.rng.getrandbits(128)
        session = {
            "token": token,
            "username": account.username,
            "role": account.role.name,
            "expires_at": self.coordinator.clock.now() + TOKEN_TTL_S,
        }
        self.tokens[token] = session
        return session

    def resolve(self, token: str | None) -> dict | None:
        if token is None:
            return None
        session = self.tokens.get(token)
        if session is None or session["expires_at"] < self.coordinator.clock.now():
            return None
        return session


def create_app(coordinator: Coordinator) -> FastAPI:
    app = FastAPI(title="campus access service", version="1")
    sessions = _Sessions(coordinator)
    app.state.coordinator = coordinator
    app.state.sessions = sessions

    def auth(minimum: Role):
        def dependency(
            authorization: str | None = Header(default=None),
            token: str | None = Query(default=None),
        ) -> dict:
            raw = token
            if raw is None and authorization is not None and authorization.startswith("Bearer "):
                raw = authorization.removeprefix("Bearer ")
            session = sessions.resolve(raw)
            if session is None:
                raise _HttpError(401, "missing or expired token")
            if Role[session["role"]] < minimum:
                raise _HttpError(403, f"requires {minimum.name}")
            return session

        return Depends(dependency)

    class _HttpError(Exception):
        def __init__(self, status: int, message: str):
            self.status = status
            self.message = message

    @app.exception_handler(_HttpError)
    async def _handle_http_error(_request: Request, exc: _HttpError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.exception_handler(CampusError)
    async def _handle_campus_error(_request: Request, exc: CampusError):
        for types, status in _STATUS_BY_ERROR:
            if isinstance(exc, types):
                return JSONResponse(status_code=status, content={"error": str(exc)})
        return JSONResponse(status_code=400, content={"error": str(exc)})

    # Handlers take request bodies as plain dicts and parse fields by hand, so
    # a missing key or unconvertible value surfaces here rather than as a 500.
    @app.exception_handler(ValueError)
    @app.exception_handler(KeyError)
    async def _handle_bad_body(_request: Request, exc: Exception):
        detail = str(exc) or exc.__class__.__name__
        return JSONResponse(status_code=400, content={"error": f"malformed request: {detail}"})

    # -- auth ----------------------------------------------------------------

    @app.post("/v1/login")
    async def login(body: dict):
        session = sessions.login(str(body.get("username", "")), str(body.get("password", "")))
        if session is None:
            raise _HttpError(401, "bad credentials")
        return session

    # -- doors and terminals -------------------------------------------------

    @app.get("/v1/doors")
    async def doors(_session: dict = auth(Role.VIEWER)):
        return coordinator.door_states()

    @app.post("/v1/terminals/{terminal_id}/unlock-brief")
    async def unlock_brief(terminal_id: int, session: dict = auth(Role.OPERATOR)):
        coordinator.terminal_unlock_brief(Role[session["role"]], terminal_id)
        return {"ok": True}

    @app.post("/v1/terminals/{terminal_id}/unlock-until")
    async def unlock_until(terminal_id: int, body: dict, session: dict = auth(Role.OPERATOR)):
        coordinator.terminal_unlock_until(Role[session["role"]], terminal_id, int(body["until"]))
        return {"ok": True}

    @app.post("/v1/terminals/{terminal_id}/mode")
    async def set_mode(terminal_id: int, body: dict, session: dict = auth(Role.OPERATOR)):
        mode = cmd.ModeCode[str(body.get("mode", "NORMAL")).upper()]
        coordinator.terminal_set_mode(
            Role[session["role"]],
            terminal_id,
            mode,
            until=int(body.get("until", 0)),
            categories=body.get("categories", ()),
        )
        return {"ok": True}

    @app.post("/v1/terminals/{terminal_id}/poll")
    async def poll(terminal_id: int, _session: dict = auth(Role.OPERATOR)):
        return {"ingested": coordinator.poll_terminal(terminal_id)}

    # -- events / reports ----------------------------------------------------

    @app.get("/v1/events")
    async def events(
        gate: list[int] = Query(default=None),
        ts_from: int | None = Query(default=None, alias="from"),
        ts_to: int | None = Query(default=None, alias="to"),
        person: str | None = None,
        kind: list[str] = Query(default=None),
        sort: str = "ts",
        desc: bool = False,
        fmt: str = Query(default="jsonl", alias="format"),
        _session: dict = auth(Role.VIEWER),
    ):
        query = ReportQuery(
            gates=frozenset(gate) if gate else None,
            ts_from=ts_from,
            ts_to=ts_to,
            person=_parse_person(person),
            kinds=_parse_kinds(kind),
            sort_key=sort,
            descending=desc,
            fmt=fmt,
        )
        media = "text/csv" if fmt == "csv" else "application/x-ndjson"
        return Response(content=coordinator.query_report(query), media_type=media)

    # -- cards ---------------------------------------------------------------

    @app.get("/v1/cards")
    async def cards(_session: dict = auth(Role.VIEWER)):
        return [_card_row(e) for _, e in sorted(coordinator.registry.items())]

    @app.post("/v1/cards")
    async def register_card(body: dict, session: dict = auth(Role.OPERATOR)):
        uid, _image = coordinator.register_card(
            Role[session["role"]],
            int(body["personal_id"]),
            int(body.get("holder_type", 1)),
            datetime.date.fromisoformat(body["expiry_date"]),
            frozenset(int(g) for g in body.get("gates", [])),
            _parse_schedule_json(body.get("schedule")),
        )
        return {"uid": uid.hex}

    @app.get("/v1/cards/{uid_hex}")
    async def card(uid_hex: str, _session: dict = auth(Role.VIEWER)):
        entry = coordinator.registry.get(int(uid_hex, 16))
        if entry is None:
            raise _HttpError(404, f"unknown card {uid_hex}")
        return _card_row(entry)

    @app.post("/v1/cards/{uid_hex}/lock")
    async def lock(uid_hex: str, session: dict = auth(Role.OPERATOR)):
        return coordinator.lock_card(Role[session["role"]], int(uid_hex, 16))

    @app.post("/v1/cards/{uid_hex}/unlock")
    async def unlock(uid_hex: str, session: dict = auth(Role.OPERATOR)):
        return coordinator.unlock_card(Role[session["role"]], int(uid_hex, 16))

    @app.post("/v1/cards/{uid_hex}/rights")
    async def rights(uid_hex: str, body: dict, session: dict = auth(Role.OPERATOR)):
        return coordinator.assign_rights(
            Role[session["role"]],
            int(uid_hex, 16),
            frozenset(int(g) for g in body.get("gates", [])),
            _parse_schedule_json(body.get("schedule")),
        )

    # -- alarms --------------------------------------------------------------

    @app.get("/v1/alarms")
    async def alarms(all: bool = False, _session: dict = auth(Role.VIEWER)):
        rows = coordinator.alarms.alarms if all else coordinator.alarms.unacknowledged()
        return [_alarm_row(a) for a in rows]

    @app.post("/v1/alarms/{alarm_id}/ack")
    async def ack_alarm(alarm_id: int, session: dict = auth(Role.OPERATOR)):
        return _alarm_row(coordinator.alarms.acknowledge(alarm_id, session["username"]))

    # -- users ---------------------------------------------------------------

    @app.get("/v1/users")
    async def users(_session: dict = auth(Role.ADMIN)):
        return [
            {"username": u.username, "role": u.role.name, "created_at": u.created_at}
            for u in coordinator.users.listing()
        ]

    @app.post("/v1/users")
    async def add_user(body: dict, session: dict = auth(Role.ADMIN)):
        account = coordinator.users.add(
            Role[session["role"]],
            str(body["username"]),
            str(body["password"]),
            Role.parse(str(body.get("role", "VIEWER"))),
            coordinator.clock.now(),
            coordinator.rng,
        )
        coordinator._maybe_persist()
        return {"username": account.username, "role": account.role.name}

    @app.delete("/v1/users/{username}")
    async def remove_user(username: str, session: dict = auth(Role.ADMIN)):
        coordinator.users.remove(Role[session["role"]], username)
        coordinator._maybe_persist()
        return {"ok": True}

    @app.patch("/v1/users/{username}")
    async def patch_user(username: str, body: dict, session: dict = auth(Role.ADMIN)):
        acting = Role[session["role"]]
        if "role" in body:
            coordinator.users.set_role(acting, username, Role.parse(str(body["role"])))
        if "password" in body:
            coordinator.users.set_password(acting, username, str(body["password"]), coordinator.rng)
        coordinator._maybe_persist()
        account = coordinator.users.get(username)
        return {"username": account.username, "role": account.role.name}

    # -- persistence and imports ---------------------------------------------

    @app.post("/v1/backup")
    async def backup(body: dict, _session: dict = auth(Role.ADMIN)):
        path = coordinator.backup(str(body["directory"]))
        return {"path": str(path)}

    @app.post("/v1/mobile-sessions")
    async def mobile_sessions(request: Request, session: dict = auth(Role.OPERATOR)):
        text = (await request.body()).decode("utf-8")
        return {"merged": coordinator.import_mobile_log(Role[session["role"]], text)}

    # -- live stream ---------------------------------------------------------

    def _stream_chunks(event_cursor: int, alarm_cursor: int) -> Iterator[tuple[str, int, int]]:
        events = coordinator.events
        alarms = coordinator.alarms.alarms
        while event_cursor < len(events):
            e = events[event_cursor]
            event_cursor += 1
            data = json.dumps(
                {
                    "id": event_cursor,
                    "terminal": e.terminal,
                    "gate": e.gate,
                    "seq": e.seq,
                    "ts": e.ts,
                    "uid": f"{e.uid:016X}" if e.uid else None,
                    "kind": EventKind(e.kind).name if e.kind in set(EventKind) else e.kind,
                    "detail": e.detail,
                },
                separators=(",", ":"),
            )
            yield f"id: {event_cursor}\nevent: event\ndata: {data}\n\n", event_cursor, alarm_cursor
        while alarm_cursor < len(alarms):
            a = alarms[alarm_cursor]
            alarm_cursor += 1
            data = json.dumps(_alarm_row(a), separators=(",", ":"))
            yield f"event: alarm\ndata: {data}\n\n", event_cursor, alarm_cursor

    @app.get("/v1/stream")
    async def stream(
        since: int = 0,
        alarms_since: int = 0,
        once: bool = False,
        _session: dict = auth(Role.VIEWER),
    ):
        async def generate():
            event_cursor, alarm_cursor = since, alarms_since
            while True:
                for chunk, event_cursor, alarm_cursor in _stream_chunks(event_cursor, alarm_cursor):
                    yield chunk
                if once:
                    return
                await asyncio.sleep(0.2)

        return StreamingResponse(generate(), media_type="text/event-stream")

    return app


def _parse_person(person: str | None) -> int | str | None:
    if person is None or person == "":
        return None
    if len(person) == 16 and all(c in "0123456789abcdefABCDEF" for c in person):
        return person
    return int(person)


def _parse_kinds(kinds: list[str] | None) -> frozenset[int] | None:
    if not kinds:
        return None
    out = set()
    for k in kinds:
        out.add(int(EventKind[k.upper()]) if not k.isdigit() else int(k))
    return frozenset(out)


def _parse_schedule_json(value) -> tuple:
    from campus.tag.layout import ALL_DAY, NO_ACCESS

    if value is None or value == "all_day":
        return ALL_DAY
    if value == "none":
        return NO_ACCESS
    return tuple((int(a), int(b)) for a, b in value)


def _card_row(entry) -> dict:
    return {
        "uid": f"{entry.uid:016X}",
        "personal_id": entry.personal_id,
        "holder_type": entry.holder_type,
        "issue_number": entry.issue_number,
        "locked": entry.locked,
        "active": entry.active,
        "gates": sorted(entry.gates),
        "schedule": [list(p) for p in entry.schedule],
        "last_seen_ts": entry.last_seen_ts,
        "last_seen_gate": entry.last_seen_gate,
    }


def _alarm_row(alarm) -> dict:
    return {
        "id": alarm.alarm_id,
        "rule": alarm.rule_id,
        "terminal": alarm.terminal,
        "gate": alarm.gate,
        "seq": alarm.seq,
        "ts": alarm.ts,
        "kind": EventKind(alarm.kind).name,
        "raised_at": alarm.raised_at,
        "acknowledged_by": alarm.acknowledged_by,
    }
