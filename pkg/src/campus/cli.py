"""Command-line entry points.

All verbs operate on an encrypted store file; the passphrase comes from
``CAMPUS_PASSPHRASE`` (or ``--passphrase``). ``report`` prints the same
bytes the library's query path produces, and can render summary figures
next to it. ``serve`` hosts the HTTP API over the store.
"""

from __future__ import annotations

import hashlib
import random
import sys
from pathlib import Path

import click

from campus.coordinator.coordinator import Coordinator
from campus.coordinator.reports import ReportQuery, select_events
from campus.coordinator.users import Role
from campus.errors import CampusError
from campus.terminal.events import EventKind

_STORE = click.option(
    "--store",
    type=click.Path(path_type=Path),
    default=Path("campus.cgdb"),
    show_default=True,
    help="Encrypted store file.",
)
_PASSPHRASE = click.option(
    "--passphrase",
    envvar="CAMPUS_PASSPHRASE",
    required=True,
    help="Store passphrase (env: CAMPUS_PASSPHRASE).",
)


def _open(store: Path, passphrase: str) -> Coordinator:
    if not store.exists():
        raise click.ClickException(f"store not found: {store}")
    try:
        return Coordinator.restore(passphrase, store)
    except CampusError as exc:
        raise click.ClickException(str(exc))


@click.group()
def main():
    """Campus access control toolkit."""


@main.command()
@_STORE
@_PASSPHRASE
@click.option("--admin", default="admin", show_default=True, help="Bootstrap admin username.")
@click.option("--admin-password", required=True, help="Bootstrap admin password.")
@click.option("--seed", type=int, default=None, help="Deterministic RNG seed (testing).")
def init(store: Path, passphrase: str, admin: str, admin_password: str, seed: int | None):
    """Create a new store with one admin account."""
    if store.exists():
        raise click.ClickException(f"refusing to overwrite existing store: {store}")
    rng = random.Random(seed)
    system_key = hashlib.sha256(rng.randbytes(32)).digest()
    coordinator = Coordinator(
        system_key=system_key, passphrase=passphrase, store_path=store, rng=rng
    )
    try:
        coordinator.users.bootstrap(admin, admin_password, coordinator.clock.now(), rng)
    except CampusError as exc:
        raise click.ClickException(str(exc))
    coordinator.persist()
    click.echo(f"created {store} with admin '{admin}'")


@main.command()
@_STORE
@_PASSPHRASE
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(store: Path, passphrase: str, host: str, port: int):
    """Serve the HTTP API over the store."""
    import uvicorn

    from campus.service.api import create_app

    coordinator = _open(store, passphrase)
    uvicorn.run(create_app(coordinator), host=host, port=port)


@main.command()
@click.argument("scenario", type=click.Path(exists=True, path_type=Path))
@click.option("--store", type=click.Path(path_type=Path), default=None, help="Persist final state here.")
@click.option(
    "--passphrase",
    envvar="CAMPUS_PASSPHRASE",
    default=None,
    help="Seal the store with this passphrase (env: CAMPUS_PASSPHRASE); "
    "overrides one declared in the scenario.",
)
def run(scenario: Path, store: Path | None, passphrase: str | None):
    """Run a scenario file and print its transcript."""
    from campus.service.scenario import run_scenario

    try:
        transcript = run_scenario(scenario, store_path=store, passphrase=passphrase)
    except CampusError as exc:
        raise click.ClickException(str(exc))
    sys.stdout.write(transcript)


@main.command()
@_STORE
@_PASSPHRASE
@click.option("--from", "ts_from", type=int, default=None, help="Inclusive lower timestamp bound.")
@click.option("--to", "ts_to", type=int, default=None, help="Inclusive upper timestamp bound.")
@click.option("--gate", "gates", type=int, multiple=True, help="Gate filter (repeatable).")
@click.option("--person", default=None, help="Personal id, or card uid as 16 hex digits.")
@click.option("--kind", "kinds", multiple=True, help="Event kind name filter (repeatable).")
@click.option("--sort", "sort_key", default="ts", show_default=True, type=click.Choice(["ts", "gate", "person", "kind"]))
@click.option("--desc", is_flag=True, help="Descending primary sort.")
@click.option("--format", "fmt", default="csv", show_default=True, type=click.Choice(["csv", "jsonl"]))
@click.option("--figures", type=click.Path(path_type=Path), default=None, help="Also write summary PNGs into this directory.")
def report(store, passphrase, ts_from, ts_to, gates, person, kinds, sort_key, desc, fmt, figures):
    """Print an event report to standard output."""
    coordinator = _open(store, passphrase)
    if person is not None and not (len(person) == 16 and _is_hex(person)):
        try:
            person = int(person)
        except ValueError:
            raise click.ClickException(f"--person must be an integer or 16 hex digits: {person}")
    kind_set = set()
    for name in kinds:
        try:
            kind_set.add(int(EventKind[name.upper()]))
        except KeyError:
            choices = ", ".join(k.name for k in EventKind)
            raise click.ClickException(f"unknown kind {name!r} (one of: {choices})")
    try:
        query = ReportQuery(
            gates=frozenset(gates) or None,
            ts_from=ts_from,
            ts_to=ts_to,
            person=person,
            kinds=frozenset(kind_set) or None,
            sort_key=sort_key,
            descending=desc,
            fmt=fmt,
        )
        document = coordinator.query_report(query)
    except CampusError as exc:
        raise click.ClickException(str(exc))
    sys.stdout.write(document.decode("utf-8"))
    if figures is not None:
        from campus.service.figures import render_figures

        rows = select_events(coordinator.events, query, coordinator.uid_to_pid())
        paths = render_figures(rows, figures)
        for p in paths:
            click.echo(f"wrote {p}", err=True)


@main.group()
def admin():
    """Administrative maintenance on a store."""


@admin.group()
def user():
    """Manage coordinator user accounts."""


@user.command("add")
@_STORE
@_PASSPHRASE
@click.argument("username")
@click.option("--role", default="VIEWER", show_default=True, type=click.Choice([r.name for r in Role], case_sensitive=False))
@click.option("--password", required=True)
def user_add(store, passphrase, username, role, password):
    """Add a user account."""
    coordinator = _open(store, passphrase)
    try:
        account = coordinator.users.add(
            Role.ADMIN, username, password, Role.parse(role), coordinator.clock.now(), coordinator.rng
        )
    except CampusError as exc:
        raise click.ClickException(str(exc))
    coordinator.persist()
    click.echo(f"added {account.username} ({account.role.name})")


@user.command("rm")
@_STORE
@_PASSPHRASE
@click.argument("username")
def user_rm(store, passphrase, username):
    """Remove a user account."""
    coordinator = _open(store, passphrase)
    try:
        coordinator.users.remove(Role.ADMIN, username)
    except CampusError as exc:
        raise click.ClickException(str(exc))
    coordinator.persist()
    click.echo(f"removed {username}")


@user.command("role")
@_STORE
@_PASSPHRASE
@click.argument("username")
@click.argument("role", type=click.Choice([r.name for r in Role], case_sensitive=False))
def user_role(store, passphrase, username, role):
    """Change a user's role."""
    coordinator = _open(store, passphrase)
    try:
        coordinator.users.set_role(Role.ADMIN, username, Role.parse(role))
    except CampusError as exc:
        raise click.ClickException(str(exc))
    coordinator.persist()
    click.echo(f"{username} is now {Role.parse(role).name}")


@main.command()
@_STORE
@_PASSPHRASE
@click.argument("directory", type=click.Path(path_type=Path))
def backup(store, passphrase, directory):
    """Write a timestamped encrypted backup into DIRECTORY."""
    coordinator = _open(store, passphrase)
    path = coordinator.backup(directory)
    click.echo(str(path))


@main.command("import-mobile")
@_STORE
@_PASSPHRASE
@click.argument("logfile", type=click.Path(exists=True, path_type=Path))
def import_mobile(store, passphrase, logfile):
    """Merge a handheld session log (JSON lines) into the store."""
    coordinator = _open(store, passphrase)
    try:
        merged = coordinator.import_mobile_log(Role.OPERATOR, logfile.read_text("utf-8"))
    except CampusError as exc:
        raise click.ClickException(str(exc))
    coordinator.persist()
    click.echo(f"merged {merged} records")


def _is_hex(s: str) -> bool:
    return all(c in "0123456789abcdefABCDEF" for c in s)


if __name__ == "__main__":
    main()
