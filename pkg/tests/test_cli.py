"""Command line: store lifecycle, report parity with the library, figures."""

import json

import pytest
from click.testing import CliRunner

from campus.cli import main
from campus.coordinator.coordinator import Coordinator
from campus.coordinator.reports import ReportQuery
from campus.service.figures import FIGURE_NAMES
from campus.service.scenario import run_scenario

SCENARIO = {
    "name": "cli",
    "seed": 12,
    "start": 1772409600,
    "passphrase": "cli-pw",
    "terminals": [{"address": 1, "gate": 1}],
    "cards": [
        {"id": "kim", "personal_id": 9, "expiry": "2028-01-01", "gates": [1]},
    ],
    "script": [
        {"at": 60, "present": {"terminal": 1, "card": "kim"}},
        {"at": 62, "door": {"terminal": 1, "state": "OPEN"}},
        {"at": 70, "door": {"terminal": 1, "state": "CLOSED"}},
        {"at": 120, "poll": "all"},
    ],
}


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def populated_store(tmp_path):
    store = tmp_path / "campus.cgdb"
    run_scenario(SCENARIO, store_path=store)
    return store


def test_init_creates_store_and_refuses_overwrite(runner, tmp_path):
    store = tmp_path / "new.cgdb"
    args = ["init", "--store", str(store), "--passphrase", "pw", "--admin-password", "adm", "--seed", "1"]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert store.exists()
    restored = Coordinator.restore("pw", store)
    assert restored.users.authenticate("admin", "adm").role.name == "ADMIN"

    result = runner.invoke(main, args)
    assert result.exit_code != 0
    assert "refusing to overwrite" in result.output


def test_missing_store_fails_cleanly(runner, tmp_path):
    result = runner.invoke(main, ["report", "--store", str(tmp_path / "none.cgdb"), "--passphrase", "x"])
    assert result.exit_code != 0
    assert "store not found" in result.output


def test_wrong_passphrase_fails_cleanly(runner, populated_store):
    result = runner.invoke(main, ["report", "--store", str(populated_store), "--passphrase", "nope"])
    assert result.exit_code != 0
    assert "authentication" in result.output


def test_run_prints_transcript_deterministically(runner, tmp_path):
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(SCENARIO))
    a = runner.invoke(main, ["run", str(path)])
    b = runner.invoke(main, ["run", str(path)])
    assert a.exit_code == 0
    assert a.output == b.output
    assert "# scenario name=cli" in a.output
    assert "POLL terminal=all ingested=3" in a.output


def test_run_with_store_requires_a_passphrase(runner, tmp_path):
    bare = {k: v for k, v in SCENARIO.items() if k != "passphrase"}
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(bare))
    store = tmp_path / "day.cgdb"

    result = runner.invoke(main, ["run", str(path), "--store", str(store)], env={})
    assert result.exit_code != 0
    assert "passphrase" in result.output
    assert not store.exists()

    result = runner.invoke(
        main, ["run", str(path), "--store", str(store), "--passphrase", "day-pw"], env={}
    )
    assert result.exit_code == 0, result.output
    restored = Coordinator.restore("day-pw", store)
    assert len(restored.events) == 3


def test_report_matches_library_bytes(runner, populated_store):
    coordinator = Coordinator.restore("cli-pw", populated_store)
    for args, query in [
        ([], ReportQuery()),
        (["--format", "jsonl", "--desc"], ReportQuery(fmt="jsonl", descending=True)),
        (["--gate", "1", "--kind", "access_granted"], ReportQuery(gates=frozenset({1}), kinds=frozenset({1}))),
        (["--person", "9"], ReportQuery(person=9)),
        (["--sort", "kind"], ReportQuery(sort_key="kind")),
    ]:
        result = runner.invoke(
            main, ["report", "--store", str(populated_store), "--passphrase", "cli-pw", *args]
        )
        assert result.exit_code == 0, result.output
        assert result.stdout.encode() == coordinator.query_report(query)


def test_report_passphrase_via_environment(runner, populated_store):
    result = runner.invoke(
        main,
        ["report", "--store", str(populated_store)],
        env={"CAMPUS_PASSPHRASE": "cli-pw"},
    )
    assert result.exit_code == 0
    assert result.output.startswith("seq,terminal,gate,ts,")


def test_report_rejects_bad_flags(runner, populated_store):
    base = ["report", "--store", str(populated_store), "--passphrase", "cli-pw"]
    result = runner.invoke(main, base + ["--from", "100", "--to", "50"])
    assert result.exit_code != 0
    assert "from 100 is after to 50" in result.output
    result = runner.invoke(main, base + ["--kind", "sneezing"])
    assert result.exit_code != 0
    assert "unknown kind" in result.output
    result = runner.invoke(main, base + ["--person", "bob"])
    assert result.exit_code != 0
    result = runner.invoke(main, base + ["--sort", "moon"])
    assert result.exit_code != 0  # click rejects non-choices itself


def test_report_writes_figures(runner, populated_store, tmp_path):
    figdir = tmp_path / "figs"
    result = runner.invoke(
        main,
        ["report", "--store", str(populated_store), "--passphrase", "cli-pw", "--figures", str(figdir)],
    )
    assert result.exit_code == 0, result.output
    written = sorted(p.name for p in figdir.iterdir())
    assert written == sorted(FIGURE_NAMES)
    for p in figdir.iterdir():
        assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_user_verbs_round_trip(runner, populated_store):
    base = ["--store", str(populated_store), "--passphrase", "cli-pw"]
    result = runner.invoke(main, ["admin", "user", "add", *base, "pat", "--password", "pw", "--role", "operator"])
    assert result.exit_code == 0
    assert "added pat (OPERATOR)" in result.output

    result = runner.invoke(main, ["admin", "user", "role", *base, "pat", "ADMIN"])
    assert result.exit_code == 0
    restored = Coordinator.restore("cli-pw", populated_store)
    assert restored.users.get("pat").role.name == "ADMIN"

    result = runner.invoke(main, ["admin", "user", "rm", *base, "pat"])
    assert result.exit_code == 0
    restored = Coordinator.restore("cli-pw", populated_store)
    with pytest.raises(Exception):
        restored.users.get("pat")

    # The bootstrap account is the last admin again; removing it must fail.
    result = runner.invoke(main, ["admin", "user", "rm", *base, "root"])
    assert result.exit_code != 0


def test_backup_verb(runner, populated_store, tmp_path):
    result = runner.invoke(
        main, ["backup", "--store", str(populated_store), "--passphrase", "cli-pw", str(tmp_path / "bk")]
    )
    assert result.exit_code == 0
    emitted = result.output.strip()
    assert emitted.endswith(".cgdb")
    assert Coordinator.restore("cli-pw", emitted).events


def test_import_mobile_verb(runner, populated_store, tmp_path):
    coordinator = Coordinator.restore("cli-pw", populated_store)
    uid = next(iter(coordinator.registry))
    log = tmp_path / "handheld.jsonl"
    log.write_text(
        json.dumps({"session": "h1", "seq": 1, "ts": 1772409700, "uid": f"{uid:016X}", "op": "read"}) + "\n"
    )
    base = ["--store", str(populated_store), "--passphrase", "cli-pw"]
    result = runner.invoke(main, ["import-mobile", *base, str(log)])
    assert result.exit_code == 0
    assert "merged 1 records" in result.output
    # Merged state persisted: a replay now merges zero.
    result = runner.invoke(main, ["import-mobile", *base, str(log)])
    assert "merged 0 records" in result.output
