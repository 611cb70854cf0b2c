import json
import pathlib
import shutil
import subprocess
import sys

import pytest

from simplicialdb import storage
from simplicialdb.errors import ParseError
from simplicialdb.simple_schema import SimpleSchema

from conftest import std_spec

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def run_cli(args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "simplicialdb.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def test_database_round_trip_byte_identical():
    for name in ("marx_people.json", "marx_titles.json"):
        text = (FIXTURES / name).read_text()
        db = storage.database_from_json(storage.parse_envelope(text, "database"))
        once = storage.dump_json(storage.database_to_json(db))
        db2 = storage.database_from_json(storage.parse_envelope(once, "database"))
        assert storage.dump_json(storage.database_to_json(db2)) == once


def test_schema_and_typespec_round_trip():
    text = (FIXTURES / "marx_schema.json").read_text()
    x = storage.schema_from_json(storage.parse_envelope(text, "schema"))
    assert storage.dump_json(storage.schema_to_json(x)) == text
    spec_text = (FIXTURES / "typespec.json").read_text()
    spec = storage.typespec_from_json(storage.parse_envelope(spec_text, "typespec"))
    assert storage.dump_json(storage.typespec_to_json(spec)) == spec_text


def test_envelope_errors():
    with pytest.raises(ParseError):
        storage.parse_envelope("not json")
    with pytest.raises(ParseError):
        storage.parse_envelope('{"kind": "table", "version": 99}')
    with pytest.raises(ParseError):
        storage.parse_envelope('{"kind": "table", "version": 1}', "database")


def test_table_from_csv():
    sigma = SimpleSchema(std_spec(), (("Name", "Str"), ("Age", "Int")))
    t = storage.table_from_csv("Name,Age\nAda,36\nAlan,41\n", sigma)
    assert t.keys == ("r0", "r1")
    assert t.row("r1").payloads() == ("Alan", 41)
    t2 = storage.table_from_csv("Name,Age\nAda,36\n", sigma, key_column="Name")
    assert t2.keys == ("Ada",)
    with pytest.raises(ParseError):
        storage.table_from_csv("", sigma)


def test_cli_validate_ok():
    out = run_cli(["validate", str(FIXTURES / "marx_people.json")])
    assert out.returncode == 0
    assert out.stdout.strip() == "ok"


def test_cli_parse_error_is_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    out = run_cli(["validate", str(bad)])
    assert out.returncode == 1


def test_cli_engine_error_is_exit_2(tmp_path):
    # joining on an attribute that does not exist is an engine error
    out = run_cli(
        [
            "join",
            str(FIXTURES / "marx_people.json"),
            str(FIXTURES / "marx_titles.json"),
            "--on",
            "Nope",
        ]
    )
    assert out.returncode == 2


def test_cli_join_deterministic(tmp_path):
    args = [
        "join",
        str(FIXTURES / "marx_people.json"),
        str(FIXTURES / "marx_titles.json"),
        "--on",
        "Lastname",
        "--canonical-keys",
    ]
    a = run_cli(args)
    b = run_cli(args)
    assert a.returncode == 0
    assert a.stdout == b.stdout
    assert a.stdout.endswith("\n")
    payload = json.loads(a.stdout)
    assert payload["kind"] == "database" and payload["version"] == 1


def test_cli_run_script_reproduces_golden(tmp_path):
    for f in FIXTURES.glob("*.json"):
        shutil.copy(f, tmp_path / f.name)
    out = run_cli(["run", "marx_join_script.json"], cwd=tmp_path)
    assert out.returncode == 0, out.stderr
    produced = (tmp_path / "marx_join_out.json").read_text()
    assert produced == (FIXTURES / "marx_join_golden.json").read_text()


def test_cli_run_unbound_name_is_exit_1(tmp_path):
    script = {
        "kind": "script",
        "version": 1,
        "commands": [
            {"op": "global-table", "name": "t", "db": "missing"},
        ],
    }
    p = tmp_path / "s.json"
    p.write_text(json.dumps(script))
    out = run_cli(["run", str(p)])
    assert out.returncode == 1
    assert "command 0" in out.stderr


def test_cli_show_renders_dot():
    out = run_cli(["show", str(FIXTURES / "marx_schema.json")])
    assert out.returncode == 0
    assert out.stdout.startswith("digraph schema {")
