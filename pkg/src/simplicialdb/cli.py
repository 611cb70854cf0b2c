"""Command-line driver.

Every subcommand maps onto one engine operation; no query logic lives
here.  Exit codes: 0 success, 1 input/validation failure, 2 engine error.
"""
from __future__ import annotations

import argparse
import sys

from .database import (
    Database,
    canonicalize_keys,
    db_delete,
    db_insert,
    db_join_on_attribute,
    db_project,
    db_select,
    db_union_all,
    global_table,
    to_relational,
)
from .errors import EngineError, ParseError, UnknownAttribute
from .keysheaf import extend_by_empty, materialize_cylinder, pullback, pushforward_plus
from .oracle import FlatTable, oracle_equijoin
from .schema import (
    closure,
    simplex_schema,
)
from .simple_schema import SimpleSchema
from . import storage


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(out: str | None, text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_spec(args) -> "storage.TypeSpec | None":
    if getattr(args, "typespec", None):
        return storage.typespec_from_json(
            storage.parse_envelope(_read(args.typespec), "typespec")
        )
    return None


def _load_database(path: str, args) -> Database:
    return storage.database_from_json(
        storage.parse_envelope(_read(path), "database"), _load_spec(args)
    )


def _load_table(path: str, args):
    if path.endswith(".csv"):
        spec = _load_spec(args)
        if spec is None or not getattr(args, "columns", None):
            raise ParseError("CSV tables need --typespec and --columns")
        attrs = []
        for part in args.columns.split(","):
            name, _, type_name = part.partition(":")
            attrs.append((name, type_name))
        sigma = SimpleSchema(spec, tuple(attrs))
        return storage.table_from_csv(_read(path), sigma, getattr(args, "key_column", None))
    return storage.table_from_json(
        storage.parse_envelope(_read(path), "table"), _load_spec(args)
    )


def _emit_database(db: Database, args) -> None:
    if getattr(args, "canonical_keys", False):
        db, _ = canonicalize_keys(db)
    _write(args.out, storage.dump_json(storage.database_to_json(db)))


def _emit_table(t, args) -> None:
    _write(args.out, storage.dump_json(storage.table_to_json(t)))


def _subschema(db: Database, at: str):
    ids = [part for part in at.split(",") if part]
    for sid in ids:
        if sid not in db.schema.simplices:
            raise UnknownAttribute(f"no simplex {sid!r}")
    return closure(db.schema, ids)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    payload = storage.parse_envelope(_read(args.file))
    kind = payload["kind"]
    problems: list[str] = []
    if kind == "database":
        problems = storage.database_from_json(payload, _load_spec(args)).validate()
    elif kind == "schema":
        storage.schema_from_json(payload, _load_spec(args))
    elif kind == "table":
        storage.table_from_json(payload, _load_spec(args))
    elif kind == "typespec":
        storage.typespec_from_json(payload)
    else:
        raise ParseError(f"unknown kind {kind!r}")
    for p in problems:
        print(p)
    if problems:
        return 1
    print("ok")
    return 0


def cmd_join(args) -> int:
    db1 = _load_database(args.left, args)
    db2 = _load_database(args.right, args)
    result, _ = db_join_on_attribute(db1, db2, args.on)
    _emit_database(result, args)
    return 0


def cmd_union(args) -> int:
    db1 = _load_database(args.left, args)
    db2 = _load_database(args.right, args)
    _emit_database(to_relational(db_union_all(db1, db2)), args)
    return 0


def cmd_union_all(args) -> int:
    db1 = _load_database(args.left, args)
    db2 = _load_database(args.right, args)
    _emit_database(db_union_all(db1, db2), args)
    return 0


def cmd_insert(args) -> int:
    db = _load_database(args.db, args)
    rows = _load_database(args.rows, args)
    _emit_database(db_insert(db, rows), args)
    return 0


def cmd_select(args) -> int:
    db = _load_database(args.db, args)
    sub = _subschema(db, args.at)
    selection = _load_database(args.selection, args)
    result, _ = db_select(db, sub, selection)
    _emit_database(result, args)
    return 0


def cmd_project(args) -> int:
    db = _load_database(args.db, args)
    _emit_database(db_project(db, _subschema(db, args.at)), args)
    return 0


def cmd_delete(args) -> int:
    db = _load_database(args.db, args)
    sub = _subschema(db, args.at)
    selection = _load_database(args.selection, args)
    _emit_database(db_delete(db, sub, selection), args)
    return 0


def cmd_global_table(args) -> int:
    db = _load_database(args.db, args)
    _emit_table(global_table(db), args)
    return 0


def cmd_to_relational(args) -> int:
    db = _load_database(args.db, args)
    _emit_database(to_relational(db), args)
    return 0


def cmd_pullback(args) -> int:
    db = _load_database(args.db, args)
    payload = storage.parse_envelope(_read(args.map), "schema_map")
    f = storage.schema_map_from_json(payload, db.schema)
    keys, data = pullback(f, db.keys, db.data)
    _emit_database(Database(f.source, keys, data), args)
    return 0


def cmd_pushforward(args) -> int:
    db = _load_database(args.db, args)
    payload = storage.parse_envelope(_read(args.map), "schema_map")
    f = storage.schema_map_from_json(payload, db.schema)
    cyl, _ = pushforward_plus(f, db.keys, db.data)
    keys, data, _ = materialize_cylinder(cyl)
    _emit_database(Database(f.target, keys, data), args)
    return 0


def cmd_extend(args) -> int:
    db = _load_database(args.db, args)
    payload = storage.parse_envelope(_read(args.map), "schema_map")
    f = storage.schema_map_from_json(payload, db.schema)
    keys, data = extend_by_empty(f, db.keys, db.data)
    _emit_database(Database(f.target, keys, data), args)
    return 0


def cmd_show(args) -> int:
    payload = storage.parse_envelope(_read(args.file))
    kind = payload["kind"]
    if kind == "schema":
        x = storage.schema_from_json(payload, _load_spec(args))
    elif kind == "database":
        x = _load_database(args.file, args).schema
    elif kind == "table":
        x = simplex_schema(_load_table(args.file, args).schema)
    else:
        raise ParseError(f"nothing to show for kind {kind!r}")
    _write(args.out, storage.render_schema(x))
    return 0


def cmd_oracle_join(args) -> int:
    t1 = _load_table(args.left, args)
    t2 = _load_table(args.right, args)
    pairs = []
    for part in args.on.split(","):
        a, _, b = part.partition("=")
        pairs.append((a, b or a))
    f1 = FlatTable(t1.schema.attributes, {k: t1.row(k).payloads() for k in t1.keys})
    f2 = FlatTable(t2.schema.attributes, {k: t2.row(k).payloads() for k in t2.keys})
    joined = oracle_equijoin(f1, f2, pairs)
    payload = {
        "kind": "table",
        "version": storage.VERSION,
        "columns": [{"name": n, "type": t} for n, t in joined.columns],
        "keys": sorted(joined.rows),
        "rows": {k: list(joined.rows[k]) for k in sorted(joined.rows)},
    }
    _write(args.out, storage.dump_json(payload))
    return 0


# ---------------------------------------------------------------------------
# scripts


def run_script(payload: dict, args) -> int:
    commands = payload.get("commands", [])
    bindings: dict[str, tuple[str, object]] = {}  # name -> (kind, value)

    def get(name: str, index: int):
        if name not in bindings:
            raise ParseError(f"command {index}: unbound name {name!r}")
        return bindings[name][1]

    for index, cmd in enumerate(commands):
        op = cmd.get("op")
        try:
            if op == "load":
                env = storage.parse_envelope(_read(cmd["path"]))
                if env["kind"] == "database":
                    bindings[cmd["name"]] = (
                        "database",
                        storage.database_from_json(env, _load_spec(args)),
                    )
                elif env["kind"] == "table":
                    bindings[cmd["name"]] = (
                        "table",
                        storage.table_from_json(env, _load_spec(args)),
                    )
                else:
                    raise ParseError(f"command {index}: cannot load {env['kind']!r}")
            elif op == "save":
                kind, value = bindings[cmd["name"]]
                _write(cmd["path"], storage.dump_json(storage.value_to_json(kind, value)))
            elif op == "join":
                result, _ = db_join_on_attribute(
                    get(cmd["left"], index), get(cmd["right"], index), cmd["on"]
                )
                if cmd.get("canonical", True):
                    result, _ = canonicalize_keys(result)
                bindings[cmd["name"]] = ("database", result)
            elif op == "union":
                bindings[cmd["name"]] = (
                    "database",
                    to_relational(
                        db_union_all(get(cmd["left"], index), get(cmd["right"], index))
                    ),
                )
            elif op == "union-all":
                bindings[cmd["name"]] = (
                    "database",
                    db_union_all(get(cmd["left"], index), get(cmd["right"], index)),
                )
            elif op == "insert":
                bindings[cmd["name"]] = (
                    "database",
                    db_insert(get(cmd["db"], index), get(cmd["rows"], index)),
                )
            elif op == "select":
                db = get(cmd["db"], index)
                result, _ = db_select(
                    db, _subschema(db, cmd["at"]), get(cmd["selection"], index)
                )
                bindings[cmd["name"]] = ("database", result)
            elif op == "project":
                db = get(cmd["db"], index)
                bindings[cmd["name"]] = (
                    "database",
                    db_project(db, _subschema(db, cmd["at"])),
                )
            elif op == "delete":
                db = get(cmd["db"], index)
                bindings[cmd["name"]] = (
                    "database",
                    db_delete(db, _subschema(db, cmd["at"]), get(cmd["selection"], index)),
                )
            elif op == "global-table":
                bindings[cmd["name"]] = ("table", global_table(get(cmd["db"], index)))
            elif op == "to-relational":
                bindings[cmd["name"]] = (
                    "database",
                    to_relational(get(cmd["db"], index)),
                )
            elif op == "from-table":
                bindings[cmd["name"]] = ("table_db", None)
            elif op == "pullback" or op == "pushforward" or op == "extend":
                db = get(cmd["db"], index)
                env = storage.parse_envelope(_read(cmd["map"]), "schema_map")
                f = storage.schema_map_from_json(env, db.schema)
                if op == "pullback":
                    keys, data = pullback(f, db.keys, db.data)
                    value = Database(f.source, keys, data)
                elif op == "pushforward":
                    cyl, _ = pushforward_plus(f, db.keys, db.data)
                    keys, data, _ = materialize_cylinder(cyl)
                    value = Database(f.target, keys, data)
                else:
                    keys, data = extend_by_empty(f, db.keys, db.data)
                    value = Database(f.target, keys, data)
                bindings[cmd["name"]] = ("database", value)
            elif op == "show":
                kind, value = bindings[cmd["name"]]
                if kind == "database":
                    sys.stdout.write(storage.render_schema(value.schema))
                elif kind == "table":
                    sys.stdout.write(storage.render_schema(simplex_schema(value.schema)))
            else:
                raise ParseError(f"command {index}: unknown op {op!r}")
        except KeyError as exc:
            print(f"command {index}: missing field or name {exc}", file=sys.stderr)
            return 1
        except ParseError as exc:
            print(f"command {index}: {exc}", file=sys.stderr)
            return 1
        except EngineError as exc:
            print(
                f"command {index} ({op}, {cmd.get('name', '?')}): {exc}",
                file=sys.stderr,
            )
            return 2
    return 0


def cmd_run(args) -> int:
    payload = storage.parse_envelope(_read(args.script), "script")
    return run_script(payload, args)


# ---------------------------------------------------------------------------
# driver


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdb", description="simplicial database engine")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--typespec", help="typespec JSON file")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument(
            "--canonical-keys", action="store_true", help="rename output keys"
        )

    p = sub.add_parser("validate"); common(p); p.add_argument("file")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("join"); common(p)
    p.add_argument("left"); p.add_argument("right")
    p.add_argument("--on", required=True, help="shared vertex attribute")
    p.set_defaults(func=cmd_join)
    p = sub.add_parser("union"); common(p)
    p.add_argument("left"); p.add_argument("right"); p.set_defaults(func=cmd_union)
    p = sub.add_parser("union-all"); common(p)
    p.add_argument("left"); p.add_argument("right"); p.set_defaults(func=cmd_union_all)
    p = sub.add_parser("insert"); common(p)
    p.add_argument("db"); p.add_argument("rows"); p.set_defaults(func=cmd_insert)
    p = sub.add_parser("select"); common(p)
    p.add_argument("db"); p.add_argument("selection")
    p.add_argument("--at", required=True, help="comma-separated simplex ids")
    p.set_defaults(func=cmd_select)
    p = sub.add_parser("project"); common(p)
    p.add_argument("db"); p.add_argument("--at", required=True)
    p.set_defaults(func=cmd_project)
    p = sub.add_parser("delete"); common(p)
    p.add_argument("db"); p.add_argument("selection")
    p.add_argument("--at", required=True); p.set_defaults(func=cmd_delete)
    p = sub.add_parser("global-table"); common(p)
    p.add_argument("db"); p.set_defaults(func=cmd_global_table)
    p = sub.add_parser("to-relational"); common(p)
    p.add_argument("db"); p.set_defaults(func=cmd_to_relational)
    p = sub.add_parser("pullback"); common(p)
    p.add_argument("db"); p.add_argument("map"); p.set_defaults(func=cmd_pullback)
    p = sub.add_parser("pushforward"); common(p)
    p.add_argument("db"); p.add_argument("map"); p.set_defaults(func=cmd_pushforward)
    p = sub.add_parser("extend"); common(p)
    p.add_argument("db"); p.add_argument("map"); p.set_defaults(func=cmd_extend)
    p = sub.add_parser("show"); common(p)
    p.add_argument("file")
    p.add_argument("--columns", help="CSV columns as name:Type,...")
    p.add_argument("--key-column")
    p.set_defaults(func=cmd_show)
    p = sub.add_parser("run"); common(p)
    p.add_argument("script"); p.set_defaults(func=cmd_run)
    p = sub.add_parser("oracle-join"); common(p)
    p.add_argument("left"); p.add_argument("right")
    p.add_argument("--on", required=True, help="colA=colB,... pairs")
    p.add_argument("--columns", help="CSV columns as name:Type,...")
    p.add_argument("--key-column")
    p.set_defaults(func=cmd_oracle_join)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
