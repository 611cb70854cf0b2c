"""File formats: one self-describing JSON envelope per value kind, CSV
ingestion for flat tables, and a DOT rendering of schemas.

All output is deterministic: sorted object keys, two-space indent, one
trailing newline.
"""
from __future__ import annotations

import csv
import json

from .database import Database, make_database
from .errors import ParseError
from .schema import Schema, SchemaMorphism, Simplex
from .simple_schema import SimpleSchema, check_record
from .table import Table, make_table
from .typespec import DataTypeDomain, TypeSpec

VERSION = 1


def dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def parse_envelope(text: str, expected_kind: str | None = None) -> dict:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from None
    if not isinstance(payload, dict) or "kind" not in payload:
        raise ParseError("missing envelope kind")
    if payload.get("version") != VERSION:
        raise ParseError(f"unsupported version {payload.get('version')!r}")
    if expected_kind is not None and payload["kind"] != expected_kind:
        raise ParseError(
            f"expected kind {expected_kind!r}, found {payload['kind']!r}"
        )
    return payload


# ---------------------------------------------------------------------------
# typespec


def typespec_to_json(spec: TypeSpec) -> dict:
    types = {}
    for name, dom in spec.types.items():
        entry: dict = {"kind": dom.kind}
        if dom.kind == "enum":
            entry["values"] = list(dom.enum_values)
        types[name] = entry
    return {"kind": "typespec", "version": VERSION, "types": types}


def typespec_from_json(payload: dict) -> TypeSpec:
    types = {}
    for name, entry in payload.get("types", {}).items():
        types[name] = DataTypeDomain(
            entry["kind"], tuple(entry.get("values", ()))
        )
    return TypeSpec(types)


# ---------------------------------------------------------------------------
# schema


def schema_body(x: Schema) -> dict:
    vertices = [
        {"id": sid, "name": x.vertex_data[sid][0], "type": x.vertex_data[sid][1]}
        for sid in sorted(x.simplices)
        if x.dim_of(sid) == 0
    ]
    simplices = [
        {"id": sid, "faces": list(x.simplices[sid].faces)}
        for sid in sorted(x.simplices)
        if x.dim_of(sid) > 0
    ]
    return {"vertices": vertices, "simplices": simplices}


def schema_to_json(x: Schema) -> dict:
    body = schema_body(x)
    body.update(
        {"kind": "schema", "version": VERSION, "typespec": typespec_to_json(x.spec)}
    )
    return body


def schema_from_body(spec: TypeSpec, body: dict) -> Schema:
    simplices: dict[str, Simplex] = {}
    vertex_data = {}
    for v in body.get("vertices", ()):
        simplices[v["id"]] = Simplex(v["id"], 0, ())
        vertex_data[v["id"]] = (v["name"], v["type"])
    dims: dict[str, int] = {sid: 0 for sid in simplices}
    pending = list(body.get("simplices", ()))
    # dimension is inferred: n+1 faces of dimension n-1
    progress = True
    while pending and progress:
        progress = False
        rest = []
        for entry in pending:
            faces = entry["faces"]
            if all(f in dims for f in faces):
                face_dims = {dims[f] for f in faces}
                if len(face_dims) != 1:
                    raise ParseError(f"faces of {entry['id']!r} disagree in dimension")
                dim = face_dims.pop() + 1
                if len(faces) != dim + 1:
                    raise ParseError(f"simplex {entry['id']!r} has a wrong face count")
                simplices[entry["id"]] = Simplex(entry["id"], dim, tuple(faces))
                dims[entry["id"]] = dim
                progress = True
            else:
                rest.append(entry)
        pending = rest
    if pending:
        raise ParseError("schema has dangling or cyclic face references")
    x = Schema(spec, simplices, vertex_data)
    x.validate()
    return x


def schema_from_json(payload: dict, spec: TypeSpec | None = None) -> Schema:
    if spec is None:
        if "typespec" not in payload:
            raise ParseError("schema file carries no typespec")
        spec = typespec_from_json(payload["typespec"])
    return schema_from_body(spec, payload)


# ---------------------------------------------------------------------------
# simple schemas and tables


def columns_to_json(sigma: SimpleSchema) -> list:
    return [{"name": n, "type": t} for n, t in sigma.attributes]


def columns_from_json(spec: TypeSpec, entries) -> SimpleSchema:
    return SimpleSchema(spec, tuple((e["name"], e["type"]) for e in entries))


def table_to_json(t: Table) -> dict:
    return {
        "kind": "table",
        "version": VERSION,
        "typespec": typespec_to_json(t.schema.spec),
        "columns": columns_to_json(t.schema),
        "keys": list(t.keys),
        "rows": {k: list(t.row(k).payloads()) for k in t.keys},
    }


def table_from_json(payload: dict, spec: TypeSpec | None = None) -> Table:
    if spec is None:
        if "typespec" not in payload:
            raise ParseError("table file carries no typespec")
        spec = typespec_from_json(payload["typespec"])
    sigma = columns_from_json(spec, payload["columns"])
    keys = payload.get("keys") or sorted(payload["rows"])
    return Table(
        tuple(keys),
        sigma,
        {k: check_record(sigma, payload["rows"][k]) for k in keys},
    )


def table_from_csv(
    text: str, sigma: SimpleSchema, key_column: str | None = None
) -> Table:
    """CSV with a header row; values parsed against the column types.

    With no key column, keys r0, r1, ... are synthesized in file order.
    """
    from .typespec import parse_value

    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV") from None
    rows: dict[str, list] = {}
    for i, line in enumerate(reader):
        if not line:
            continue
        named = dict(zip(header, line))
        key = named[key_column] if key_column else f"r{i}"
        values = []
        for name, type_name in sigma.attributes:
            if name not in named:
                raise ParseError(f"CSV misses column {name!r}")
            values.append(parse_value(sigma.spec, type_name, named[name]).payload)
        rows[key] = values
    return make_table(sigma, rows)


# ---------------------------------------------------------------------------
# databases


def database_to_json(db: Database) -> dict:
    x = db.schema
    data = {}
    for sid, s in x.simplices.items():
        entry = {
            "keys": list(db.section(sid)),
            "rows": {k: list(db.record(sid, k).payloads()) for k in db.section(sid)},
        }
        if s.dim > 0:
            entry["restrictions"] = {
                str(i): dict(db.keys.restrictions[(sid, i)])
                for i in range(s.dim + 1)
            }
        data[sid] = entry
    body = schema_body(x)
    return {
        "kind": "database",
        "version": VERSION,
        "typespec": typespec_to_json(x.spec),
        "schema": body,
        "data": data,
    }


def database_from_json(payload: dict, spec: TypeSpec | None = None) -> Database:
    if spec is None:
        if "typespec" not in payload:
            raise ParseError("database file carries no typespec")
        spec = typespec_from_json(payload["typespec"])
    x = schema_from_body(spec, payload["schema"])
    sections = {}
    restrictions = {}
    records = {}
    for sid, s in x.simplices.items():
        entry = payload["data"].get(sid)
        if entry is None:
            raise ParseError(f"no data for simplex {sid!r}")
        sections[sid] = tuple(entry["keys"])
        sigma = x.simple_schema_of(sid)
        records[sid] = {
            k: check_record(sigma, entry["rows"][k]) for k in sections[sid]
        }
        for i in range(s.dim + 1 if s.dim else 0):
            rmap = entry.get("restrictions", {}).get(str(i))
            if rmap is None:
                raise ParseError(f"no restriction {i} at {sid!r}")
            restrictions[(sid, i)] = dict(rmap)
    return make_database(x, sections, restrictions, records)


# ---------------------------------------------------------------------------
# schema maps


def schema_map_to_json(f: SchemaMorphism, embed: str) -> dict:
    """embed names which end of the map is carried in the file ("source"
    for pullback maps, "target" for pushforward/extension maps)."""
    other = f.source if embed == "source" else f.target
    return {
        "kind": "schema_map",
        "version": VERSION,
        "embedded": embed,
        "schema": dict(
            schema_body(other), typespec=typespec_to_json(other.spec)
        ),
        "assign": {
            sid: {"target": tid, "alpha": list(alpha)}
            for sid, (tid, alpha) in f.assign.items()
        },
    }


def schema_map_from_json(
    payload: dict, anchor: Schema, strict_order: bool = True
) -> SchemaMorphism:
    """Reconstruct a map between the embedded schema and an anchor schema.

    If the file embeds the source, the anchor is the target, and the other
    way around."""
    spec = typespec_from_json(payload["schema"]["typespec"])
    other = schema_from_body(spec, payload["schema"])
    assign = {
        sid: (entry["target"], tuple(entry["alpha"]))
        for sid, entry in payload["assign"].items()
    }
    if payload.get("embedded") == "source":
        f = SchemaMorphism(other, anchor, assign)
    else:
        f = SchemaMorphism(anchor, other, assign)
    f.validate(strict_order=strict_order)
    return f


# ---------------------------------------------------------------------------
# rendering


def render_schema(x: Schema) -> str:
    """DOT text of the face poset, vertices labeled."""
    lines = ["digraph schema {"]
    for sid in sorted(x.simplices):
        if x.dim_of(sid) == 0:
            name, type_name = x.vertex_data[sid]
            lines.append(f'  "{sid}" [label="{sid}: {name} ({type_name})"];')
        else:
            lines.append(f'  "{sid}" [label="{sid}", shape=box];')
    for sid in sorted(x.simplices):
        s = x.simplices[sid]
        for i, fid in enumerate(s.faces):
            lines.append(f'  "{sid}" -> "{fid}" [label="{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def value_to_json(kind: str, obj) -> dict:
    if kind == "database":
        return database_to_json(obj)
    if kind == "table":
        return table_to_json(obj)
    if kind == "schema":
        return schema_to_json(obj)
    if kind == "typespec":
        return typespec_to_json(obj)
    raise ParseError(f"cannot serialize kind {kind!r}")
