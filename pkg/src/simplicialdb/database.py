"""Databases, their morphisms, and the query operations.

A database is a schema with a key sheaf and a data map.  Joins and
selections are finite limits computed through pushforward cylinders over
a schema colimit; unions and inserts are colimits at fixed schema;
deletion removes the closure of a selected subsheaf.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

from .errors import (
    InitialNotMaterializable,
    SchemaMismatch,
    TooLarge,
    UnsupportedColimit,
)
from .keysheaf import (
    CylinderSheaf,
    DataMap,
    KeySheaf,
    family_key,
    image_data,
    materialize_cylinder,
    pushforward_plus,
    sheaf_limit,
    validate_sheaf_and_data,
)
from .schema import (
    Schema,
    SchemaMorphism,
    Simplex,
    Subschema,
    closure,
    full_subschema,
    identity_alpha,
    identity_schema_morphism,
    preimage_subschema,
    schema_colimit,
    simplex_schema,
    subschema_as_schema,
    top_simplex_id,
    vertex_classifier,
)
from .simple_schema import RecordTuple, SimpleSchema
from .table import Table
from .typespec import TypeSpec, Value, render_value


@dataclass
class Database:
    schema: Schema
    keys: KeySheaf
    data: DataMap

    def validate(self) -> list[str]:
        try:
            self.schema.validate()
        except Exception as exc:  # collect rather than raise, report style
            return [str(exc)]
        return validate_sheaf_and_data(self.keys, self.data)

    def section(self, sid: str) -> tuple[str, ...]:
        return self.keys.sections[sid]

    def record(self, sid: str, key: str) -> RecordTuple:
        return self.data.record(sid, key)


def make_database(
    schema: Schema,
    sections: dict[str, tuple[str, ...]],
    restrictions: dict[tuple[str, int], dict[str, str]],
    records: dict[str, dict[str, RecordTuple]],
) -> Database:
    keys = KeySheaf(schema, sections, restrictions)
    return Database(schema, keys, DataMap(keys, records))


def empty_database(schema: Schema) -> Database:
    sections = {sid: () for sid in schema.simplices}
    restrictions = {}
    for sid, s in schema.simplices.items():
        for i in range(s.dim + 1 if s.dim else 0):
            restrictions[(sid, i)] = {}
    return make_database(schema, sections, restrictions,
                         {sid: {} for sid in schema.simplices})


@dataclass
class DbMorphism:
    source: Database  # on X
    target: Database  # on Y
    f: SchemaMorphism  # Y -> X, contravariant on schemas
    f_sharp: dict[str, dict[str, str]]  # per simplex of Y: f*-section key -> key
    integrity: bool = True


def validate_db_morphism(m: DbMorphism) -> list[str]:
    problems = []
    if m.f.source is not m.target.schema and m.f.source != m.target.schema:
        problems.append("schema map must start at the target's schema")
        return problems
    if m.f.target is not m.source.schema and m.f.target != m.source.schema:
        problems.append("schema map must land in the source's schema")
        return problems
    y = m.target.schema
    kx = m.source.keys
    for sid, s in y.simplices.items():
        tid, alpha = m.f.assign[sid]
        fmap = m.f_sharp.get(sid)
        if fmap is None:
            problems.append(f"no f_sharp at {sid!r}")
            continue
        for k in kx.sections[tid]:
            if k not in fmap:
                problems.append(f"f_sharp at {sid!r} misses {k!r}")
                continue
            if fmap[k] not in m.target.keys.sections[sid]:
                problems.append(f"f_sharp at {sid!r} sends {k!r} outside")
        # naturality with restrictions
        for i in range(s.dim + 1 if s.dim else 0):
            fid = s.faces[i]
            shrunk = alpha[:i] + alpha[i + 1 :]
            kept = sorted(set(shrunk))
            for k in kx.sections[tid]:
                if k not in fmap or fmap[k] not in m.target.keys.sections[sid]:
                    continue
                down = kx.iterated_restrict(tid, k, kept)[1]
                left = m.f_sharp.get(fid, {}).get(down)
                right = m.target.keys.restrict(sid, i, fmap[k])
                if left != right:
                    problems.append(
                        f"f_sharp not natural at {sid!r}, key {k!r}, face {i}"
                    )
        if m.integrity:
            for k in kx.sections[tid]:
                if k not in fmap or fmap[k] not in m.target.keys.sections[sid]:
                    continue
                pulled = tuple(
                    m.source.record(tid, k).payloads()[a] for a in alpha
                )
                got = m.target.record(sid, fmap[k]).payloads()
                if pulled != got:
                    problems.append(
                        f"integrity fails at {sid!r}, key {k!r}"
                    )
    return problems


def identity_db_morphism(db: Database) -> DbMorphism:
    f_sharp = {sid: {k: k for k in db.section(sid)} for sid in db.schema.simplices}
    return DbMorphism(db, db, identity_schema_morphism(db.schema), f_sharp)


def compose_db_morphisms(g: DbMorphism, f: DbMorphism) -> DbMorphism:
    """g after f (f: A->B, g: B->C)."""
    from .schema import compose_schema_morphisms

    schema_map = compose_schema_morphisms(f.f, g.f)
    f_sharp = {}
    for sid in g.target.schema.simplices:
        mid_tid = g.f.assign[sid][0]
        f_sharp[sid] = {
            k: g.f_sharp[sid][f.f_sharp[mid_tid][k]]
            for k in f.source.keys.sections[schema_map.assign[sid][0]]
        }
    return DbMorphism(
        f.source, g.target, schema_map, f_sharp,
        f.integrity and g.integrity,
    )


# ---------------------------------------------------------------------------
# limits


def db_limit(
    objects: dict[str, Database],
    arrows: list[tuple[str, str, DbMorphism]],
) -> tuple[Database, dict[str, DbMorphism]]:
    """Finite limit in DB.

    The schema is the colimit of the (reversed) schema diagram; the key
    sheaf is the limit of the pushforward cylinders of the objects along
    the colimit legs, materialized.
    """
    schema_objects = {tag: db.schema for tag, db in objects.items()}
    schema_arrows = [(b, a, m.f) for a, b, m in arrows]
    l_schema, legs = schema_colimit(schema_objects, schema_arrows)

    cylinders: dict[str, CylinderSheaf] = {}
    fams: dict[str, dict] = {}
    for tag, db in objects.items():
        cylinders[tag], fams[tag] = pushforward_plus(
            legs[tag], db.keys, db.data
        )

    preimages: dict[str, dict[str, Subschema]] = {
        tag: {
            sid: preimage_subschema(legs[tag], closure(l_schema, [sid]))
            for sid in l_schema.simplices
        }
        for tag in objects
    }

    cyl_arrows = []
    for a, b, m in arrows:
        rowmap: dict[str, dict[str, str]] = {}
        for sid in l_schema.simplices:
            sub_b = preimages[b][sid]
            rowmap[sid] = {}
            for serial, assign in fams[a][sid].items():
                mapped = {}
                ok = True
                for ysid in sub_b.members:
                    tid = m.f.assign[ysid][0]
                    src_key = assign.get(tid)
                    if src_key is None:
                        ok = False
                        break
                    mapped[ysid] = m.f_sharp[ysid][src_key]
                rowmap[sid][serial] = (
                    family_key(sub_b, mapped) if ok else "<none>"
                )
        cyl_arrows.append((a, b, rowmap))

    limit_cyl, proj = sheaf_limit(cylinders, cyl_arrows)
    k_l, tau_l, provenance = materialize_cylinder(limit_cyl)
    result = Database(l_schema, k_l, tau_l)

    out_legs: dict[str, DbMorphism] = {}
    for tag, db in objects.items():
        f_sharp = {}
        for sid in db.schema.simplices:
            tid = legs[tag].assign[sid][0]
            f_sharp[sid] = {
                matkey: fams[tag][tid][proj[tag][tid][provenance[tid][matkey]]][sid]
                for matkey in k_l.sections[tid]
            }
        out_legs[tag] = DbMorphism(result, db, legs[tag], f_sharp)
    return result, out_legs


def record_key(r: RecordTuple) -> str:
    return json.dumps([v.payload for v in r.values], separators=(",", ":"))


def span_middle(schema: Schema, dbs: list[Database]) -> Database:
    """Finite relational stand-in for the final database on a schema: all
    records occurring in the given databases, keyed by serialized record,
    closed under projection."""
    records: dict[str, dict[str, RecordTuple]] = {
        sid: {} for sid in schema.simplices
    }
    for db in dbs:
        for sid in schema.simplices:
            for k in db.section(sid):
                r = db.record(sid, k)
                records[sid][record_key(r)] = r
    # close downward, highest dimension first
    order = sorted(schema.simplices, key=lambda sid: -schema.dim_of(sid))
    for sid in order:
        s = schema.simplices[sid]
        for i in range(s.dim + 1 if s.dim else 0):
            fid = s.faces[i]
            for r in records[sid].values():
                sub = RecordTuple(
                    schema.simple_schema_of(fid),
                    r.values[:i] + r.values[i + 1 :],
                )
                records[fid].setdefault(record_key(sub), sub)
    restrictions = {}
    for sid, s in schema.simplices.items():
        for i in range(s.dim + 1 if s.dim else 0):
            fid = s.faces[i]
            rmap = {}
            for k, r in records[sid].items():
                sub = RecordTuple(
                    schema.simple_schema_of(fid),
                    r.values[:i] + r.values[i + 1 :],
                )
                rmap[k] = record_key(sub)
            restrictions[(sid, i)] = rmap
    sections = {sid: tuple(sorted(records[sid])) for sid in schema.simplices}
    return make_database(schema, sections, restrictions, records)


def morphism_to_middle(db: Database, middle: Database, f: SchemaMorphism) -> DbMorphism:
    """The record-taking morphism db -> middle along f (middle's schema is
    f's source); forced by integrity."""
    f_sharp = {}
    for sid in middle.schema.simplices:
        tid, alpha = f.assign[sid]
        f_sharp[sid] = {
            k: record_key(
                RecordTuple(
                    middle.schema.simple_schema_of(sid),
                    tuple(db.record(tid, k).values[a] for a in alpha),
                )
            )
            for k in db.section(tid)
        }
    return DbMorphism(db, middle, f, f_sharp)


def db_select(
    db: Database, s: Subschema, selection: Database
) -> tuple[Database, dict[str, DbMorphism]]:
    """Rows of db whose restriction to the subschema matches the selection.

    Computed as the fiber product over the final database on the
    subschema, represented by a finite relational stand-in.
    """
    if not is_relational(selection):
        raise SchemaMismatch("selection must be relational")
    sub_schema, inc = subschema_as_schema(s)
    if selection.schema != sub_schema:
        raise SchemaMismatch("selection must live on the subschema")
    projected = db_project(db, s)
    middle = span_middle(sub_schema, [projected, selection])
    m1 = morphism_to_middle(db, middle, inc)
    m2 = morphism_to_middle(selection, middle, identity_schema_morphism(sub_schema))
    return db_limit(
        {"1": db, "2": middle, "3": selection},
        [("1", "2", m1), ("3", "2", m2)],
    )


def _rebased_vertex_db(shared: Schema, keys, records) -> Database:
    sigma = shared.simple_schema_of("p")
    return make_database(
        shared,
        {"p": tuple(keys)},
        {},
        {"p": {k: RecordTuple(sigma, r.values) for k, r in records.items()}},
    )


def db_join_on_attribute(
    db1: Database, db2: Database, attr: str
) -> tuple[Database, dict[str, DbMorphism]]:
    """Join two databases over the vertex named attr in each schema.

    The cospan runs through the finite relational stand-in of the final
    database on the shared one-vertex schema.
    """
    from .errors import UnknownAttribute

    def vertex_of(db):
        hits = [
            sid
            for sid in db.schema.vertex_ids()
            if db.schema.vertex_data[sid][0] == attr
        ]
        if len(hits) != 1:
            raise UnknownAttribute(
                f"attribute {attr!r} must name exactly one vertex, found {len(hits)}"
            )
        return hits[0]

    v1, v2 = vertex_of(db1), vertex_of(db2)
    name, type_name = db1.schema.vertex_data[v1]
    if db2.schema.vertex_data[v2][1] != type_name:
        raise SchemaMismatch(f"shared vertex {attr!r} differs in type")
    shared = Schema(
        db1.schema.spec, {"p": Simplex("p", 0, ())}, {"p": (name, type_name)}
    )
    f1 = SchemaMorphism(shared, db1.schema, {"p": (v1, (0,))})
    f2 = SchemaMorphism(shared, db2.schema, {"p": (v2, (0,))})
    middle_sources = []
    for db, v in ((db1, v1), (db2, v2)):
        records = {k: db.record(v, k) for k in db.section(v)}
        middle_sources.append(_rebased_vertex_db(shared, db.section(v), records))
    middle = span_middle(shared, middle_sources)
    m1 = morphism_to_middle(db1, middle, f1)
    m2 = morphism_to_middle(db2, middle, f2)
    return db_limit(
        {"1": db1, "2": middle, "3": db2}, [("1", "2", m1), ("3", "2", m2)]
    )


def db_product_with_final(db: Database) -> tuple[Database, dict[str, DbMorphism]]:
    """Product with the final database on the same schema, via the cospan
    over its finite stand-in."""
    s = full_subschema(db.schema)
    sub_schema, inc = subschema_as_schema(s)
    middle = span_middle(sub_schema, [db_project(db, s)])
    m1 = morphism_to_middle(db, middle, inc)
    m2 = identity_db_morphism(middle)
    return db_limit(
        {"1": db, "2": middle, "3": middle},
        [("1", "2", m1), ("3", "2", m2)],
    )


def db_project(db: Database, s: Subschema) -> Database:
    sub_schema, _ = subschema_as_schema(s)
    sections = {sid: db.section(sid) for sid in s.members}
    restrictions = {
        (sid, i): dict(rmap)
        for (sid, i), rmap in db.keys.restrictions.items()
        if sid in s.members
    }
    records = {
        sid: {k: db.record(sid, k) for k in db.section(sid)} for sid in s.members
    }
    return make_database(sub_schema, sections, restrictions, records)


def selected_keys(
    db: Database, s: Subschema, selection: Database
) -> dict[str, set]:
    """The selected subsheaf, supported on the subschema: for each member
    simplex, the db keys hit by the fiber-product select."""
    _, legs = db_select(db, s, selection)
    leg = legs["1"]
    hit: dict[str, set] = {sid: set() for sid in db.schema.simplices}
    for sid in s.members:
        hit[sid] = set(leg.f_sharp[sid].values())
    return hit


def db_delete(db: Database, s: Subschema, selection: Database) -> Database:
    """Remove the closure of the selected subsheaf.

    A key dies when any of its nonempty iterated-face restrictions
    (itself included) is selected.
    """
    hit = selected_keys(db, s, selection)

    def doomed(sid: str, key: str) -> bool:
        dim = db.schema.dim_of(sid)
        for size in range(1, dim + 2):
            for positions in combinations(range(dim + 1), size):
                fsid, fkey = db.keys.iterated_restrict(sid, key, positions)
                if fkey in hit[fsid]:
                    return True
        return False

    sections = {
        sid: tuple(k for k in db.section(sid) if not doomed(sid, k))
        for sid in db.schema.simplices
    }
    kept = {sid: set(keys) for sid, keys in sections.items()}
    restrictions = {
        (sid, i): {k: v for k, v in rmap.items() if k in kept[sid]}
        for (sid, i), rmap in db.keys.restrictions.items()
    }
    records = {
        sid: {k: db.record(sid, k) for k in sections[sid]}
        for sid in db.schema.simplices
    }
    return make_database(db.schema, sections, restrictions, records)


# ---------------------------------------------------------------------------
# colimits at fixed schema


def _is_identity_schema_map(f: SchemaMorphism) -> bool:
    if set(f.source.simplices) != set(f.target.simplices):
        return False
    return all(
        f.assign[sid] == (sid, identity_alpha(f.source.dim_of(sid)))
        for sid in f.source.simplices
    )


def db_colimit_fixed_schema(
    objects: dict[str, Database],
    arrows: list[tuple[str, str, DbMorphism]],
) -> tuple[Database, dict[str, DbMorphism]]:
    """Colimit of databases sharing one schema: tagged disjoint union of
    key sets, quotiented by the arrows."""
    tags = sorted(objects)
    x = objects[tags[0]].schema
    for tag in tags:
        if objects[tag].schema != x:
            raise UnsupportedColimit("colimit requires a single fixed schema")
    for _, _, m in arrows:
        if not _is_identity_schema_map(m.f):
            raise UnsupportedColimit(
                "colimits are only supported over identity schema maps"
            )

    parent: dict[tuple[str, str, str], tuple[str, str, str]] = {}
    for tag in tags:
        for sid in x.simplices:
            for k in objects[tag].section(sid):
                parent[(sid, tag, k)] = (sid, tag, k)

    def find(n):
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    for a, b, m in arrows:
        for sid in x.simplices:
            for k in objects[a].section(sid):
                ra, rb = find((sid, a, k)), find((sid, b, m.f_sharp[sid][k]))
                if ra != rb:
                    parent[rb] = ra

    classes: dict[tuple, list[tuple]] = {}
    for n in parent:
        classes.setdefault(find(n), []).append(n)
    name_of = {
        rep: min(f"{tag}:{k}" for _, tag, k in members)
        for rep, members in classes.items()
    }

    sections = {}
    records = {}
    for sid in x.simplices:
        names = sorted(
            {name_of[find((sid, tag, k))]
             for tag in tags for k in objects[tag].section(sid)}
        )
        sections[sid] = tuple(names)
        rows = {}
        for tag in tags:
            for k in objects[tag].section(sid):
                rows[name_of[find((sid, tag, k))]] = objects[tag].record(sid, k)
        records[sid] = rows
    restrictions = {}
    for sid, s in x.simplices.items():
        for i in range(s.dim + 1 if s.dim else 0):
            rmap = {}
            for tag in tags:
                for k in objects[tag].section(sid):
                    down = objects[tag].keys.restrict(sid, i, k)
                    rmap[name_of[find((sid, tag, k))]] = name_of[
                        find((s.faces[i], tag, down))
                    ]
            restrictions[(sid, i)] = rmap
    result = make_database(x, sections, restrictions, records)

    legs = {}
    for tag in tags:
        f_sharp = {
            sid: {
                k: name_of[find((sid, tag, k))]
                for k in objects[tag].section(sid)
            }
            for sid in x.simplices
        }
        legs[tag] = DbMorphism(
            objects[tag], result, identity_schema_morphism(x), f_sharp
        )
    return result, legs


def db_union_all(db1: Database, db2: Database) -> Database:
    result, _ = db_colimit_fixed_schema({"1": db1, "2": db2}, [])
    return result


def db_union(
    db1: Database, db2: Database, m1: DbMorphism, m2: DbMorphism
) -> Database:
    """Pushout over a shared overlap database (m1, m2 out of the overlap)."""
    result, _ = db_colimit_fixed_schema(
        {"0": m1.source, "1": db1, "2": db2},
        [("0", "1", m1), ("0", "2", m2)],
    )
    return result


def db_insert(db: Database, rows: Database) -> Database:
    """Insert rows (a database on the same schema) via the coproduct."""
    return db_union_all(db, rows)


# ---------------------------------------------------------------------------
# the relational adjunction


def to_relational(db: Database) -> Database:
    keys, data = image_data(db.keys, db.data)
    return Database(db.schema, keys, data)


def is_relational(db: Database) -> bool:
    for sid in db.schema.simplices:
        seen = {db.record(sid, k).payloads() for k in db.section(sid)}
        if len(seen) != len(db.section(sid)):
            return False
    return True


def relational_unit(db: Database) -> DbMorphism:
    """The unit db -> to_relational(db): each key to its representative."""
    target = to_relational(db)
    f_sharp = {}
    for sid in db.schema.simplices:
        rep = {}
        for k in target.section(sid):
            rep[target.record(sid, k).payloads()] = k
        f_sharp[sid] = {
            k: rep[db.record(sid, k).payloads()] for k in db.section(sid)
        }
    return DbMorphism(db, target, identity_schema_morphism(db.schema), f_sharp)


# ---------------------------------------------------------------------------
# tables and databases


def _positions_of(sid: str) -> tuple[int, ...]:
    return tuple(int(p) for p in sid[1:].split("_"))


def from_table(t: Table) -> Database:
    """The constant key sheaf on the simplex of the table's columns."""
    spec = t.schema.spec
    if len(t.schema) == 0:
        return empty_database(Schema(spec, {}, {}))
    delta = simplex_schema(t.schema)
    sections = {sid: t.keys for sid in delta.simplices}
    restrictions = {}
    records = {}
    for sid, s in delta.simplices.items():
        positions = _positions_of(sid)
        sigma = delta.simple_schema_of(sid)
        records[sid] = {
            k: RecordTuple(sigma, tuple(t.row(k).values[p] for p in positions))
            for k in t.keys
        }
        for i in range(s.dim + 1 if s.dim else 0):
            restrictions[(sid, i)] = {k: k for k in t.keys}
    return make_database(delta, sections, restrictions, records)


def global_table(db: Database) -> Table:
    """The one big table over all vertices: matching families with their
    induced records."""
    x = db.schema
    if not x.simplices:
        sigma = SimpleSchema(x.spec, ())
        return Table(("()",), sigma, {"()": RecordTuple(sigma, ())})
    sigma, delta, cls = vertex_classifier(x)
    cyl, _ = pushforward_plus(cls, db.keys, db.data)
    top = top_simplex_id(delta)
    from .keysheaf import materialize_rows

    keys, records = materialize_rows(cyl, top)
    table_schema = delta.simple_schema_of(top)
    return Table(keys, table_schema, records)


def global_counit(db: Database) -> DbMorphism:
    """The counit from_table(global_table(db)) -> db: a family to its
    component at each simplex."""
    x = db.schema
    sigma, delta, cls = vertex_classifier(x)
    cyl, fams = pushforward_plus(cls, db.keys, db.data)
    gt = global_table(db)
    source = from_table(gt)
    top = top_simplex_id(delta)
    f_sharp = {}
    for sid in x.simplices:
        tid = cls.assign[sid][0]
        f_sharp[sid] = {}
        for key in source.section(tid):
            f_sharp[sid][key] = fams[top][key][sid]
    return DbMorphism(source, db, cls, f_sharp)


# ---------------------------------------------------------------------------
# views


def view_extract(db: Database, s: Subschema) -> Database:
    return db_project(db, s)


def view_commit_insert(db: Database, s: Subschema, inserted: Database) -> Database:
    """Insert rows expressed on the view, via the pushout of
    i_! i* K <- both -> (K, i_!(i*K + L))."""
    from .keysheaf import extend_by_empty

    sub_schema, inc = subschema_as_schema(s)
    view = db_project(db, s)
    if inserted.schema != sub_schema:
        raise SchemaMismatch("inserted rows must live on the view's schema")
    both, both_legs = db_colimit_fixed_schema(
        {"1": view, "2": inserted}, []
    )
    ek, ed = extend_by_empty(inc, view.keys, view.data)
    e_view = Database(db.schema, ek, ed)
    bk, bd = extend_by_empty(inc, both.keys, both.data)
    e_both = Database(db.schema, bk, bd)

    counit_sharp = {}
    incl_sharp = {}
    for sid in db.schema.simplices:
        if sid in s.members:
            counit_sharp[sid] = {k: k for k in view.section(sid)}
            incl_sharp[sid] = {
                k: both_legs["1"].f_sharp[sid][k] for k in view.section(sid)
            }
        else:
            counit_sharp[sid] = {}
            incl_sharp[sid] = {}
    ident = identity_schema_morphism(db.schema)
    m_counit = DbMorphism(e_view, db, ident, counit_sharp)
    m_incl = DbMorphism(e_view, e_both, ident, incl_sharp)
    result, _ = db_colimit_fixed_schema(
        {"0": e_view, "1": db, "2": e_both},
        [("0", "1", m_counit), ("0", "2", m_incl)],
    )
    return result


def view_commit_delete(db: Database, s: Subschema, selection: Database) -> Database:
    """Delete through the view: the limit of K -> i_+ i* K <- i_+(kept),
    read off elementwise since both legs into the middle are canonical."""
    sub_schema, inc = subschema_as_schema(s)
    view = db_project(db, s)
    remaining = db_delete(view, full_subschema(sub_schema), selection)
    _, mid_fams = pushforward_plus(inc, view.keys, view.data)
    right_cyl, _ = pushforward_plus(inc, remaining.keys, remaining.data)

    x = db.schema
    kept: dict[str, set] = {}
    for sid in x.simplices:
        p = preimage_subschema(inc, closure(x, [sid]))
        keep = set()
        for k in db.section(sid):
            assign = {}
            ok = True
            for ysid in p.members:
                dim = x.dim_of(sid)
                found = None
                for size in range(1, dim + 2):
                    for positions in combinations(range(dim + 1), size):
                        fsid, fkey = db.keys.iterated_restrict(sid, k, positions)
                        if fsid == ysid:
                            if found is not None and found != fkey:
                                ok = False
                            found = fkey
                if not ok:
                    break
                assign[ysid] = found
            if not ok:
                continue
            serial = family_key(p, assign)
            if serial in right_cyl.rows[sid]:
                keep.add(k)
        kept[sid] = keep

    sections = {
        sid: tuple(k for k in db.section(sid) if k in kept[sid])
        for sid in x.simplices
    }
    restrictions = {
        (sid, i): {k: v for k, v in rmap.items() if k in kept[sid]}
        for (sid, i), rmap in db.keys.restrictions.items()
    }
    records = {
        sid: {k: db.record(sid, k) for k in sections[sid]}
        for sid in x.simplices
    }
    return make_database(x, sections, restrictions, records)


# ---------------------------------------------------------------------------
# canonical keys and isomorphism


def canonicalize_keys(db: Database) -> tuple[Database, dict[str, dict[str, str]]]:
    """Rename keys to k0, k1, ... per simplex (sorted by serialized form);
    returns the renamed database and a provenance map new -> old."""
    rename: dict[str, dict[str, str]] = {}
    provenance: dict[str, dict[str, str]] = {}
    for sid in db.schema.simplices:
        rename[sid] = {}
        provenance[sid] = {}
        for i, k in enumerate(sorted(db.section(sid))):
            rename[sid][k] = f"k{i}"
            provenance[sid][f"k{i}"] = k
    sections = {
        sid: tuple(sorted(rename[sid].values(), key=lambda n: int(n[1:])))
        for sid in db.schema.simplices
    }
    restrictions = {
        (sid, i): {
            rename[sid][k]: rename[db.schema.simplices[sid].faces[i]][v]
            for k, v in rmap.items()
        }
        for (sid, i), rmap in db.keys.restrictions.items()
    }
    records = {
        sid: {rename[sid][k]: db.record(sid, k) for k in db.section(sid)}
        for sid in db.schema.simplices
    }
    return (
        make_database(db.schema, sections, restrictions, records),
        provenance,
    )


def _schema_iso_candidates(x: Schema, y: Schema):
    """Backtracking search for simplex bijections preserving dimension,
    ordered faces, and vertex labels."""
    xs = sorted(x.simplices, key=lambda sid: (x.dim_of(sid), sid))
    if len(xs) != len(y.simplices):
        return
    by_dim: dict[int, list[str]] = {}
    for sid in y.simplices:
        by_dim.setdefault(y.dim_of(sid), []).append(sid)

    def rec(i: int, assign: dict[str, str], used: set):
        if i == len(xs):
            yield dict(assign)
            return
        sid = xs[i]
        s = x.simplices[sid]
        for cand in by_dim.get(s.dim, ()):
            if cand in used:
                continue
            if s.dim == 0:
                if x.vertex_data[sid] != y.vertex_data[cand]:
                    continue
            else:
                if tuple(assign[f] for f in s.faces) != y.simplices[cand].faces:
                    continue
            assign[sid] = cand
            used.add(cand)
            yield from rec(i + 1, assign, used)
            used.discard(cand)
            del assign[sid]

    yield from rec(0, {}, set())


def is_isomorphic(db1: Database, db2: Database, cap: int = 10**6) -> bool:
    """Database isomorphism: a schema isomorphism plus per-simplex key
    bijections commuting with restrictions and the data."""
    steps = [0]

    def key_bijections(sigma_iso: dict[str, str]) -> bool:
        x = db1.schema
        order = sorted(x.simplices, key=lambda sid: (x.dim_of(sid), sid))
        beta: dict[str, dict[str, str]] = {}

        def fits(sid: str, mapping: dict[str, str]) -> bool:
            s = x.simplices[sid]
            tid = sigma_iso[sid]
            for k, k2 in mapping.items():
                if db1.record(sid, k).payloads() != db2.record(tid, k2).payloads():
                    return False
                for i in range(s.dim + 1 if s.dim else 0):
                    fid = s.faces[i]
                    if fid in beta:
                        if beta[fid][db1.keys.restrict(sid, i, k)] != (
                            db2.keys.restrict(tid, i, k2)
                        ):
                            return False
            return True

        def rec(i: int) -> bool:
            if i == len(order):
                return True
            sid = order[i]
            tid = sigma_iso[sid]
            src = list(db1.section(sid))
            tgt = list(db2.section(tid))
            if len(src) != len(tgt):
                return False

            def assign_keys(j: int, mapping: dict[str, str], used: set) -> bool:
                steps[0] += 1
                if steps[0] > cap:
                    raise TooLarge("isomorphism search exceeded its cap")
                if j == len(src):
                    beta[sid] = dict(mapping)
                    if rec(i + 1):
                        return True
                    del beta[sid]
                    return False
                for cand in tgt:
                    if cand in used:
                        continue
                    mapping[src[j]] = cand
                    if fits(sid, {src[j]: cand}):
                        used.add(cand)
                        if assign_keys(j + 1, mapping, used):
                            return True
                        used.discard(cand)
                    del mapping[src[j]]
                return False

            return assign_keys(0, {}, set())

        return rec(0)

    for sigma_iso in _schema_iso_candidates(db1.schema, db2.schema):
        steps[0] += 1
        if steps[0] > cap:
            raise TooLarge("isomorphism search exceeded its cap")
        if key_bijections(sigma_iso):
            return True
    return False


# ---------------------------------------------------------------------------
# the initial object


def initial_database(spec: TypeSpec) -> Database:
    """Initial object of DB: the tautological database on the nerve of the
    type spec's value universe, truncated at dimension 1 (higher nerve
    simplices acquire degenerate faces, which the semi-simplicial
    representation excludes).

    Only fully enumerable specs are materializable.
    """
    from .typespec import enumerate_domain

    for name, dom in spec.types.items():
        if not dom.enumerable:
            raise InitialNotMaterializable(
                f"type {name!r} has an infinite domain"
            )
    simplices: dict[str, Simplex] = {}
    vertex_data: dict[str, tuple[str, str]] = {}

    def sid_of(type_name: str, values: tuple) -> str:
        return type_name + ":" + "|".join(render_value(v) for v in values)

    records: dict[str, dict[str, RecordTuple]] = {}
    for name in sorted(spec.types):
        members = enumerate_domain(spec, name)
        for v in members:
            vid = sid_of(name, (v,))
            simplices[vid] = Simplex(vid, 0, ())
            vertex_data[vid] = (render_value(v), name)
        for a in members:
            for b in members:
                if a.payload == b.payload:
                    continue
                eid = sid_of(name, (a, b))
                simplices[eid] = Simplex(
                    eid, 1, (sid_of(name, (b,)), sid_of(name, (a,)))
                )
    schema = Schema(spec, simplices, vertex_data)
    schema.validate()
    sections = {sid: ("k",) for sid in simplices}
    restrictions = {}
    for sid, s in simplices.items():
        sigma = schema.simple_schema_of(sid)
        vals = tuple(
            Value(schema.vertex_data[v][1], _vertex_value(schema, v, spec))
            for v in schema.vertices_of(sid)
        )
        records[sid] = {"k": RecordTuple(sigma, vals)}
        for i in range(s.dim + 1 if s.dim else 0):
            restrictions[(sid, i)] = {"k": "k"}
    return make_database(schema, sections, restrictions, records)


def _vertex_value(schema: Schema, vid: str, spec: TypeSpec):
    from .typespec import parse_value

    name, type_name = schema.vertex_data[vid]
    return parse_value(spec, type_name, name).payload
