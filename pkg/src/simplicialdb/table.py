"""Standalone tables and their category.

A table is a finite ordered key set together with one record per key;
duplicate records under distinct keys are allowed.  Joins are fiber
products, UNION/UNION ALL are colimits at fixed column list, and the
relational image collapses duplicate records.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    CompositionError,
    DirectionError,
    SchemaMismatch,
    UnknownAttribute,
)
from .simple_schema import (
    RecordTuple,
    SimpleSchema,
    SimpleSchemaMorphism,
    check_record,
    identity_ssm,
    inclusion_ssm,
    pushout_simple_schema,
    restrict_record,
)
from .typespec import TypeSpec


@dataclass(frozen=True)
class Table:
    keys: tuple[str, ...]
    schema: SimpleSchema
    rows: dict[str, RecordTuple]

    def __post_init__(self):
        if set(self.keys) != set(self.rows):
            raise SchemaMismatch("keys and rows must coincide")
        if len(set(self.keys)) != len(self.keys):
            raise SchemaMismatch("keys must be distinct")
        for r in self.rows.values():
            if r.schema != self.schema:
                raise SchemaMismatch("row on foreign schema")

    def row(self, key: str) -> RecordTuple:
        return self.rows[key]


def make_table(schema: SimpleSchema, rows: dict[str, list]) -> Table:
    """Build a table from raw row payloads, validating each row."""
    checked = {k: check_record(schema, v) for k, v in rows.items()}
    return Table(tuple(rows.keys()), schema, checked)


@dataclass(frozen=True)
class TableMorphism:
    source: Table
    target: Table
    key_map: dict[str, str]
    schema_morphism: SimpleSchemaMorphism  # target.schema -> source.schema

    def __post_init__(self):
        if self.schema_morphism.source != self.target.schema or (
            self.schema_morphism.target != self.source.schema
        ):
            raise DirectionError(
                "schema morphism must run target.schema -> source.schema"
            )
        if set(self.key_map) != set(self.source.keys):
            raise SchemaMismatch("key_map must cover every source key")


def validate_table_morphism(m: TableMorphism) -> bool:
    """True iff the integrity square commutes for every key."""
    for k in m.source.keys:
        if m.key_map[k] not in m.target.rows:
            return False
        got = restrict_record(m.schema_morphism, m.source.row(k))
        if got.payloads() != m.target.row(m.key_map[k]).payloads():
            return False
    return True


def identity_table_morphism(t: Table) -> TableMorphism:
    return TableMorphism(t, t, {k: k for k in t.keys}, identity_ssm(t.schema))


def compose_table_morphisms(g: TableMorphism, f: TableMorphism) -> TableMorphism:
    if f.target is not g.source and f.target != g.source:
        raise CompositionError("target of f must equal source of g")
    from .simple_schema import compose_ssm

    return TableMorphism(
        f.source,
        g.target,
        {k: g.key_map[f.key_map[k]] for k in f.source.keys},
        compose_ssm(f.schema_morphism, g.schema_morphism),
    )


def table_fiber_product(
    m1: TableMorphism, m2: TableMorphism
) -> tuple[Table, TableMorphism, TableMorphism]:
    """Fiber product of tables over a common target: the join.

    Columns are the pushout of the column lists; keys are the pairs whose
    images in the shared table agree.
    """
    if m1.target != m2.target:
        raise SchemaMismatch("fiber product needs a common target")
    t1, t2 = m1.source, m2.source
    schema, leg1, leg2 = pushout_simple_schema(
        m1.schema_morphism, m2.schema_morphism
    )

    keys: list[str] = []
    rows: dict[str, RecordTuple] = {}
    pairs: dict[str, tuple[str, str]] = {}
    for k1 in t1.keys:
        for k2 in t2.keys:
            if m1.key_map[k1] != m2.key_map[k2]:
                continue
            key = f"({k1},{k2})"
            r1, r2 = t1.row(k1), t2.row(k2)
            values = []
            for name, _ in schema.attributes:
                # read through whichever leg hits this merged column
                if name in _leg_index(leg1):
                    values.append(r1.values[_leg_index(leg1)[name]])
                else:
                    values.append(r2.values[_leg_index(leg2)[name]])
            keys.append(key)
            rows[key] = RecordTuple(schema, tuple(values))
            pairs[key] = (k1, k2)
    keys.sort()
    result = Table(tuple(keys), schema, {k: rows[k] for k in keys})
    p1 = TableMorphism(result, t1, {k: pairs[k][0] for k in keys}, leg1)
    p2 = TableMorphism(result, t2, {k: pairs[k][1] for k in keys}, leg2)
    return result, p1, p2


def _leg_index(leg: SimpleSchemaMorphism) -> dict[str, int]:
    # first source position mapping onto each target attribute
    out: dict[str, int] = {}
    for i, name in enumerate(leg.vertex_map):
        out.setdefault(name, i)
    return out


def union_all(t1: Table, t2: Table) -> Table:
    if t1.schema != t2.schema:
        raise SchemaMismatch("UNION ALL needs identical column lists")
    keys = tuple(f"1:{k}" for k in t1.keys) + tuple(f"2:{k}" for k in t2.keys)
    rows = {f"1:{k}": t1.row(k) for k in t1.keys}
    rows.update({f"2:{k}": t2.row(k) for k in t2.keys})
    return Table(keys, t1.schema, rows)


def union_over(
    t1: Table, t2: Table, overlap: Table, g1: dict[str, str], g2: dict[str, str]
) -> Table:
    """Pushout of key sets along an overlap table at fixed columns.

    g1, g2 send overlap keys into t1 and t2; both must preserve records.
    """
    for t in (t1, t2, overlap):
        if t.schema != t1.schema:
            raise SchemaMismatch("UNION needs identical column lists")
    for k in overlap.keys:
        if overlap.row(k).payloads() != t1.row(g1[k]).payloads():
            raise SchemaMismatch(f"g1 does not preserve the record of {k!r}")
        if overlap.row(k).payloads() != t2.row(g2[k]).payloads():
            raise SchemaMismatch(f"g2 does not preserve the record of {k!r}")

    tagged = [f"1:{k}" for k in t1.keys] + [f"2:{k}" for k in t2.keys]
    parent = {x: x for x in tagged}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k in overlap.keys:
        a, b = find(f"1:{g1[k]}"), find(f"2:{g2[k]}")
        if a != b:
            parent[b] = a

    classes: dict[str, list[str]] = {}
    for x in tagged:
        classes.setdefault(find(x), []).append(x)
    record_of = dict(
        [(f"1:{k}", t1.row(k)) for k in t1.keys]
        + [(f"2:{k}", t2.row(k)) for k in t2.keys]
    )
    names = {rep: min(members) for rep, members in classes.items()}
    keys = tuple(sorted(names.values()))
    rows = {names[rep]: record_of[classes[rep][0]] for rep in classes}
    return Table(keys, t1.schema, rows)


def project_table(t: Table, attrs) -> Table:
    attrs = list(attrs)
    for a in attrs:
        if a not in t.schema.attr_names:
            raise UnknownAttribute(f"no attribute {a!r}")
    sub = SimpleSchema(
        t.schema.spec, tuple((a, t.schema.type_of(a)) for a in attrs)
    )
    inc = inclusion_ssm(sub, t.schema)
    rows = {k: restrict_record(inc, t.row(k)) for k in t.keys}
    return Table(t.keys, sub, rows)


def select_table(t: Table, attrs, selection: Table) -> Table:
    """Rows of t whose restriction to attrs occurs in the selection table.

    Computed as the limit of t -> (all records on attrs) <- selection;
    concretely a nested loop over key pairs.
    """
    projected = project_table(t, attrs)
    if selection.schema != projected.schema:
        raise SchemaMismatch("selection must live on the restricted columns")
    wanted = {selection.row(k2).payloads() for k2 in selection.keys}
    keys = tuple(k for k in t.keys if projected.row(k).payloads() in wanted)
    return Table(keys, t.schema, {k: t.row(k) for k in keys})


def image_table(t: Table) -> Table:
    """Relational image: one canonical key (first in key order) per record."""
    seen: dict[tuple, str] = {}
    for k in t.keys:
        seen.setdefault(t.row(k).payloads(), k)
    keys = tuple(k for k in t.keys if seen[t.row(k).payloads()] == k)
    return Table(keys, t.schema, {k: t.row(k) for k in keys})


def is_relational_table(t: Table) -> bool:
    return len({t.row(k).payloads() for k in t.keys}) == len(t.keys)


def terminal_table(spec: TypeSpec) -> Table:
    schema = SimpleSchema(spec, ())
    return Table(("*",), schema, {"*": RecordTuple(schema, ())})


def initial_table(spec: TypeSpec) -> Table:
    """Zero keys over the identity simple schema on all declared types."""
    attrs = tuple((name, name) for name in sorted(spec.types))
    return Table((), SimpleSchema(spec, attrs), {})
