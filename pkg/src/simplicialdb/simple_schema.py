"""Ordered typed column lists, their morphisms, and record tuples.

Records are stored positionally; attribute names are metadata.  Morphisms
are order- and type-preserving maps of attribute lists, acting
contravariantly on records.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    ArityError,
    CompositionError,
    OrderConflict,
    SchemaMismatch,
    TypeMismatch,
    UnknownAttribute,
)
from .typespec import TypeSpec, Value, check_member


@dataclass(frozen=True)
class SimpleSchema:
    spec: TypeSpec
    attributes: tuple[tuple[str, str], ...]  # (attr_name, type_name)

    def __post_init__(self):
        names = [a for a, _ in self.attributes]
        if len(set(names)) != len(names):
            raise TypeMismatch("attribute names must be unique")
        for _, t in self.attributes:
            self.spec.domain(t)

    @property
    def attr_names(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.attributes)

    def position(self, attr_name: str) -> int:
        for i, (a, _) in enumerate(self.attributes):
            if a == attr_name:
                return i
        raise UnknownAttribute(f"no attribute {attr_name!r}")

    def type_of(self, attr_name: str) -> str:
        return self.attributes[self.position(attr_name)][1]

    def __len__(self):
        return len(self.attributes)


def simple_schema(spec: TypeSpec, *attrs: tuple[str, str]) -> SimpleSchema:
    return SimpleSchema(spec, tuple(attrs))


@dataclass(frozen=True)
class RecordTuple:
    schema: SimpleSchema
    values: tuple[Value, ...]

    def value_at(self, attr_name: str) -> Value:
        return self.values[self.schema.position(attr_name)]

    def payloads(self) -> tuple:
        return tuple(v.payload for v in self.values)


def check_record(schema: SimpleSchema, raw_values) -> RecordTuple:
    """Validate a list of raw payloads against the schema, positionally."""
    raw_values = list(raw_values)
    if len(raw_values) != len(schema):
        raise ArityError(
            f"expected {len(schema)} values, got {len(raw_values)}"
        )
    values = []
    for i, ((_, type_name), raw) in enumerate(zip(schema.attributes, raw_values)):
        payload = raw.payload if isinstance(raw, Value) else raw
        if not check_member(schema.spec, type_name, payload):
            raise TypeMismatch(
                f"value {payload!r} at position {i} is not of type {type_name!r}",
                position=i,
            )
        values.append(Value(type_name, payload))
    return RecordTuple(schema, tuple(values))


@dataclass(frozen=True)
class SimpleSchemaMorphism:
    source: SimpleSchema
    target: SimpleSchema
    vertex_map: tuple[str, ...]  # target attr name per source attribute

    def __post_init__(self):
        if len(self.vertex_map) != len(self.source):
            raise ArityError("vertex_map must cover every source attribute")
        last = -1
        for (a, t), b in zip(self.source.attributes, self.vertex_map):
            j = self.target.position(b)
            if j < last:
                raise OrderConflict(f"map is not order-preserving at {a!r}")
            last = j
            if self.target.type_of(b) != t:
                raise TypeMismatch(f"map does not preserve the type of {a!r}")

    def apply(self, attr_name: str) -> str:
        return self.vertex_map[self.source.position(attr_name)]


def identity_ssm(schema: SimpleSchema) -> SimpleSchemaMorphism:
    return SimpleSchemaMorphism(schema, schema, schema.attr_names)


def compose_ssm(
    g: SimpleSchemaMorphism, f: SimpleSchemaMorphism
) -> SimpleSchemaMorphism:
    """g after f: attributes flow source(f) -> target(f)=source(g) -> target(g)."""
    if f.target is not g.source and f.target != g.source:
        raise CompositionError("target of f must equal source of g")
    return SimpleSchemaMorphism(
        f.source, g.target, tuple(g.apply(b) for b in f.vertex_map)
    )


def inclusion_ssm(
    source: SimpleSchema, target: SimpleSchema
) -> SimpleSchemaMorphism:
    """Inclusion of a sub-list of attributes, matched by name."""
    return SimpleSchemaMorphism(source, target, source.attr_names)


def restrict_record(f: SimpleSchemaMorphism, r: RecordTuple) -> RecordTuple:
    """Contravariant action on records: f from s2 to s1 sends records on s1
    to records on s2 by reading values at the mapped attributes."""
    if r.schema != f.target:
        raise SchemaMismatch(
            f"record on {r.schema.attr_names} cannot restrict along a "
            f"morphism into {f.target.attr_names}"
        )
    values = tuple(r.value_at(b) for b in f.vertex_map)
    return RecordTuple(f.source, values)


def pushout_simple_schema(
    f1: SimpleSchemaMorphism, f2: SimpleSchemaMorphism
) -> tuple[SimpleSchema, SimpleSchemaMorphism, SimpleSchemaMorphism]:
    """Pushout of attribute lists along a shared source.

    The merged columns are linearized by a deterministic topological sort
    of the order constraints coming from both targets (a stable merge:
    first-target positions win ties); OrderConflict is raised when the
    constraints are cyclic, i.e. no order-preserving legs exist.  A merged
    attribute is named by joining the distinct member names with '='.
    """
    if f1.source != f2.source:
        raise CompositionError("pushout legs must share their source")
    s1, s2 = f1.target, f2.target

    # union-find over tagged attributes ("1", name) / ("2", name)
    parent: dict[tuple[str, str], tuple[str, str]] = {}
    for a, _ in s1.attributes:
        parent[("1", a)] = ("1", a)
    for b, _ in s2.attributes:
        parent[("2", b)] = ("2", b)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    for c, _ in f1.source.attributes:
        union(("1", f1.apply(c)), ("2", f2.apply(c)))

    classes: dict[tuple[str, str], list[tuple[str, str]]] = {}
    for x in parent:
        classes.setdefault(find(x), []).append(x)

    # topological sort of classes under the order constraints of both legs
    succ: dict[tuple[str, str], set] = {rep: set() for rep in classes}
    indeg: dict[tuple[str, str], int] = {rep: 0 for rep in classes}
    for schema, tag in ((s1, "1"), (s2, "2")):
        names_in_order = [find((tag, a)) for a, _ in schema.attributes]
        for lo, hi in zip(names_in_order, names_in_order[1:]):
            if lo != hi and hi not in succ[lo]:
                succ[lo].add(hi)
                indeg[hi] += 1

    def sort_key(rep):
        pos1 = min(
            (s1.position(a) for tag, a in classes[rep] if tag == "1"),
            default=len(s1) + len(s2),
        )
        pos2 = min(
            (s2.position(a) for tag, a in classes[rep] if tag == "2"),
            default=len(s1) + len(s2),
        )
        return (pos1, pos2)

    ordered: list[tuple[str, str]] = []
    available = sorted((rep for rep in classes if indeg[rep] == 0), key=sort_key)
    while available:
        rep = available.pop(0)
        ordered.append(rep)
        for nxt in succ[rep]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                available.append(nxt)
        available.sort(key=sort_key)
    if len(ordered) != len(classes):
        raise OrderConflict("no order-preserving merge of the column lists")

    def class_name(rep) -> str:
        members = classes[rep]
        names = []
        for tag, a in sorted(members, key=lambda m: (m[0], _member_pos(m, s1, s2))):
            if a not in names:
                names.append(a)
        return "=".join(names)

    def class_type(rep) -> str:
        tag, a = classes[rep][0]
        return s1.type_of(a) if tag == "1" else s2.type_of(a)

    attrs = tuple((class_name(rep), class_type(rep)) for rep in ordered)
    if len(set(n for n, _ in attrs)) != len(attrs):
        raise OrderConflict("pushout produced ambiguous attribute names")
    result = SimpleSchema(s1.spec, attrs)

    index_of = {rep: i for i, rep in enumerate(ordered)}
    names = result.attr_names

    def leg(schema, tag):
        vm = tuple(names[index_of[find((tag, a))]] for a, _ in schema.attributes)
        return SimpleSchemaMorphism(schema, result, vm)  # may raise OrderConflict

    return result, leg(s1, "1"), leg(s2, "2")


def _member_pos(member, s1, s2):
    tag, a = member
    return s1.position(a) if tag == "1" else s2.position(a)
