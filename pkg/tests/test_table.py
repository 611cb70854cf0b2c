import pytest

from simplicialdb.errors import SchemaMismatch
from simplicialdb.simple_schema import SimpleSchema, SimpleSchemaMorphism
from simplicialdb.table import (
    Table,
    TableMorphism,
    image_table,
    is_relational_table,
    make_table,
    project_table,
    select_table,
    table_fiber_product,
    union_all,
    union_over,
    validate_table_morphism,
)

from conftest import std_spec


def obama_table() -> Table:
    sigma = SimpleSchema(
        std_spec(),
        (("First Name", "Str"), ("Last Name", "Str"), ("BYear", "Int")),
    )
    return make_table(
        sigma,
        {
            "1": ["Barack", "Obama", 1961],
            "2": ["Michelle", "Obama", 1964],
            "foo": ["Barack", "Obama", 1961],
        },
    )


def test_select_keeps_original_keys():
    t = obama_table()
    sel_schema = SimpleSchema(std_spec(), (("First Name", "Str"),))
    selection = make_table(sel_schema, {"k": ["Barack"]})
    out = select_table(t, ["First Name"], selection)
    assert set(out.keys) == {"1", "foo"}
    assert out.row("1").payloads() == ("Barack", "Obama", 1961)


def test_project():
    t = obama_table()
    out = project_table(t, ["First Name", "BYear"])
    assert out.schema.attr_names == ("First Name", "BYear")
    assert out.row("2").payloads() == ("Michelle", 1964)


def test_image_dedupes_keeping_first_key():
    t = obama_table()
    out = image_table(t)
    assert set(out.keys) == {"1", "2"}
    assert is_relational_table(out)
    assert not is_relational_table(t)


def test_union_all_tags_keys():
    t = obama_table()
    out = union_all(t, t)
    assert len(out.keys) == 6
    assert out.row("1:foo").payloads() == out.row("2:foo").payloads()


def marx_tables():
    spec = std_spec()
    s1 = SimpleSchema(spec, (("Title", "Str"), ("LastName", "Str")))
    s2 = SimpleSchema(spec, (("FirstName", "Str"), ("LastName", "Str")))
    t1 = make_table(s1, {"1": ["Dr.", "Marx"], "2": ["Mr.", "Marx"]})
    t2 = make_table(s2, {"A": ["Karl", "Marx"], "B": ["Groucho", "Marx"]})
    return spec, s1, s2, t1, t2


def test_marx_lossy_join():
    spec, s1, s2, t1, t2 = marx_tables()
    shared = SimpleSchema(spec, (("LastName", "Str"),))
    middle = make_table(shared, {"m": ["Marx"]})
    m1 = TableMorphism(
        t1, middle, {"1": "m", "2": "m"}, SimpleSchemaMorphism(shared, s1, ("LastName",))
    )
    m2 = TableMorphism(
        t2, middle, {"A": "m", "B": "m"}, SimpleSchemaMorphism(shared, s2, ("LastName",))
    )
    out, p1, p2 = table_fiber_product(m1, m2)
    assert len(out.keys) == 4
    assert set(out.schema.attr_names) == {"Title", "FirstName", "LastName"}
    assert validate_table_morphism(p1) and validate_table_morphism(p2)
    named = {
        frozenset(zip(out.schema.attr_names, out.row(k).payloads()))
        for k in out.keys
    }
    assert (
        frozenset({("Title", "Dr."), ("FirstName", "Karl"), ("LastName", "Marx")})
        in named
    )


def test_marx_lossless_join():
    """Duplicate keys in the shared table keep the two Marxes apart."""
    spec, s1, s2, t1, t2 = marx_tables()
    shared = SimpleSchema(spec, (("LastName", "Str"),))
    middle = make_table(shared, {"x": ["Marx"], "y": ["Marx"]})
    m1 = TableMorphism(
        t1, middle, {"1": "x", "2": "y"}, SimpleSchemaMorphism(shared, s1, ("LastName",))
    )
    m2 = TableMorphism(
        t2, middle, {"A": "x", "B": "y"}, SimpleSchemaMorphism(shared, s2, ("LastName",))
    )
    out, _, _ = table_fiber_product(m1, m2)
    assert len(out.keys) == 2
    named = {
        frozenset(zip(out.schema.attr_names, out.row(k).payloads()))
        for k in out.keys
    }
    assert named == {
        frozenset({("Title", "Dr."), ("FirstName", "Karl"), ("LastName", "Marx")}),
        frozenset({("Title", "Mr."), ("FirstName", "Groucho"), ("LastName", "Marx")}),
    }


def test_union_over_glues_overlap():
    t = obama_table()
    overlap = make_table(t.schema, {"o": ["Barack", "Obama", 1961]})
    out = union_over(t, t, overlap, {"o": "1"}, {"o": "foo"})
    # 1~2:foo glued into one class; remaining keys stay distinct
    assert len(out.keys) == 5


def test_union_all_schema_mismatch():
    t = obama_table()
    other = make_table(SimpleSchema(std_spec(), (("X", "Str"),)), {"k": ["v"]})
    with pytest.raises(SchemaMismatch):
        union_all(t, other)
