import pytest

from simplicialdb.database import (
    canonicalize_keys,
    db_delete,
    db_insert,
    db_join_on_attribute,
    db_product_with_final,
    db_project,
    db_select,
    db_union_all,
    from_table,
    global_counit,
    global_table,
    initial_database,
    is_isomorphic,
    is_relational,
    relational_unit,
    selected_keys,
    to_relational,
    validate_db_morphism,
    view_commit_delete,
    view_commit_insert,
    view_extract,
)
from simplicialdb.errors import InitialNotMaterializable
from simplicialdb.schema import closure, subschema_as_schema
from simplicialdb.simple_schema import SimpleSchema
from simplicialdb.table import make_table
from simplicialdb.typespec import DataTypeDomain, TypeSpec

from conftest import edge_db, edge_schema, multiset, named_rows, rec, std_spec


def marx_pair():
    spec = std_spec()
    x1 = edge_schema(spec, names=(("FirstName", "Str"), ("Lastname", "Str")))
    x2 = edge_schema(spec, "wL", "wT", (("Lastname", "Str"), ("Title", "Str")))
    d1 = edge_db(x1, [("Groucho", "Marx"), ("Karl", "Marx")])
    d2 = edge_db(x2, [("Marx", "Mr."), ("Marx", "Dr.")], "wL", "wT")
    return d1, d2


def test_join_on_shared_attribute():
    d1, d2 = marx_pair()
    joined, legs = db_join_on_attribute(d1, d2, "Lastname")
    assert joined.validate() == []
    for m in legs.values():
        assert validate_db_morphism(m) == []
    t = global_table(joined)
    rows = multiset(named_rows(t))
    assert sum(rows.values()) == 4
    assert set(t.schema.attr_names) == {"FirstName", "Lastname", "Title"}


def selection_on_vertex(db, vid, values):
    sub = closure(db.schema, [vid])
    sub_schema, _ = subschema_as_schema(sub)
    sigma = sub_schema.simple_schema_of(vid)
    from simplicialdb.database import make_database

    keys = tuple(f"s{i}" for i in range(len(values)))
    return sub, make_database(
        sub_schema,
        {vid: keys},
        {},
        {vid: {k: rec(sigma, v) for k, v in zip(keys, values)}},
    )


def test_select_and_delete_contract():
    spec = std_spec()
    x = edge_schema(spec, names=(("First", "Str"), ("BYear", "Int")))
    db = edge_db(x, [("Barack", 1961), ("Michelle", 1964), ("M2", 1964)])
    sub, sel = selection_on_vertex(db, "vL", [1964])
    result, _ = db_select(db, sub, sel)
    assert result.validate() == []
    hit = selected_keys(db, sub, sel)
    assert hit["vL"] == {"1964"}
    remaining = db_delete(db, sub, sel)
    assert remaining.validate() == []
    assert remaining.section("vL") == ("1961",)
    assert remaining.section("e") == ("Barack|1961",)
    # reselect on the deleted database is empty over the subschema
    hit2 = selected_keys(remaining, sub, sel)
    assert all(not v for v in hit2.values())


def test_view_commit_delete_matches_db_delete():
    spec = std_spec()
    x = edge_schema(spec, names=(("First", "Str"), ("BYear", "Int")))
    db = edge_db(x, [("Barack", 1961), ("Michelle", 1964), ("M2", 1964)])
    sub, sel = selection_on_vertex(db, "vL", [1964])
    a = db_delete(db, sub, sel)
    b = view_commit_delete(db, sub, sel)
    assert a.keys.sections == b.keys.sections
    assert a.keys.restrictions == b.keys.restrictions


def test_view_commit_insert():
    spec = std_spec()
    x = edge_schema(spec, names=(("First", "Str"), ("BYear", "Int")))
    db = edge_db(x, [("Barack", 1961)])
    sub = closure(x, ["vF"])
    view = view_extract(db, sub)
    sub_schema, _ = subschema_as_schema(sub)
    sigma = sub_schema.simple_schema_of("vF")
    from simplicialdb.database import make_database

    ins = make_database(
        sub_schema, {"vF": ("n",)}, {}, {"vF": {"n": rec(sigma, "New")}}
    )
    out = view_commit_insert(db, sub, ins)
    assert out.validate() == []
    values = {out.record("vF", k).payloads() for k in out.section("vF")}
    assert values == {("Barack",), ("New",)}
    assert len(out.section("e")) == 1  # no edges invented


def test_union_all_and_union():
    spec = std_spec()
    x = edge_schema(spec, names=(("First", "Str"), ("BYear", "Int")))
    db = edge_db(x, [("Barack", 1961)])
    both = db_union_all(db, db)
    assert len(both.section("e")) == 2
    assert not is_relational(both)
    dedup = to_relational(both)
    assert len(dedup.section("e")) == 1
    assert is_relational(dedup)
    ins = db_insert(db, db)
    assert len(ins.section("e")) == 2


def test_relational_unit_and_idempotence():
    spec = std_spec()
    sigma = SimpleSchema(spec, (("First", "Str"), ("BYear", "Int")))
    t = make_table(sigma, {"1": ["A", 1], "2": ["A", 1], "3": ["B", 2]})
    db = from_table(t)
    unit = relational_unit(db)
    assert validate_db_morphism(unit) == []
    r = to_relational(db)
    r2 = to_relational(r)
    assert r.keys.sections == r2.keys.sections


def test_from_table_global_table_round_trip():
    spec = std_spec()
    sigma = SimpleSchema(spec, (("First", "Str"), ("BYear", "Int")))
    t = make_table(sigma, {"1": ["Barack", 1961], "2": ["Michelle", 1964]})
    db = from_table(t)
    assert db.validate() == []
    back = global_table(db)
    assert multiset(named_rows(back)) == multiset(named_rows(t))
    counit = global_counit(db)
    assert validate_db_morphism(counit) == []


def test_product_with_final_is_isomorphic_to_input():
    d1, _ = marx_pair()
    prod, _ = db_product_with_final(d1)
    assert is_isomorphic(prod, d1)


def test_canonicalize_keys_is_stable_and_iso():
    d1, d2 = marx_pair()
    joined, _ = db_join_on_attribute(d1, d2, "Lastname")
    canon, prov = canonicalize_keys(joined)
    canon2, _ = canonicalize_keys(canon)
    assert canon.keys.sections == canon2.keys.sections
    assert is_isomorphic(canon, joined)
    for sid, mapping in prov.items():
        assert set(mapping) == set(canon.section(sid))


def test_initial_database():
    spec = TypeSpec({"B": DataTypeDomain("bool")})
    db = initial_database(spec)
    assert db.validate() == []
    assert sorted(db.keys.sections) == [
        "B:false",
        "B:false|true",
        "B:true",
        "B:true|false",
    ]
    with pytest.raises(InitialNotMaterializable):
        initial_database(std_spec())


def test_project_restricts_sheaf():
    d1, _ = marx_pair()
    p = db_project(d1, closure(d1.schema, ["vF"]))
    assert set(p.schema.simplices) == {"vF"}
    assert p.section("vF") == d1.section("vF")
