import pytest

from simplicialdb.errors import TypeMismatch
from simplicialdb.oracle import (
    FlatTable,
    oracle_dedupe,
    oracle_equijoin,
    oracle_matching_families,
    oracle_project,
    oracle_select,
)


def t1():
    return FlatTable(
        (("First", "Str"), ("Last", "Str")),
        {"a": ("Groucho", "Marx"), "b": ("Karl", "Marx"), "c": ("John", "Cleese")},
    )


def t2():
    return FlatTable(
        (("Last", "Str"), ("Title", "Str")),
        {"x": ("Marx", "Mr."), "y": ("Marx", "Dr."), "z": ("Monty", "Sir")},
    )


def test_equijoin():
    out = oracle_equijoin(t1(), t2(), [("Last", "Last")])
    assert set(out.rows) == {"(a,x)", "(a,y)", "(b,x)", "(b,y)"}
    assert out.rows["(a,x)"] == ("Groucho", "Marx", "Mr.")
    assert out.names == ("First", "Last", "Title")


def test_equijoin_type_mismatch():
    bad = FlatTable((("Last", "Int"),), {"k": (3,)})
    with pytest.raises(TypeMismatch):
        oracle_equijoin(t1(), bad, [("Last", "Last")])


def test_select_keeps_keys():
    pred = FlatTable((("Last", "Str"),), {"p": ("Marx",)})
    out = oracle_select(t1(), pred)
    assert set(out.rows) == {"a", "b"}


def test_project():
    out = oracle_project(t1(), ["Last"])
    assert out.rows["c"] == ("Cleese",)
    assert out.columns == (("Last", "Str"),)


def test_dedupe_first_key_wins():
    t = FlatTable((("X", "Str"),), {"k1": ("v",), "k2": ("v",), "k3": ("w",)})
    out = oracle_dedupe(t)
    assert set(out.rows) == {"k1", "k3"}


def test_matching_families_edge():
    faces = {"u": (), "v": (), "e": ("v", "u")}
    sections = {"u": ("1", "2"), "v": ("x", "z"), "e": ("4", "cc")}
    restrictions = {
        ("e", 0): {"4": "x", "cc": "z"},
        ("e", 1): {"4": "1", "cc": "2"},
    }
    fams = oracle_matching_families(faces, sections, restrictions)
    assert fams == [
        {"e": "4", "u": "1", "v": "x"},
        {"e": "cc", "u": "2", "v": "z"},
    ]


def test_matching_families_empty_schema():
    assert oracle_matching_families({}, {}, {}) == [{}]
