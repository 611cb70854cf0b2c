import pytest

from simplicialdb.errors import NonFiniteResult, NotMonic
from simplicialdb.keysheaf import (
    DataMap,
    KeySheaf,
    cylinder_of_database,
    enumerate_sheaf_morphisms,
    extend_by_empty,
    image_data,
    matching_families,
    materialize_cylinder,
    pullback,
    pushforward_plus,
    pushforward_plus_keys,
    sheaf_limit,
    universal_cylinder,
    validate_sheaf_and_data,
)
from simplicialdb.schema import (
    Schema,
    SchemaMorphism,
    Simplex,
    Subschema,
    full_subschema,
)

from conftest import rec, std_spec


def edge_schema():
    spec = std_spec()
    x = Schema(
        spec,
        {
            "vF": Simplex("vF", 0, ()),
            "vB": Simplex("vB", 0, ()),
            "e": Simplex("e", 1, ("vB", "vF")),
        },
        {"vF": ("First", "Str"), "vB": ("BYear", "Int")},
    )
    x.validate()
    return x


def forced_database():
    """Vertex data plus restrictions force the edge records."""
    x = edge_schema()
    K = KeySheaf(
        x,
        {"vF": ("1", "2"), "vB": ("x", "y", "z"), "e": ("4", "cc", "10")},
        {
            ("e", 0): {"4": "x", "cc": "z", "10": "z"},
            ("e", 1): {"4": "1", "cc": "2", "10": "2"},
        },
    )
    sF, sB, sE = (x.simple_schema_of(s) for s in ("vF", "vB", "e"))
    tau = DataMap(
        K,
        {
            "vF": {"1": rec(sF, "Barack"), "2": rec(sF, "Michelle")},
            "vB": {"x": rec(sB, 1961), "y": rec(sB, 1946), "z": rec(sB, 1964)},
            "e": {
                "4": rec(sE, "Barack", 1961),
                "cc": rec(sE, "Michelle", 1964),
                "10": rec(sE, "Michelle", 1964),
            },
        },
    )
    return x, K, tau


def test_forced_edge_records_validate():
    x, K, tau = forced_database()
    assert validate_sheaf_and_data(K, tau) == []


def test_naturality_violation_detected():
    x, K, tau = forced_database()
    sE = x.simple_schema_of("e")
    bad = DataMap(
        K,
        {
            **tau.assign,
            "e": {**tau.assign["e"], "4": rec(sE, "Barack", 1946)},
        },
    )
    assert validate_sheaf_and_data(K, bad) != []


def test_matching_families():
    x, K, tau = forced_database()
    fams = matching_families(K, full_subschema(x))
    assert len(fams) == 3
    edgeless = matching_families(K, Subschema(x, frozenset({"vF", "vB"})))
    assert len(edgeless) == 6  # free product of the two vertex sections


def test_image_data_dedupes_edge():
    x, K, tau = forced_database()
    Ki, ti = image_data(K, tau)
    assert len(Ki.sections["e"]) == 2  # cc and 10 carry the same record
    assert validate_sheaf_and_data(Ki, ti) == []


def test_pullback_along_vertex_inclusion():
    x, K, tau = forced_database()
    y = Schema(x.spec, {"w": Simplex("w", 0, ())}, {"w": ("First", "Str")})
    y.validate()
    f = SchemaMorphism(y, x, {"w": ("vF", (0,))})
    f.validate()
    K2, t2 = pullback(f, K, tau)
    assert K2.sections["w"] == ("1", "2")
    assert t2.assign["w"]["1"].payloads() == ("Barack",)


def test_extend_by_empty_requires_monic():
    x, K, tau = forced_database()
    y = Schema(x.spec, {"w": Simplex("w", 0, ())}, {"w": ("First", "Str")})
    y.validate()
    f = SchemaMorphism(y, x, {"w": ("vF", (0,))})
    Kw, tw = pullback(f, K, tau)
    K3, t3 = extend_by_empty(f, Kw, tw)
    assert K3.sections["vF"] == ("1", "2")
    assert K3.sections["vB"] == () and K3.sections["e"] == ()

    collapse = SchemaMorphism(
        Schema(
            x.spec,
            {"w1": Simplex("w1", 0, ()), "w2": Simplex("w2", 0, ())},
            {"w1": ("First", "Str"), "w2": ("First", "Str")},
        ),
        y,
        {"w1": ("w", (0,)), "w2": ("w", (0,))},
    )
    with pytest.raises(NotMonic):
        extend_by_empty(collapse, KeySheaf(collapse.source, {"w1": (), "w2": ()}, {}),
                        DataMap(KeySheaf(collapse.source, {"w1": (), "w2": ()}, {}),
                                {"w1": {}, "w2": {}}))


def test_pushforward_of_string_pairs():
    """A Str-Str edge collapsed onto the Str vertex of a Str-Int edge:
    the Int vertex is free, the Str vertex keeps exactly the strings with
    a repeated-value row, and the edge rows are cylinders with a free Int
    coordinate."""
    x = edge_schema()
    spec = x.spec
    y = Schema(
        spec,
        {
            "u": Simplex("u", 0, ()),
            "v": Simplex("v", 0, ()),
            "ey": Simplex("ey", 1, ("v", "u")),
        },
        {"u": ("A", "Str"), "v": ("B", "Str")},
    )
    y.validate()
    f = SchemaMorphism(y, x, {"u": ("vF", (0,)), "v": ("vF", (0,)), "ey": ("vF", (0, 0))})
    KY = KeySheaf(
        y,
        {"u": ("a", "b"), "v": ("a2", "b2"), "ey": ("r1", "r2", "r3")},
        {
            ("ey", 0): {"r1": "a2", "r2": "b2", "r3": "b2"},
            ("ey", 1): {"r1": "a", "r2": "a", "r3": "b"},
        },
    )
    sU, sV, sEY = (y.simple_schema_of(s) for s in ("u", "v", "ey"))
    tauY = DataMap(
        KY,
        {
            "u": {"a": rec(sU, "s"), "b": rec(sU, "t")},
            "v": {"a2": rec(sV, "s"), "b2": rec(sV, "t")},
            "ey": {
                "r1": rec(sEY, "s", "s"),
                "r2": rec(sEY, "s", "t"),
                "r3": rec(sEY, "t", "t"),
            },
        },
    )
    assert validate_sheaf_and_data(KY, tauY) == []
    cyl, fams = pushforward_plus(f, KY, tauY)
    assert cyl.validate() == []
    # Int vertex: universal (one unconstrained row)
    assert cyl.constrained["vB"] == () and len(cyl.rows["vB"]) == 1
    # Str vertex: rows (s,s) and (t,t) only, constrained
    str_values = {tuple(v.payload for v in row) for row in cyl.rows["vF"].values()}
    assert cyl.constrained["vF"] == (0,)
    assert str_values == {("s",), ("t",)}
    # edge: Str coordinate constrained, Int coordinate free
    assert cyl.constrained["e"] == (0,)
    edge_values = {tuple(v.payload for v in row) for row in cyl.rows["e"].values()}
    assert edge_values == {("s",), ("t",)}


def test_limit_with_universal_cylinder_is_identity():
    x, K, tau = forced_database()
    c = cylinder_of_database(K, tau)
    u = universal_cylinder(x)
    lim, proj = sheaf_limit({"a": c, "b": u}, [])
    K2, t2, _ = materialize_cylinder(lim)
    assert validate_sheaf_and_data(K2, t2) == []
    assert len(K2.sections["e"]) == len(K.sections["e"])


def test_materialize_infinite_free_column_raises():
    x = edge_schema()
    with pytest.raises(NonFiniteResult):
        materialize_cylinder(universal_cylinder(x))


def test_pushforward_plus_keys_and_morphism_enumeration():
    x, K, tau = forced_database()
    y = Schema(x.spec, {"w": Simplex("w", 0, ())}, {"w": ("First", "Str")})
    y.validate()
    f = SchemaMorphism(y, x, {"w": ("vF", (0,))})
    Kw, _ = pullback(f, K, tau)
    Kplus = pushforward_plus_keys(f, Kw)
    assert set(Kplus.sections) == set(x.simplices)
    maps = enumerate_sheaf_morphisms(Kw, Kw)
    assert len(maps) == 4  # two keys, unconstrained vertex sheaf
