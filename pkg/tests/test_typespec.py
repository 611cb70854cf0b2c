import pytest
from hypothesis import given, strategies as st

from simplicialdb.errors import NotEnumerable, ParseError, UnknownType
from simplicialdb.typespec import (
    DataTypeDomain,
    TypeSpec,
    check_member,
    enumerate_domain,
    make_value,
    parse_value,
    render_value,
)

from conftest import std_spec


def test_membership():
    spec = std_spec()
    assert check_member(spec, "Int", 3)
    assert not check_member(spec, "Int", True)  # bool is not an int
    assert check_member(spec, "Bool", True)
    assert check_member(spec, "Color", "red")
    assert not check_member(spec, "Color", "purple")
    assert check_member(spec, "Str", "anything")
    assert not check_member(spec, "Str", 3)


def test_unknown_type():
    spec = std_spec()
    with pytest.raises(UnknownType):
        make_value(spec, "Float", 1.0)


def test_enumerate_domain():
    spec = std_spec()
    assert [v.payload for v in enumerate_domain(spec, "Bool")] == [False, True]
    assert [v.payload for v in enumerate_domain(spec, "Color")] == [
        "red",
        "green",
        "blue",
    ]
    with pytest.raises(NotEnumerable):
        enumerate_domain(spec, "Int")


def test_parse_render_literals():
    spec = std_spec()
    assert parse_value(spec, "Bool", "true").payload is True
    assert parse_value(spec, "Bool", "false").payload is False
    assert render_value(make_value(spec, "Bool", True)) == "true"
    assert parse_value(spec, "Int", "-7").payload == -7
    with pytest.raises(ParseError):
        parse_value(spec, "Int", "seven")
    with pytest.raises(ParseError):
        parse_value(spec, "Color", "purple")


@given(st.integers(min_value=-10**9, max_value=10**9))
def test_int_round_trip(n):
    spec = std_spec()
    v = make_value(spec, "Int", n)
    assert parse_value(spec, "Int", render_value(v)) == v


@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=30))
def test_string_round_trip(s):
    spec = std_spec()
    v = make_value(spec, "Str", s)
    assert parse_value(spec, "Str", render_value(v)) == v


def test_enum_declaration_order_preserved():
    spec = TypeSpec({"E": DataTypeDomain("enum", ("z", "a", "m"))})
    assert [v.payload for v in enumerate_domain(spec, "E")] == ["z", "a", "m"]
