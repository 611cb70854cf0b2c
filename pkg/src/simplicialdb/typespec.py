"""Named data types and their domains.

A type specification is a finite map from type names to domains.  Int and
string domains are intensional (membership predicate + parser, never
enumerated); bool and enum domains are extensional and can be enumerated.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotEnumerable, ParseError, TypeMismatch, UnknownType

KINDS = ("int", "string", "bool", "enum")


@dataclass(frozen=True)
class DataTypeDomain:
    kind: str
    enum_values: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnknownType(f"unknown domain kind {self.kind!r}")
        if self.kind == "enum":
            if not self.enum_values:
                raise TypeMismatch("enum domain needs at least one literal")
            if len(set(self.enum_values)) != len(self.enum_values):
                raise TypeMismatch("enum literals must be distinct")
        elif self.enum_values:
            raise TypeMismatch(f"{self.kind} domain carries no literals")

    @property
    def enumerable(self) -> bool:
        return self.kind in ("bool", "enum")


@dataclass(frozen=True)
class TypeSpec:
    types: dict[str, DataTypeDomain] = field(default_factory=dict)

    def __post_init__(self):
        for name in self.types:
            if not isinstance(name, str) or not name:
                raise UnknownType("type names must be nonempty strings")

    def domain(self, type_name: str) -> DataTypeDomain:
        try:
            return self.types[type_name]
        except KeyError:
            raise UnknownType(f"no such type: {type_name!r}") from None


@dataclass(frozen=True)
class Value:
    type_name: str
    payload: object

    def __repr__(self):
        return f"Value({self.type_name!r}, {self.payload!r})"


def check_member(spec: TypeSpec, type_name: str, payload) -> bool:
    """True iff payload lies in the domain of the named type."""
    dom = spec.domain(type_name)
    if dom.kind == "int":
        return isinstance(payload, int) and not isinstance(payload, bool)
    if dom.kind == "string":
        return isinstance(payload, str)
    if dom.kind == "bool":
        return isinstance(payload, bool)
    return isinstance(payload, str) and payload in dom.enum_values


def make_value(spec: TypeSpec, type_name: str, payload) -> Value:
    if not check_member(spec, type_name, payload):
        raise TypeMismatch(f"{payload!r} is not of type {type_name!r}")
    return Value(type_name, payload)


def parse_value(spec: TypeSpec, type_name: str, text: str) -> Value:
    """Parse canonical text into a Value; inverse of render_value."""
    dom = spec.domain(type_name)
    if dom.kind == "int":
        try:
            return Value(type_name, int(text, 10))
        except ValueError:
            raise ParseError(f"{text!r} is not an integer") from None
    if dom.kind == "string":
        return Value(type_name, text)
    if dom.kind == "bool":
        if text == "true":
            return Value(type_name, True)
        if text == "false":
            return Value(type_name, False)
        raise ParseError(f"{text!r} is not a boolean literal")
    if text in dom.enum_values:
        return Value(type_name, text)
    raise ParseError(f"{text!r} is not a literal of enum {type_name!r}")


def render_value(value: Value) -> str:
    p = value.payload
    if isinstance(p, bool):
        return "true" if p else "false"
    if isinstance(p, int):
        return str(p)
    return p


def enumerate_domain(spec: TypeSpec, type_name: str) -> list[Value]:
    """All members of an enumerable domain, in canonical order."""
    dom = spec.domain(type_name)
    if dom.kind == "bool":
        return [Value(type_name, False), Value(type_name, True)]
    if dom.kind == "enum":
        return [Value(type_name, lit) for lit in dom.enum_values]
    raise NotEnumerable(f"type {type_name!r} has an infinite domain")
