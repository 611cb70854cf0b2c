"""Shared builders for the test suite.

SDB_SEED fixes every random generator; the default keeps runs
reproducible across machines.
"""
from __future__ import annotations

import os
import random

import pytest

from simplicialdb.database import Database, make_database
from simplicialdb.schema import Schema, Simplex
from simplicialdb.simple_schema import RecordTuple, SimpleSchema, check_record
from simplicialdb.table import Table, make_table
from simplicialdb.typespec import DataTypeDomain, TypeSpec

SEED = int(os.environ.get("SDB_SEED", "20260823"))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(SEED)


def std_spec() -> TypeSpec:
    return TypeSpec(
        {
            "Str": DataTypeDomain("string"),
            "Int": DataTypeDomain("int"),
            "Bool": DataTypeDomain("bool"),
            "Color": DataTypeDomain("enum", ("red", "green", "blue")),
        }
    )


def rec(sigma: SimpleSchema, *vals) -> RecordTuple:
    return check_record(sigma, list(vals))


def edge_schema(
    spec: TypeSpec,
    vf: str = "vF",
    vl: str = "vL",
    names=(("First", "Str"), ("Last", "Str")),
) -> Schema:
    """Single edge with columns (names[0], names[1]); face 1 is the first
    vertex, face 0 the second."""
    x = Schema(
        spec,
        {
            vf: Simplex(vf, 0, ()),
            vl: Simplex(vl, 0, ()),
            "e": Simplex("e", 1, (vl, vf)),
        },
        {vf: names[0], vl: names[1]},
    )
    x.validate()
    return x


def edge_db(x: Schema, rows: list[tuple], vf="vF", vl="vL") -> Database:
    """Database on an edge schema from explicit (a, b) edge rows; vertex
    sections are the distinct values, edge keys are 'a|b' strings."""
    sig_e = x.simple_schema_of("e")
    sig_f = x.simple_schema_of(vf)
    sig_l = x.simple_schema_of(vl)
    lefts = sorted({a for a, _ in rows}, key=str)
    rights = sorted({b for _, b in rows}, key=str)
    key = lambda v: str(v)
    sections = {
        vf: tuple(key(a) for a in lefts),
        vl: tuple(key(b) for b in rights),
        "e": tuple(f"{a}|{b}" for a, b in rows),
    }
    records = {
        vf: {key(a): rec(sig_f, a) for a in lefts},
        vl: {key(b): rec(sig_l, b) for b in rights},
        "e": {f"{a}|{b}": rec(sig_e, a, b) for a, b in rows},
    }
    restrictions = {
        ("e", 0): {f"{a}|{b}": key(b) for a, b in rows},
        ("e", 1): {f"{a}|{b}": key(a) for a, b in rows},
    }
    db = make_database(x, sections, restrictions, records)
    assert db.validate() == []
    return db


def named_rows(t: Table) -> list[dict]:
    """Rows of a table as attribute-name dicts, order-insensitive."""
    return [
        dict(zip(t.schema.attr_names, t.row(k).payloads())) for k in t.keys
    ]


def multiset(dicts) -> dict:
    out: dict = {}
    for d in dicts:
        key = tuple(sorted(d.items()))
        out[key] = out.get(key, 0) + 1
    return out


def random_table(rng: random.Random, sigma: SimpleSchema, max_rows=5) -> Table:
    domains = {
        "Color": ["red", "green", "blue"],
        "Bool": [False, True],
        "Str": ["a", "b", "c", "d"],
        "Int": [0, 1, 2, 3],
    }
    n = rng.randint(1, max_rows)
    rows = {
        f"r{i}": [rng.choice(domains[t]) for _, t in sigma.attributes]
        for i in range(n)
    }
    return make_table(sigma, rows)
