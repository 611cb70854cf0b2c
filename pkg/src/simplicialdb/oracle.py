"""Brute-force reference engine on explicit row sets.

Deliberately independent of the categorical machinery: this module works
on plain dicts and tuples and must not import the schema, keysheaf, or
database modules.  Exponential behavior is acceptable here.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import TypeMismatch, UnknownAttribute


@dataclass
class FlatTable:
    columns: tuple[tuple[str, str], ...]  # (name, type)
    rows: dict[str, tuple]  # key -> tuple of payloads

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.columns)

    def position(self, name: str) -> int:
        for i, (n, _) in enumerate(self.columns):
            if n == name:
                return i
        raise UnknownAttribute(f"no column {name!r}")


def oracle_equijoin(
    a: FlatTable, b: FlatTable, shared: list[tuple[str, str]]
) -> FlatTable:
    """Nested-loop equi-join on paired columns, keeping key pairs.

    Result columns: all of a, then b's columns that are not paired.
    """
    for ca, cb in shared:
        ta = a.columns[a.position(ca)][1]
        tb = b.columns[b.position(cb)][1]
        if ta != tb:
            raise TypeMismatch(f"join columns {ca!r}, {cb!r} differ in type")
    paired_b = {cb for _, cb in shared}
    keep_b = [i for i, (n, _) in enumerate(b.columns) if n not in paired_b]
    columns = a.columns + tuple(b.columns[i] for i in keep_b)
    rows: dict[str, tuple] = {}
    for ka, ra in a.rows.items():
        for kb, rb in b.rows.items():
            if all(
                ra[a.position(ca)] == rb[b.position(cb)] for ca, cb in shared
            ):
                rows[f"({ka},{kb})"] = ra + tuple(rb[i] for i in keep_b)
    return FlatTable(columns, rows)


def oracle_select(t: FlatTable, predicate: FlatTable) -> FlatTable:
    """Rows of t whose projection onto the predicate's columns occurs in
    the predicate; original keys are kept."""
    positions = [t.position(n) for n in predicate.names]
    wanted = {tuple(r) for r in predicate.rows.values()}
    rows = {
        k: r
        for k, r in t.rows.items()
        if tuple(r[p] for p in positions) in wanted
    }
    return FlatTable(t.columns, rows)


def oracle_project(t: FlatTable, names) -> FlatTable:
    positions = [t.position(n) for n in names]
    columns = tuple(t.columns[p] for p in positions)
    rows = {k: tuple(r[p] for p in positions) for k, r in t.rows.items()}
    return FlatTable(columns, rows)


def oracle_dedupe(t: FlatTable) -> FlatTable:
    seen: dict[tuple, str] = {}
    for k, r in t.rows.items():
        seen.setdefault(tuple(r), k)
    rows = {k: r for k, r in t.rows.items() if seen[tuple(r)] == k}
    return FlatTable(t.columns, rows)


def oracle_matching_families(
    faces: dict[str, tuple[str, ...]],
    sections: dict[str, tuple[str, ...]],
    restrictions: dict[tuple[str, int], dict[str, str]],
) -> list[dict[str, str]]:
    """All compatible key assignments, by raw enumeration.

    faces lists each simplex's ordered face ids (empty for vertices).
    Enumerates the full product over maximal simplices and filters by
    comparing every derived face key.
    """
    # transitive face sets determine maximality
    def descend(sid: str) -> set:
        out = set()
        stack = [sid]
        while stack:
            cur = stack.pop()
            for f in faces[cur]:
                if f not in out:
                    out.add(f)
                    stack.append(f)
        return out

    below: dict[str, set] = {sid: descend(sid) for sid in faces}
    maximal = sorted(
        sid for sid in faces if not any(sid in below[o] for o in faces)
    )
    if not maximal:
        return [{}]

    def spread(sid: str, key: str) -> dict[str, str] | None:
        assign = {}
        stack = [(sid, key)]
        while stack:
            s, k = stack.pop()
            if s in assign:
                if assign[s] != k:
                    return None
                continue
            assign[s] = k
            for i, f in enumerate(faces[s]):
                stack.append((f, restrictions[(s, i)][k]))
        return assign

    out = []
    for combo in product(*(sections[m] for m in maximal)):
        merged: dict[str, str] = {}
        ok = True
        for m, key in zip(maximal, combo):
            local = spread(m, key)
            if local is None:
                ok = False
                break
            for s, k in local.items():
                if merged.setdefault(s, k) != k:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(merged)
    out.sort(key=lambda a: tuple(a[m] for m in maximal))
    return out
