"""Key sheaves on a schema, the data map, and the migration functors.

A key sheaf assigns a finite key set to every simplex and a restriction
map to every face arrow; the data map sends each key to a record on the
simplex's vertex columns.  Pushforwards are kept finite by a cylinder
representation: rows constrain only some vertex positions and leave the
rest free, and materialization enumerates free positions only when their
types are enumerable.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .errors import NonFiniteResult, NotMonic, ValidationError
from .simple_schema import RecordTuple
from .schema import (
    Schema,
    SchemaMorphism,
    Subschema,
    closure,
    is_monic,
    preimage_subschema,
)
from .typespec import Value, enumerate_domain, render_value


@dataclass
class KeySheaf:
    base: Schema
    sections: dict[str, tuple[str, ...]]
    restrictions: dict[tuple[str, int], dict[str, str]]

    def restrict(self, sid: str, i: int, key: str) -> str:
        return self.restrictions[(sid, i)][key]

    def iterated_restrict(self, sid: str, key: str, positions) -> tuple[str, str]:
        """Restrict a key to the sub-simplex on the given vertex positions."""
        s = self.base.simplices[sid]
        keep = set(positions)
        for i in sorted(set(range(s.dim + 1)) - keep, reverse=True):
            key = self.restrict(sid, i, key)
            sid = self.base.simplices[sid].faces[i]
        return sid, key

    def validate(self) -> list[str]:
        problems = []
        for sid, s in self.base.simplices.items():
            if sid not in self.sections:
                problems.append(f"no section at {sid!r}")
                continue
            keys = self.sections[sid]
            if len(set(keys)) != len(keys):
                problems.append(f"duplicate keys at {sid!r}")
            for i in range(s.dim + 1 if s.dim else 0):
                rmap = self.restrictions.get((sid, i))
                if rmap is None:
                    problems.append(f"missing restriction ({sid!r}, {i})")
                    continue
                fkeys = set(self.sections.get(s.faces[i], ()))
                for k in keys:
                    if k not in rmap:
                        problems.append(f"restriction ({sid!r}, {i}) misses {k!r}")
                    elif rmap[k] not in fkeys:
                        problems.append(
                            f"restriction ({sid!r}, {i}) sends {k!r} outside"
                        )
        # functoriality on generating pairs
        for sid, s in self.base.simplices.items():
            if s.dim < 2 or sid not in self.sections:
                continue
            for j in range(s.dim + 1):
                for i in range(j):
                    for k in self.sections[sid]:
                        try:
                            left = self.restrict(s.faces[j], i, self.restrict(sid, j, k))
                            right = self.restrict(s.faces[i], j - 1, self.restrict(sid, i, k))
                        except KeyError:
                            continue  # reported above
                        if left != right:
                            problems.append(
                                f"faces do not commute at {sid!r}, key {k!r}, ({i},{j})"
                            )
        return problems


@dataclass
class DataMap:
    sheaf: KeySheaf
    assign: dict[str, dict[str, RecordTuple]]

    def record(self, sid: str, key: str) -> RecordTuple:
        return self.assign[sid][key]

    def validate(self) -> list[str]:
        problems = []
        K = self.sheaf
        for sid, s in K.base.simplices.items():
            sigma = K.base.simple_schema_of(sid)
            rows = self.assign.get(sid, {})
            for k in K.sections.get(sid, ()):
                r = rows.get(k)
                if r is None:
                    problems.append(f"no record for key {k!r} at {sid!r}")
                    continue
                if len(r.values) != len(sigma):
                    problems.append(f"record arity wrong for {k!r} at {sid!r}")
                    continue
                for i in range(s.dim + 1 if s.dim else 0):
                    try:
                        fk = K.restrict(sid, i, k)
                    except KeyError:
                        continue
                    fr = self.assign.get(s.faces[i], {}).get(fk)
                    want = r.payloads()[:i] + r.payloads()[i + 1 :]
                    if fr is None or fr.payloads() != want:
                        problems.append(
                            f"data not natural at {sid!r}, key {k!r}, face {i}"
                        )
        return problems


def validate_sheaf_and_data(K: KeySheaf, tau: DataMap) -> list[str]:
    return K.validate() + tau.validate()


# ---------------------------------------------------------------------------
# evaluation (matching families)

Family = tuple[str, dict[str, str]]  # (serialized key, simplex id -> key)


def family_key(sub: Subschema, assign: dict[str, str]) -> str:
    parts = [f"{sid}:{assign[sid]}" for sid in sorted(sub.maximal())]
    return "(" + ",".join(parts) + ")"


def matching_families(K: KeySheaf, sub: Subschema) -> list[Family]:
    """All compatible key choices over a subschema.

    Value on the empty subschema is the canonical singleton.
    """
    maximal = sorted(sub.maximal())
    if not maximal:
        return [("()", {})]
    x = K.base

    def propagate(sid: str, key: str, assign: dict[str, str]) -> bool:
        stack = [(sid, key)]
        while stack:
            s, k = stack.pop()
            if s in assign:
                if assign[s] != k:
                    return False
                continue
            assign[s] = k
            simp = x.simplices[s]
            for i in range(simp.dim + 1 if simp.dim else 0):
                stack.append((simp.faces[i], K.restrict(s, i, k)))
        return True

    out: list[Family] = []

    def rec(i: int, assign: dict[str, str]):
        if i == len(maximal):
            out.append((family_key(sub, assign), dict(assign)))
            return
        sid = maximal[i]
        for key in K.sections[sid]:
            trial = dict(assign)
            if propagate(sid, key, trial):
                rec(i + 1, trial)

    rec(0, {})
    out.sort(key=lambda f: f[0])
    return out


def evaluate_on_subschema(K: KeySheaf, sub: Subschema) -> list[Family]:
    return matching_families(K, sub)


# ---------------------------------------------------------------------------
# migration functors on key sheaves


def pullback(
    f: SchemaMorphism, K: KeySheaf, tau: DataMap | None = None
) -> tuple[KeySheaf, DataMap | None]:
    """f* : sheaves on the target of f become sheaves on its source.

    The section at a simplex is the section at its assigned target
    simplex; records repeat coordinates along the collapse map.
    """
    y = f.source
    sections = {}
    restrictions = {}
    for sid, s in y.simplices.items():
        tid, alpha = f.assign[sid]
        sections[sid] = K.sections[tid]
        for i in range(s.dim + 1 if s.dim else 0):
            shrunk = alpha[:i] + alpha[i + 1 :]
            kept = sorted(set(shrunk))
            restrictions[(sid, i)] = {
                k: K.iterated_restrict(tid, k, kept)[1] for k in K.sections[tid]
            }
    out = KeySheaf(y, sections, restrictions)
    if tau is None:
        return out, None
    assign = {}
    for sid in y.simplices:
        tid, alpha = f.assign[sid]
        sigma = y.simple_schema_of(sid)
        assign[sid] = {
            k: RecordTuple(
                sigma, tuple(tau.record(tid, k).values[a] for a in alpha)
            )
            for k in K.sections[tid]
        }
    return out, DataMap(out, assign)


def pushforward_star(f: SchemaMorphism, K: KeySheaf):
    """f_* as an evaluator on subschemas of the target."""

    def evaluator(v: Subschema) -> list[Family]:
        return matching_families(K, preimage_subschema(f, v))

    return evaluator


def extend_by_empty(
    f: SchemaMorphism, K: KeySheaf, tau: DataMap | None = None
) -> tuple[KeySheaf, DataMap | None]:
    """f_! : copy sections onto the image of a mono, empty elsewhere."""
    if not is_monic(f):
        raise NotMonic("extension by the empty table needs a monic schema map")
    x = f.target
    image_of = {f.assign[sid][0]: sid for sid in f.source.simplices}
    sections = {}
    restrictions = {}
    for tid, t in x.simplices.items():
        src = image_of.get(tid)
        sections[tid] = K.sections[src] if src is not None else ()
        for i in range(t.dim + 1 if t.dim else 0):
            if src is not None:
                rmap = K.restrictions[(src, i)]
                restrictions[(tid, i)] = dict(rmap)
            else:
                restrictions[(tid, i)] = {}
    out = KeySheaf(x, sections, restrictions)
    if tau is None:
        return out, None
    assign = {}
    for tid in x.simplices:
        src = image_of.get(tid)
        sigma = x.simple_schema_of(tid)
        if src is None:
            assign[tid] = {}
        else:
            assign[tid] = {
                k: RecordTuple(sigma, tau.record(src, k).values)
                for k in K.sections[src]
            }
    return out, DataMap(out, assign)


def image_data(K: KeySheaf, tau: DataMap) -> tuple[KeySheaf, DataMap]:
    """One canonical key per distinct record, per simplex; restrictions
    descend because the data map is natural."""
    x = K.base
    rep: dict[str, dict[str, str]] = {}  # sid -> old key -> kept key
    sections = {}
    for sid in x.simplices:
        seen: dict[tuple, str] = {}
        rep[sid] = {}
        for k in K.sections[sid]:
            p = tau.record(sid, k).payloads()
            seen.setdefault(p, k)
            rep[sid][k] = seen[p]
        sections[sid] = tuple(
            k for k in K.sections[sid] if rep[sid][k] == k
        )
    restrictions = {}
    for (sid, i), rmap in K.restrictions.items():
        fid = x.simplices[sid].faces[i]
        restrictions[(sid, i)] = {
            k: rep[fid][rmap[k]] for k in sections[sid]
        }
    out = KeySheaf(x, sections, restrictions)
    assign = {
        sid: {k: tau.record(sid, k) for k in sections[sid]} for sid in x.simplices
    }
    return out, DataMap(out, assign)


# ---------------------------------------------------------------------------
# cylinders


@dataclass
class CylinderSheaf:
    """Partially constrained sections: each row fixes values only at the
    constrained vertex positions of its simplex and is free elsewhere."""

    base: Schema
    constrained: dict[str, tuple[int, ...]]  # sorted vertex positions
    rows: dict[str, dict[str, tuple[Value, ...]]]  # aligned with constrained
    restrictions: dict[tuple[str, int], dict[str, str]]

    def validate(self) -> list[str]:
        problems = []
        x = self.base
        for sid, s in x.simplices.items():
            cons = self.constrained.get(sid)
            if cons is None or any(p < 0 or p > s.dim for p in cons):
                problems.append(f"bad constrained positions at {sid!r}")
                continue
            for k, vals in self.rows.get(sid, {}).items():
                if len(vals) != len(cons):
                    problems.append(f"row {k!r} at {sid!r} has wrong arity")
            for i in range(s.dim + 1 if s.dim else 0):
                fid = s.faces[i]
                rmap = self.restrictions.get((sid, i), {})
                fcons = self.constrained.get(fid, ())
                # positions of the face as positions of the parent
                lift = {p: (p if p < i else p + 1) for p in fcons}
                for k in self.rows.get(sid, {}):
                    fk = rmap.get(k)
                    if fk is None or fk not in self.rows.get(fid, {}):
                        problems.append(f"restriction ({sid!r},{i}) broken at {k!r}")
                        continue
                    prow = dict(zip(cons, self.rows[sid][k]))
                    frow = dict(zip(fcons, self.rows[fid][fk]))
                    for p in fcons:
                        if lift[p] not in prow:
                            problems.append(
                                f"face {fid!r} constrains {p} beyond its parent"
                            )
                        elif prow[lift[p]].payload != frow[p].payload:
                            problems.append(
                                f"restriction ({sid!r},{i}) breaks projection at {k!r}"
                            )
        return problems


def universal_cylinder(x: Schema) -> CylinderSheaf:
    """The terminal object: one fully free row everywhere."""
    rows = {sid: {"*": ()} for sid in x.simplices}
    restrictions = {}
    for sid, s in x.simplices.items():
        for i in range(s.dim + 1 if s.dim else 0):
            restrictions[(sid, i)] = {"*": "*"}
    return CylinderSheaf(x, {sid: () for sid in x.simplices}, rows, restrictions)


def cylinder_of_database(K: KeySheaf, tau: DataMap) -> CylinderSheaf:
    """Fully constrained cylinder carrying the database's own rows."""
    x = K.base
    constrained = {
        sid: tuple(range(s.dim + 1)) for sid, s in x.simplices.items()
    }
    rows = {
        sid: {k: tau.record(sid, k).values for k in K.sections[sid]}
        for sid in x.simplices
    }
    restrictions = {key: dict(rmap) for key, rmap in K.restrictions.items()}
    return CylinderSheaf(x, constrained, rows, restrictions)


def _realizations(x: Schema, sid: str, tid: str) -> list[tuple[int, ...]]:
    """Every vertex-position subset of sid spanning tid."""
    n = x.dim_of(sid)
    m = x.dim_of(tid)
    return [
        J
        for J in combinations(range(n + 1), m + 1)
        if x.iterated_face(sid, J) == tid
    ]


def pushforward_plus(
    f: SchemaMorphism, K: KeySheaf, tau: DataMap
) -> tuple[CylinderSheaf, dict[str, dict[str, dict[str, str]]]]:
    """f_+ : the right transport, as a cylinder on the target schema.

    At each target simplex the rows are the matching families over the
    preimage of its closure; each family constrains the vertex positions
    it reaches, and families prescribing two different values at one
    position are dropped.  Also returns the family behind each row.
    """
    x = f.target
    y = f.source
    constrained: dict[str, tuple[int, ...]] = {}
    rows: dict[str, dict[str, tuple[Value, ...]]] = {}
    fams: dict[str, dict[str, dict[str, str]]] = {}
    preimages: dict[str, Subschema] = {}

    for sid, s in x.simplices.items():
        p = preimage_subschema(f, closure(x, [sid]))
        preimages[sid] = p
        # which positions of sid does f reach, and via which placements
        placements = []  # (source simplex, alpha, realization J)
        positions = set()
        for ysid in sorted(p.members):
            tid, alpha = f.assign[ysid]
            for J in _realizations(x, sid, tid):
                placements.append((ysid, alpha, J))
                positions.update(J)
        cons = tuple(sorted(positions))
        constrained[sid] = cons
        rows[sid] = {}
        fams[sid] = {}
        for serial, assign in matching_families(K, p):
            vals: dict[int, Value] = {}
            ok = True
            for ysid, alpha, J in placements:
                rec = tau.record(ysid, assign[ysid])
                for q, a in enumerate(alpha):
                    pos = J[a]
                    v = rec.values[q]
                    if pos in vals and vals[pos].payload != v.payload:
                        ok = False
                        break
                    vals[pos] = v
                if not ok:
                    break
            if not ok:
                continue
            rows[sid][serial] = tuple(vals[p] for p in cons)
            fams[sid][serial] = assign

    restrictions: dict[tuple[str, int], dict[str, str]] = {}
    for sid, s in x.simplices.items():
        for i in range(s.dim + 1 if s.dim else 0):
            fid = s.faces[i]
            sub = preimages[fid]
            rmap = {}
            for serial, assign in fams[sid].items():
                restricted = {ysid: assign[ysid] for ysid in sub.members}
                rmap[serial] = family_key(sub, restricted)
            restrictions[(sid, i)] = rmap
    return CylinderSheaf(x, constrained, rows, restrictions), fams


def pushforward_plus_keys(f: SchemaMorphism, K: KeySheaf) -> KeySheaf:
    """f_+ on bare key sheaves: matching families over preimages of
    closures, with no record filtering."""
    x = f.target
    sections = {}
    fams: dict[str, dict[str, dict[str, str]]] = {}
    preimages = {}
    for sid in x.simplices:
        p = preimage_subschema(f, closure(x, [sid]))
        preimages[sid] = p
        families = matching_families(K, p)
        sections[sid] = tuple(serial for serial, _ in families)
        fams[sid] = {serial: assign for serial, assign in families}
    restrictions = {}
    for sid, s in x.simplices.items():
        for i in range(s.dim + 1 if s.dim else 0):
            sub = preimages[s.faces[i]]
            restrictions[(sid, i)] = {
                serial: family_key(
                    sub, {ysid: assign[ysid] for ysid in sub.members}
                )
                for serial, assign in fams[sid].items()
            }
    return KeySheaf(x, sections, restrictions)


def enumerate_sheaf_morphisms(a: KeySheaf, b: KeySheaf) -> list[dict]:
    """Every natural map of key sheaves on a shared base (exhaustive; meant
    for micro instances only)."""
    x = a.base
    order = sorted(x.simplices, key=lambda sid: (-x.dim_of(sid), sid))
    out: list[dict] = []

    def natural_so_far(assign: dict) -> bool:
        for sid in assign:
            s = x.simplices[sid]
            for i in range(s.dim + 1 if s.dim else 0):
                fid = s.faces[i]
                if fid not in assign:
                    continue
                for k in a.sections[sid]:
                    if assign[fid][a.restrict(sid, i, k)] != b.restrict(
                        sid, i, assign[sid][k]
                    ):
                        return False
        return True

    def rec(i: int, assign: dict):
        if i == len(order):
            out.append({sid: dict(m) for sid, m in assign.items()})
            return
        sid = order[i]
        src = a.sections[sid]
        tgt = b.sections[sid]
        if not src:
            assign[sid] = {}
            if natural_so_far(assign):
                rec(i + 1, assign)
            del assign[sid]
            return
        if not tgt:
            return
        for combo in product(tgt, repeat=len(src)):
            assign[sid] = dict(zip(src, combo))
            if natural_so_far(assign):
                rec(i + 1, assign)
            del assign[sid]

    rec(0, {})
    return out


# ---------------------------------------------------------------------------
# limits of cylinders over a fixed schema


def sheaf_limit(
    objects: dict[str, CylinderSheaf],
    arrows: list[tuple[str, str, dict[str, dict[str, str]]]],
) -> tuple[CylinderSheaf, dict[str, dict[str, dict[str, str]]]]:
    """Finite limit of cylinders on one schema.

    arrows carry per-simplex key maps.  Rows of the limit are key tuples
    satisfying every arrow, with constraints unioned and partial records
    merged; tuples whose records disagree are dropped.  Returns the limit
    and per-object projections (tag -> simplex -> limit key -> key).
    """
    tags = sorted(objects)
    if not tags:
        raise ValidationError("limit of an empty cylinder diagram has no base")
    x = objects[tags[0]].base
    dst_tags = {b for _, b, _ in arrows}
    key_tags = [t for t in tags if t not in dst_tags] or tags

    constrained: dict[str, tuple[int, ...]] = {}
    rows: dict[str, dict[str, tuple[Value, ...]]] = {}
    tuples: dict[str, dict[str, dict[str, str]]] = {}  # sid -> key -> tag -> comp
    proj: dict[str, dict[str, dict[str, str]]] = {t: {} for t in tags}

    for sid in x.simplices:
        cons = sorted({p for t in tags for p in objects[t].constrained[sid]})
        constrained[sid] = tuple(cons)
        rows[sid] = {}
        tuples[sid] = {}
        for t in tags:
            proj[t][sid] = {}
        pools = [list(objects[t].rows[sid]) for t in tags]
        for combo in product(*pools):
            comp = dict(zip(tags, combo))
            if any(m[sid][comp[a]] != comp[b] for a, b, m in arrows):
                continue
            vals: dict[int, Value] = {}
            ok = True
            for t in tags:
                for p, v in zip(objects[t].constrained[sid], objects[t].rows[sid][comp[t]]):
                    if p in vals and vals[p].payload != v.payload:
                        ok = False
                        break
                    vals[p] = v
                if not ok:
                    break
            if not ok:
                continue
            key = "(" + ",".join(comp[t] for t in key_tags) + ")"
            rows[sid][key] = tuple(vals[p] for p in cons)
            tuples[sid][key] = comp
            for t in tags:
                proj[t][sid][key] = comp[t]

    restrictions: dict[tuple[str, int], dict[str, str]] = {}
    for sid, s in x.simplices.items():
        for i in range(s.dim + 1 if s.dim else 0):
            rmap = {}
            for key, comp in tuples[sid].items():
                fcomp = {
                    t: objects[t].restrictions[(sid, i)][comp[t]] for t in tags
                }
                rmap[key] = "(" + ",".join(fcomp[t] for t in key_tags) + ")"
            restrictions[(sid, i)] = rmap
    return CylinderSheaf(x, constrained, rows, restrictions), proj


# ---------------------------------------------------------------------------
# materialization


def _free_positions(cyl: CylinderSheaf, sid: str) -> list[int]:
    dim = cyl.base.dim_of(sid)
    return [p for p in range(dim + 1) if p not in cyl.constrained[sid]]


def _mat_key(rowkey: str, free_values: tuple[Value, ...]) -> str:
    if not free_values:
        return rowkey
    return rowkey + "|" + ",".join(render_value(v) for v in free_values)


def materialize_rows(
    cyl: CylinderSheaf, sid: str
) -> tuple[tuple[str, ...], dict[str, RecordTuple]]:
    """Enumerate the rows of one simplex, filling free positions from
    their (enumerable) domains."""
    x = cyl.base
    sigma = x.simple_schema_of(sid)
    free = _free_positions(cyl, sid)
    vids = x.vertices_of(sid)
    domains = []
    for p in free:
        type_name = x.vertex_data[vids[p]][1]
        if not x.spec.domain(type_name).enumerable:
            raise NonFiniteResult(
                f"free position {p} at {sid!r} ranges over the infinite "
                f"type {type_name!r}"
            )
        domains.append(enumerate_domain(x.spec, type_name))
    keys: list[str] = []
    records: dict[str, RecordTuple] = {}
    for rowkey in cyl.rows[sid]:
        partial = dict(zip(cyl.constrained[sid], cyl.rows[sid][rowkey]))
        for combo in product(*domains):
            vals = dict(partial)
            vals.update(zip(free, combo))
            key = _mat_key(rowkey, combo)
            keys.append(key)
            records[key] = RecordTuple(
                sigma, tuple(vals[p] for p in range(len(vids)))
            )
    keys.sort()
    return tuple(keys), records


def materialize_cylinder(
    cyl: CylinderSheaf,
) -> tuple[KeySheaf, DataMap, dict[str, dict[str, str]]]:
    """Full materialization into a key sheaf plus data map, with a
    provenance map from materialized keys back to cylinder row keys."""
    x = cyl.base
    sections = {}
    assign = {}
    provenance: dict[str, dict[str, str]] = {}
    for sid in x.simplices:
        keys, records = materialize_rows(cyl, sid)
        sections[sid] = keys
        assign[sid] = records
        free = _free_positions(cyl, sid)
        provenance[sid] = {}
        domains = [
            enumerate_domain(x.spec, x.vertex_data[x.vertices_of(sid)[p]][1])
            for p in free
        ]
        for rowkey in cyl.rows[sid]:
            for combo in product(*domains):
                provenance[sid][_mat_key(rowkey, combo)] = rowkey
    restrictions: dict[tuple[str, int], dict[str, str]] = {}
    for sid, s in x.simplices.items():
        free = _free_positions(cyl, sid)
        for i in range(s.dim + 1 if s.dim else 0):
            fid = s.faces[i]
            ffree = _free_positions(cyl, fid)
            rmap = {}
            for rowkey in cyl.rows[sid]:
                partial = dict(zip(cyl.constrained[sid], cyl.rows[sid][rowkey]))
                frow = cyl.restrictions[(sid, i)][rowkey]
                domains = [
                    enumerate_domain(
                        x.spec, x.vertex_data[x.vertices_of(sid)[p]][1]
                    )
                    for p in free
                ]
                for combo in product(*domains):
                    vals = dict(partial)
                    vals.update(zip(free, combo))
                    fvals = tuple(
                        vals[p if p < i else p + 1] for p in ffree
                    )
                    rmap[_mat_key(rowkey, combo)] = _mat_key(frow, fvals)
            restrictions[(sid, i)] = rmap
    out = KeySheaf(x, sections, restrictions)
    return out, DataMap(out, assign), provenance
