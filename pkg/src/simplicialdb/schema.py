"""Finite labeled semi-simplicial schemas.

A schema is presented by its non-degenerate simplices with explicit
ordered face maps; vertices carry (attribute name, type name) labels.
Morphisms assign to each simplex a target simplex together with a
surjective order-preserving collapse map, so degeneracies never need to
be stored.  Colimits are computed by a union-find quotient that tracks
degenerate simplices symbolically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import (
    CompositionError,
    LabelConflict,
    RepresentationError,
    TooLarge,
    ValidationError,
)
from .simple_schema import SimpleSchema
from .typespec import TypeSpec

# A possibly-degenerate simplex is a pair (simplex_id, alpha) where alpha
# maps the positions of the degenerate simplex onto the positions of the
# stored non-degenerate one.  Identity alphas mean "not degenerate".
Pair = tuple[str, tuple[int, ...]]


@dataclass(frozen=True)
class Simplex:
    id: str
    dim: int
    faces: tuple[str, ...]  # n+1 ids of dimension n-1; empty for vertices


@dataclass
class Schema:
    spec: TypeSpec
    simplices: dict[str, Simplex]
    vertex_data: dict[str, tuple[str, str]]  # vertex id -> (attr, type)
    _vertex_cache: dict[str, tuple[str, ...]] = field(
        default_factory=dict, repr=False, compare=False
    )

    def validate(self) -> None:
        for s in self.simplices.values():
            if s.dim == 0:
                if s.faces:
                    raise ValidationError(f"vertex {s.id!r} must have no faces")
                if s.id not in self.vertex_data:
                    raise ValidationError(f"vertex {s.id!r} has no label")
                _, t = self.vertex_data[s.id]
                self.spec.domain(t)
                continue
            if len(s.faces) != s.dim + 1:
                raise ValidationError(f"simplex {s.id!r} needs {s.dim + 1} faces")
            for fid in s.faces:
                f = self.simplices.get(fid)
                if f is None or f.dim != s.dim - 1:
                    raise ValidationError(
                        f"face {fid!r} of {s.id!r} missing or of wrong dimension"
                    )
        for s in self.simplices.values():
            if s.dim < 2:
                continue
            for j in range(s.dim + 1):
                for i in range(j):
                    left = self.simplices[self.simplices[s.faces[j]].id].faces[i]
                    right = self.simplices[s.faces[i]].faces[j - 1]
                    if left != right:
                        raise ValidationError(
                            f"simplicial identity fails on {s.id!r} at ({i},{j})"
                        )

    def dim_of(self, sid: str) -> int:
        return self.simplices[sid].dim

    def vertices_of(self, sid: str) -> tuple[str, ...]:
        """Ordered vertex tuple of a simplex."""
        cached = self._vertex_cache.get(sid)
        if cached is not None:
            return cached
        s = self.simplices[sid]
        if s.dim == 0:
            out: tuple[str, ...] = (sid,)
        else:
            head = self.vertices_of(s.faces[1])[0]
            out = (head,) + self.vertices_of(s.faces[0])
        self._vertex_cache[sid] = out
        return out

    def vertex_ids(self) -> list[str]:
        return sorted(v for v, s in self.simplices.items() if s.dim == 0)

    def simple_schema_of(self, sid: str) -> SimpleSchema:
        """Column list spanned by a simplex's vertex tuple.

        Repeated vertex names are disambiguated positionally so records
        stay positional.
        """
        vids = self.vertices_of(sid)
        names = [self.vertex_data[v][0] for v in vids]
        attrs = []
        for i, (name, v) in enumerate(zip(names, vids)):
            if names.count(name) > 1:
                name = f"{name}#{i}"
            attrs.append((name, self.vertex_data[v][1]))
        return SimpleSchema(self.spec, tuple(attrs))

    def iterated_face(self, sid: str, positions: tuple[int, ...]) -> str:
        """Sub-simplex spanned by the given (sorted) vertex positions."""
        s = self.simplices[sid]
        keep = set(positions)
        drop = sorted(set(range(s.dim + 1)) - keep, reverse=True)
        cur = sid
        for i in drop:
            cur = self.simplices[cur].faces[i]
        return cur

    def pair_face(self, pair: Pair, i: int) -> Pair:
        """i-th face of a possibly-degenerate simplex."""
        sid, alpha = pair
        shrunk = alpha[:i] + alpha[i + 1 :]
        image = sorted(set(shrunk))
        rank = {v: r for r, v in enumerate(image)}
        gamma = tuple(rank[v] for v in shrunk)
        return (self.iterated_face(sid, tuple(image)), gamma)

    def all_pairs(self, max_dim: int) -> list[Pair]:
        """Every simplex, degenerate ones included, up to max_dim."""
        out: list[Pair] = []
        for sid, s in self.simplices.items():
            for q in range(s.dim, max_dim + 1):
                for alpha in _surjections(q, s.dim):
                    out.append((sid, alpha))
        return out

    def max_dim(self) -> int:
        return max((s.dim for s in self.simplices.values()), default=-1)


def identity_alpha(dim: int) -> tuple[int, ...]:
    return tuple(range(dim + 1))


def _surjections(q: int, m: int) -> list[tuple[int, ...]]:
    """Order-preserving surjections [q] -> [m]."""
    if m > q:
        return []
    out = []
    # choose the positions (other than 0) where the value steps up
    for steps in combinations(range(1, q + 1), m):
        alpha = []
        v = 0
        stepset = set(steps)
        for j in range(q + 1):
            if j in stepset:
                v += 1
            alpha.append(v)
        out.append(tuple(alpha))
    return out


@dataclass
class SchemaMorphism:
    source: Schema
    target: Schema
    assign: dict[str, Pair]  # source simplex id -> (target id, alpha)

    def apply(self, pair: Pair) -> Pair:
        sid, alpha = pair
        tid, beta = self.assign[sid]
        return (tid, tuple(beta[a] for a in alpha))

    def validate(self, strict_order: bool = True) -> None:
        for sid, s in self.source.simplices.items():
            if sid not in self.assign:
                raise ValidationError(f"no assignment for simplex {sid!r}")
            tid, alpha = self.assign[sid]
            t = self.target.simplices[tid]
            if len(alpha) != s.dim + 1 or set(alpha) != set(range(t.dim + 1)):
                raise ValidationError(f"collapse map at {sid!r} is not surjective")
            if strict_order and any(a > b for a, b in zip(alpha, alpha[1:])):
                raise ValidationError(f"collapse map at {sid!r} not order-preserving")
            if s.dim == 0:
                if self.source.vertex_data[sid][1] != self.target.vertex_data[tid][1]:
                    raise LabelConflict(f"vertex {sid!r} changes type label")
            for i in range(s.dim + 1):
                if s.dim == 0:
                    break
                expected = self.target.pair_face(self.assign[sid], i)
                got = self.assign[s.faces[i]]
                if expected != got:
                    raise ValidationError(
                        f"face {i} of {sid!r} is not respected by the morphism"
                    )


def identity_schema_morphism(x: Schema) -> SchemaMorphism:
    return SchemaMorphism(
        x, x, {sid: (sid, identity_alpha(s.dim)) for sid, s in x.simplices.items()}
    )


def compose_schema_morphisms(
    g: SchemaMorphism, f: SchemaMorphism
) -> SchemaMorphism:
    """g after f."""
    if f.target is not g.source and f.target != g.source:
        raise CompositionError("target of f must equal source of g")
    return SchemaMorphism(
        f.source, g.target, {sid: g.apply(f.assign[sid]) for sid in f.assign}
    )


def is_monic(f: SchemaMorphism) -> bool:
    """Injective on simplices and non-collapsing."""
    targets = []
    for sid, (tid, alpha) in f.assign.items():
        if alpha != identity_alpha(f.source.dim_of(sid)):
            return False
        targets.append(tid)
    return len(set(targets)) == len(targets)


# ---------------------------------------------------------------------------
# construction helpers


def vertex_schema(spec: TypeSpec, vid: str, attr: str, type_name: str) -> Schema:
    return Schema(spec, {vid: Simplex(vid, 0, ())}, {vid: (attr, type_name)})


def simplex_schema(sigma: SimpleSchema) -> Schema:
    """The full simplex on an ordered column list: one simplex per nonempty
    subset of columns (2^n - 1 in total)."""
    n = len(sigma)
    simplices: dict[str, Simplex] = {}
    vertex_data: dict[str, tuple[str, str]] = {}

    def sid(positions: tuple[int, ...]) -> str:
        return "d" + "_".join(str(p) for p in positions)

    for size in range(1, n + 1):
        for positions in combinations(range(n), size):
            if size == 1:
                simplices[sid(positions)] = Simplex(sid(positions), 0, ())
                name, type_name = sigma.attributes[positions[0]]
                vertex_data[sid(positions)] = (name, type_name)
            else:
                faces = tuple(
                    sid(positions[:i] + positions[i + 1 :]) for i in range(size)
                )
                simplices[sid(positions)] = Simplex(sid(positions), size - 1, faces)
    return Schema(sigma.spec, simplices, vertex_data)


def top_simplex_id(x: Schema) -> str:
    top = max(x.simplices.values(), key=lambda s: s.dim)
    return top.id


# ---------------------------------------------------------------------------
# subschemas


@dataclass(frozen=True)
class Subschema:
    parent: Schema
    members: frozenset[str]

    def __post_init__(self):
        for sid in self.members:
            for fid in self.parent.simplices[sid].faces:
                if fid not in self.members:
                    raise ValidationError(
                        f"subschema not face-closed: {sid!r} without {fid!r}"
                    )

    def maximal(self) -> list[str]:
        covered = set()
        for sid in self.members:
            covered.update(self.parent.simplices[sid].faces)
        # a member is maximal iff it is not an (iterated) face of another
        out = []
        all_faces = set()
        for sid in self.members:
            s = self.parent.simplices[sid]
            for size in range(1, s.dim + 1):
                for positions in combinations(range(s.dim + 1), size):
                    all_faces.add(self.parent.iterated_face(sid, positions))
        for sid in sorted(self.members):
            if sid not in all_faces:
                out.append(sid)
        return out


def closure(x: Schema, sids) -> Subschema:
    members = set()
    stack = list(sids)
    while stack:
        sid = stack.pop()
        if sid in members:
            continue
        members.add(sid)
        stack.extend(x.simplices[sid].faces)
    return Subschema(x, frozenset(members))


def full_subschema(x: Schema) -> Subschema:
    return Subschema(x, frozenset(x.simplices))


def empty_subschema(x: Schema) -> Subschema:
    return Subschema(x, frozenset())


def sub_union(a: Subschema, b: Subschema) -> Subschema:
    if a.parent is not b.parent and a.parent != b.parent:
        raise CompositionError("subschemas of different parents")
    return Subschema(a.parent, a.members | b.members)


def sub_intersect(a: Subschema, b: Subschema) -> Subschema:
    if a.parent is not b.parent and a.parent != b.parent:
        raise CompositionError("subschemas of different parents")
    return Subschema(a.parent, a.members & b.members)


def enumerate_subschemas(x: Schema) -> list[Subschema]:
    """All face-closed simplex subsets; capped to keep enumeration sane."""
    if len(x.simplices) > 20:
        raise TooLarge("schema too large to enumerate subschemas")
    order = sorted(x.simplices, key=lambda sid: (x.dim_of(sid), sid))
    out: list[Subschema] = []

    def rec(i: int, chosen: frozenset[str]):
        if i == len(order):
            out.append(Subschema(x, chosen))
            return
        sid = order[i]
        rec(i + 1, chosen)
        if all(f in chosen for f in x.simplices[sid].faces):
            rec(i + 1, chosen | {sid})

    rec(0, frozenset())
    return out


def image_subschema(f: SchemaMorphism, s: Subschema) -> Subschema:
    return closure(f.target, [f.assign[sid][0] for sid in s.members])


def preimage_subschema(f: SchemaMorphism, t: Subschema) -> Subschema:
    members = frozenset(
        sid for sid in f.source.simplices if f.assign[sid][0] in t.members
    )
    return Subschema(f.source, members)


def subschema_as_schema(s: Subschema) -> tuple[Schema, SchemaMorphism]:
    """A subschema as a standalone schema, with its inclusion."""
    x = s.parent
    simplices = {sid: x.simplices[sid] for sid in s.members}
    vertex_data = {
        sid: x.vertex_data[sid] for sid in s.members if x.dim_of(sid) == 0
    }
    sub = Schema(x.spec, simplices, vertex_data)
    inc = SchemaMorphism(
        sub, x, {sid: (sid, identity_alpha(x.dim_of(sid))) for sid in s.members}
    )
    return sub, inc


# ---------------------------------------------------------------------------
# the category of non-degenerate simplices


def nd_category(x: Schema) -> tuple[list[str], list[tuple[str, tuple[int, ...], str]]]:
    """Objects and non-identity arrows (source, kept positions, target)."""
    objects = sorted(x.simplices)
    arrows = []
    for sid in objects:
        n = x.dim_of(sid)
        for size in range(1, n + 1):
            for positions in combinations(range(n + 1), size):
                arrows.append((sid, positions, x.iterated_face(sid, positions)))
    return objects, arrows


# ---------------------------------------------------------------------------
# colimits


def schema_colimit(
    objects: dict[str, Schema],
    arrows: list[tuple[str, str, SchemaMorphism]],
) -> tuple[Schema, dict[str, SchemaMorphism]]:
    """Colimit of a finite diagram of schemas.

    Quotients the tagged disjoint union of all simplices (degeneracies
    tracked symbolically) by the equivalence generated by the arrows.
    Raises RepresentationError if the quotient leaves the semi-simplicial
    world (a non-degenerate class acquiring a degenerate face).
    """
    if not objects:
        spec = TypeSpec({})
        return Schema(spec, {}, {}), {}
    max_dim = max(x.max_dim() for x in objects.values())
    spec = next(iter(objects.values())).spec

    nodes: list[tuple[str, Pair]] = []
    for tag, x in objects.items():
        for pair in x.all_pairs(max_dim):
            nodes.append((tag, pair))
    parent = {n: n for n in nodes}

    def find(n):
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for src, dst, f in arrows:
        for pair in objects[src].all_pairs(max_dim):
            union((src, pair), (dst, f.apply(pair)))

    classes: dict[tuple[str, Pair], list[tuple[str, Pair]]] = {}
    for n in nodes:
        classes.setdefault(find(n), []).append(n)

    def is_identity(pair: Pair, tag: str) -> bool:
        sid, alpha = pair
        return alpha == identity_alpha(objects[tag].dim_of(sid))

    def nd_members(rep):
        return sorted(
            (tag, pair[0])
            for tag, pair in classes[rep]
            if is_identity(pair, tag)
        )

    degenerate = {
        rep: any(not is_identity(pair, tag) for tag, pair in classes[rep])
        for rep in classes
    }

    def class_id(rep) -> str:
        return "~".join(f"{tag}.{sid}" for tag, sid in nd_members(rep))

    rep_of: dict[tuple[str, Pair], tuple[str, Pair]] = {n: find(n) for n in nodes}

    simplices: dict[str, Simplex] = {}
    vertex_data: dict[str, tuple[str, str]] = {}
    for rep, members in classes.items():
        if degenerate[rep]:
            continue
        tag, (sid, _) = members[0]
        x = objects[tag]
        dim = x.dim_of(sid)
        cid = class_id(rep)
        if dim == 0:
            types = {
                objects[t].vertex_data[p[0]][1]
                for t, p in members
                if is_identity(p, t)
            }
            if len(types) != 1:
                raise LabelConflict(f"merged vertex {cid!r} has conflicting types")
            names = sorted(
                {
                    objects[t].vertex_data[p[0]][0]
                    for t, p in members
                    if is_identity(p, t)
                }
            )
            simplices[cid] = Simplex(cid, 0, ())
            vertex_data[cid] = ("=".join(names), types.pop())
        else:
            faces = []
            for i in range(dim + 1):
                face_node = (tag, (x.simplices[sid].faces[i], identity_alpha(dim - 1)))
                frep = rep_of[face_node]
                if degenerate[frep]:
                    raise RepresentationError(
                        f"colimit gives simplex {cid!r} a degenerate face"
                    )
                faces.append(class_id(frep))
            simplices[cid] = Simplex(cid, dim, tuple(faces))

    result = Schema(spec, simplices, vertex_data)

    # normal form of a (possibly degenerate) class: (nd class id, alpha)
    def normal_form(rep) -> Pair:
        if not degenerate[rep]:
            return (class_id(rep), identity_alpha_len(rep))
        # pick a degenerate member and recurse on its underlying simplex
        for tag, (sid, alpha) in classes[rep]:
            if alpha != identity_alpha(objects[tag].dim_of(sid)):
                base = rep_of[(tag, (sid, identity_alpha(objects[tag].dim_of(sid))))]
                bid, beta = normal_form(base)
                return (bid, tuple(beta[a] for a in alpha))
        raise RepresentationError("degenerate class without degenerate member")

    def identity_alpha_len(rep) -> tuple[int, ...]:
        tag, sid = nd_members(rep)[0]
        return identity_alpha(objects[tag].dim_of(sid))

    legs: dict[str, SchemaMorphism] = {}
    for tag, x in objects.items():
        assign = {}
        for sid, s in x.simplices.items():
            assign[sid] = normal_form(rep_of[(tag, (sid, identity_alpha(s.dim)))])
        legs[tag] = SchemaMorphism(x, result, assign)
    return result, legs


def schema_coproduct(xs: dict[str, Schema]) -> tuple[Schema, dict[str, SchemaMorphism]]:
    return schema_colimit(xs, [])


def schema_pushout(
    f1: SchemaMorphism, f2: SchemaMorphism
) -> tuple[Schema, SchemaMorphism, SchemaMorphism]:
    """Pushout of X1 <- X -> X2; returns (X', leg from X1, leg from X2)."""
    objects = {"0": f1.source, "1": f1.target, "2": f2.target}
    result, legs = schema_colimit(
        objects, [("0", "1", f1), ("0", "2", f2)]
    )
    return result, legs["1"], legs["2"]


# ---------------------------------------------------------------------------
# the vertex classifier


def vertex_classifier(x: Schema) -> tuple[SimpleSchema, Schema, SchemaMorphism]:
    """The simple schema on all vertices of x and the classifying map into
    its simplex.

    The collapse maps of the classifier need not be order-preserving (a
    simplex's vertex tuple may disagree with the global vertex order), so
    the returned morphism is validated only weakly.
    """
    vids = x.vertex_ids()
    names = [x.vertex_data[v][0] for v in vids]
    attrs = []
    for v, name in zip(vids, names):
        if names.count(name) > 1:
            name = f"{name}#{v}"
        attrs.append((name, x.vertex_data[v][1]))
    sigma = SimpleSchema(x.spec, tuple(attrs))
    delta = simplex_schema(sigma)
    pos = {v: i for i, v in enumerate(vids)}

    assign: dict[str, Pair] = {}
    for sid in x.simplices:
        vtuple = x.vertices_of(sid)
        distinct = sorted({pos[v] for v in vtuple})
        tid = "d" + "_".join(str(p) for p in distinct)
        rank = {p: r for r, p in enumerate(distinct)}
        alpha = tuple(rank[pos[v]] for v in vtuple)
        assign[sid] = (tid, alpha)
    return sigma, delta, SchemaMorphism(x, delta, assign)
