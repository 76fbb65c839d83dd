"""Combinatorial model of a conical curve (its seminormalisation).

A curve is three families of Galois orbits: geometric components, singular
points and branches.  Every orbit carries a field whose degree is the orbit
size.  Elements of an orbit are numbered 0..size-1, and an orbit whose field
is a compositum K (x) L numbers its elements a + deg(K) * b, so that the
element sits over element a of a K-orbit and element b of an L-orbit.  Each
branch element records its source component element and target point
element.  The Galois group is given by generator permutations on each orbit.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .arith_core import hilbert_symbol, quaternion_support, squarefree_part
from .conics import SPLIT, ConicLabel
from .errors import CurveError
from .fields import (
    QQ,
    Compositum,
    F2Span,
    FieldSpec,
    Profiled,
    Quadratic,
    RationalField,
    compose,
    contains,
    field_from_json,
    field_to_json,
    tensor_is_field,
)
from .forms import BinaryForm


@dataclass(frozen=True)
class Orbit:
    name: str
    field: FieldSpec
    conic: ConicLabel | None = None

    @property
    def size(self) -> int:
        return self.field.degree

    def element(self, i: int) -> str:
        return f"{self.name}.{i}"


@dataclass(frozen=True)
class BranchOrbit:
    """Branches from ``component`` to ``point``; ``ends[i]`` = (component element, point element).

    ``marks[i]``, when known, is the branch point in the coordinates of the
    component's conic model: (s : t) on a split line, (x : y : z) on a quaternion conic.
    """

    name: str
    field: FieldSpec
    component: str
    point: str
    ends: tuple
    marks: tuple | None = None

    @property
    def size(self) -> int:
        return self.field.degree


@dataclass(frozen=True)
class GaloisData:
    """Generators of the acting group, each a map orbit name -> permutation.

    Orbits missing from a generator's map are fixed pointwise.
    ``kind`` is "elem2" when the generators are commuting involutions
    spanning an elementary abelian 2-group of rank ``len(generators)``.
    """

    generators: tuple = ()
    kind: str = "elem2"

    @classmethod
    def make(cls, gens, kind="perm") -> GaloisData:
        norm = tuple((name, tuple(sorted((o, tuple(p)) for o, p in perms.items())))
                     for name, perms in gens)
        return cls(norm, kind)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.generators]

    def perm(self, g: int, orbit: str, size: int) -> tuple:
        p = dict(self.generators[g][1]).get(orbit)
        return tuple(range(size)) if p is None else p

    def to_json(self):
        out = {"kind": self.kind,
               "generators": [{"name": n, "perms": {o: list(p) for o, p in perms}}
                              for n, perms in self.generators]}
        if self.kind == "elem2":
            out["rank"] = self.rank
        return out

    @classmethod
    def from_json(cls, obj) -> GaloisData:
        return cls.make([(g["name"], g["perms"]) for g in obj.get("generators", [])],
                        obj.get("kind", "perm"))


TRIVIAL_GROUP = GaloisData((), "elem2")


@dataclass(eq=False)
class ConicalCurve:
    components: tuple
    points: tuple
    branches: tuple
    group: GaloisData = TRIVIAL_GROUP
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.components = tuple(self.components)
        self.points = tuple(self.points)
        self.branches = tuple(self.branches)
        names = [o.name for o in self.components + self.points + self.branches]
        if len(set(names)) != len(names):
            raise CurveError("orbit names must be unique")
        self.components = tuple(o if o.conic is not None else Orbit(o.name, o.field, SPLIT)
                                for o in self.components)

    # -- lookup -----------------------------------------------------------------
    @cached_property
    def orbit(self) -> dict:
        return {o.name: o for o in self.components + self.points + self.branches}

    def branches_of(self, orbit_name: str) -> list[BranchOrbit]:
        return [b for b in self.branches if orbit_name in (b.component, b.point)]

    @cached_property
    def geometry(self) -> Geometry:
        return Geometry(self)


class Geometry:
    """Geometric incidence graph X(C): vertices, directed edges and the group action on them."""

    def __init__(self, C: ConicalCurve):
        self.vertices: list[str] = []
        self.is_point: list[bool] = []
        self.orbit_of: list[str] = []
        self.index: dict[str, int] = {}
        for fam, is_pt in ((C.components, False), (C.points, True)):
            for o in fam:
                for i in range(o.size):
                    self.index[o.element(i)] = len(self.vertices)
                    self.vertices.append(o.element(i))
                    self.is_point.append(is_pt)
                    self.orbit_of.append(o.name)
        self.edges: list[tuple[int, int]] = []
        self.edge_names: list[str] = []
        self.edge_index: dict[str, int] = {}
        for b in C.branches:
            comp, pt = C.orbit.get(b.component), C.orbit.get(b.point)
            for i, (c, p) in enumerate(b.ends):
                name = f"{b.name}.{i}"
                self.edge_index[name] = len(self.edges)
                self.edge_names.append(name)
                src = self.index.get(f"{b.component}.{c}") if comp else None
                dst = self.index.get(f"{b.point}.{p}") if pt else None
                self.edges.append((src, dst))
        self.vertex_perms = []
        self.edge_perms = []
        for g in range(C.group.rank):
            vp = []
            for o in C.components + C.points:
                p = C.group.perm(g, o.name, o.size)
                vp += [self.index.get(o.element(j), -1) for j in p]
            ep = []
            for b in C.branches:
                p = C.group.perm(g, b.name, b.size)
                ep += [self.edge_index.get(f"{b.name}.{j}", -1) for j in p]
            self.vertex_perms.append(vp)
            self.edge_perms.append(ep)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in self.vertices]
        for s, t in self.edges:
            if s is not None and t is not None:
                adj[s].append(t)
                adj[t].append(s)
        return adj

    def n_connected(self) -> int:
        return _count_components(self.n_vertices, self.edges)


def _count_components(n: int, edges) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = n
    for s, t in edges:
        if s is None or t is None:
            continue
        a, b = find(s), find(t)
        if a != b:
            parent[a] = b
            count -= 1
    return count


# -- validation -----------------------------------------------------------------

@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.errors

    def fail(self, check: str, orbit: str, detail: str):
        self.errors.append({"check": check, "orbit": orbit, "detail": detail})

    def to_json(self):
        return {"valid": self.valid, "errors": self.errors}


def _is_perm(p, n) -> bool:
    return len(p) == n and sorted(p) == list(range(n))


def _transitive(perms, n) -> bool:
    seen, todo = {0}, [0]
    while todo:
        x = todo.pop()
        for p in perms:
            if p[x] not in seen:
                seen.add(p[x])
                todo.append(p[x])
    return len(seen) == n


def validate_curve(C: ConicalCurve) -> ValidationReport:
    rep = ValidationReport()
    comps = {o.name: o for o in C.components}
    pts = {o.name: o for o in C.points}
    all_orbits = list(C.components) + list(C.points) + list(C.branches)
    G = C.group

    # group data: permutations of the right size, transitive on each orbit
    known = {o.name for o in all_orbits}
    for g, (gname, perms) in enumerate(G.generators):
        for oname, _ in perms:
            if oname not in known:
                rep.fail("group", oname, f"generator {gname} acts on an unknown orbit")
    for o in all_orbits:
        perms = [G.perm(g, o.name, o.size) for g in range(G.rank)]
        bad = [G.generators[g][0] for g, p in enumerate(perms) if not _is_perm(p, o.size)]
        if bad:
            rep.fail("group", o.name, f"generators {bad} are not permutations of {o.size} elements")
            continue
        if o.size > 1 and not _transitive(perms, o.size):
            rep.fail("orbit", o.name, "the group is not transitive on the declared orbit")

    # component labels
    for o in C.components:
        if not isinstance(o.conic, ConicLabel):
            rep.fail("conic", o.name, "component lacks a conic label")
    for o in C.points:
        if o.conic is not None and not o.conic.is_split:
            rep.fail("conic", o.name, "singular points carry no conic label")

    # branches: endpoints, fields, equivariance
    for b in C.branches:
        comp, pt = comps.get(b.component), pts.get(b.point)
        if comp is None or pt is None:
            rep.fail("incidence", b.name, f"unknown endpoint orbit {b.component!r} or {b.point!r}")
            continue
        if len(b.ends) != b.size:
            rep.fail("incidence", b.name, f"{len(b.ends)} ends declared for an orbit of size {b.size}")
            continue
        if any(not (0 <= c < comp.size and 0 <= p < pt.size) for c, p in b.ends):
            rep.fail("incidence", b.name, "end index out of range")
            continue
        for K, role in ((comp.field, "component"), (pt.field, "point")):
            if b.size % K.degree:
                rep.fail("fields", b.name, f"degree {b.size} not divisible by the {role} field degree {K.degree}")
            elif not contains(b.field, K):
                rep.fail("fields", b.name, f"no canonical embedding of the {role} field {K} into {b.field}")
        for g in range(G.rank):
            pb = G.perm(g, b.name, b.size)
            pc = G.perm(g, comp.name, comp.size)
            pp = G.perm(g, pt.name, pt.size)
            if not (_is_perm(pb, b.size) and _is_perm(pc, comp.size) and _is_perm(pp, pt.size)):
                continue
            for i, (c, p) in enumerate(b.ends):
                if b.ends[pb[i]] != (pc[c], pp[p]):
                    rep.fail("equivariance", b.name,
                             f"generator {G.generators[g][0]} moves branch {b.name}.{i} inconsistently")
                    break
        if comp.conic is not None and not comp.conic.is_split:
            _check_conic_split_on_branch(rep, comp, b)

    if rep.errors:
        return rep
    geo = C.geometry
    # at least two distinct branches through each singular point
    deg = [0] * geo.n_vertices
    for s, t in geo.edges:
        deg[t] += 1
    for v, name in enumerate(geo.vertices):
        if geo.is_point[v] and deg[v] < 2:
            rep.fail("singular_point", geo.orbit_of[v], f"{name} has {deg[v]} branch(es), needs at least 2")
    if geo.n_vertices == 0:
        rep.fail("connected", "", "empty curve")
    elif geo.n_connected() != 1:
        rep.fail("connected", "", f"incidence graph has {geo.n_connected()} connected components")
    return rep


def _check_conic_split_on_branch(rep, comp: Orbit, b: BranchOrbit):
    """A branch is a k(psi)-point of the component's conic, so the conic must split over k(psi)."""
    a, bb = comp.conic.a, comp.conic.b
    for v in quaternion_support(a, bb):
        if hilbert_symbol(a, bb, v) == 1:
            continue
        if any(f.degree % 2 == 1 for f in b.field.local_factors(v)):
            rep.fail("conic", b.name, f"conic {comp.conic} of {comp.name} does not split at {v} over the branch field")
            return


# -- graph invariants ---------------------------------------------------------------

def graph_invariants(C: ConicalCurve) -> dict:
    geo = C.geometry
    V, E = geo.n_vertices, len(geo.edges)
    comps = geo.n_connected()
    bip = all(s is not None and t is not None and not geo.is_point[s] and geo.is_point[t]
              for s, t in geo.edges)
    for vp in geo.vertex_perms:
        if any(geo.is_point[v] != geo.is_point[vp[v]] for v in range(V)):
            bip = False
    h1 = E - V + comps
    return {"vertices": V, "edges": E, "connected": comps == 1, "bipartite_ok": bip,
            "is_tree": comps == 1 and h1 == 0, "h1_rank": h1}


def spanning_tree(n: int, edges) -> tuple[list[int], list[int], list[int]]:
    """BFS spanning forest: (tree edge indices, chord indices, parent edge per vertex)."""
    adj = [[] for _ in range(n)]
    for e, (s, t) in enumerate(edges):
        adj[s].append((t, e))
        adj[t].append((s, e))
    parent_edge = [-1] * n
    seen = [False] * n
    tree = []
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        q = deque([root])
        while q:
            x = q.popleft()
            for y, e in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    parent_edge[y] = e
                    tree.append(e)
                    q.append(y)
    tset = set(tree)
    chords = [e for e in range(len(edges)) if e not in tset]
    return tree, chords, parent_edge


def _path_to_root(v, edges, parent_edge):
    """Signed edge chain from v up to its root, as {edge: coefficient} walking v -> root."""
    chain = {}
    while parent_edge[v] != -1:
        e = parent_edge[v]
        s, t = edges[e]
        if v == t:      # walking t -> s runs against the orientation s -> t
            chain[e] = chain.get(e, 0) - 1
            v = s
        else:
            chain[e] = chain.get(e, 0) + 1
            v = t
    return chain


def cycle_basis(n: int, edges):
    """One cycle per chord s -> t, closed through the tree: chord + path(t -> root) - path(s -> root)."""
    _, chords, parent_edge = spanning_tree(n, edges)
    basis = []
    for c in chords:
        s, t = edges[c]
        z = {c: 1}
        for e, k in _path_to_root(t, edges, parent_edge).items():
            z[e] = z.get(e, 0) + k
        for e, k in _path_to_root(s, edges, parent_edge).items():
            z[e] = z.get(e, 0) - k
        basis.append({e: k for e, k in z.items() if k})
    return chords, basis


@dataclass
class HomologyAction:
    chords: list          # edge names, one per basis cycle
    basis: list           # each cycle as {edge name: coefficient}
    matrices: list        # numpy int arrays, one per generator

    def to_json(self):
        return {"rank": len(self.chords), "chords": self.chords,
                "basis": [dict(sorted(z.items())) for z in self.basis],
                "matrices": [m.tolist() for m in self.matrices]}


def homology_action(C: ConicalCurve) -> HomologyAction:
    """Action of each generator on H_1(X(C), Z) in the chord basis.

    Edges keep their component -> point orientation under the action, so a
    generator maps a cycle to a cycle by permuting edge coefficients; the
    coefficient of each chord then gives the coordinates in the basis.
    """
    geo = C.geometry
    chords, basis = cycle_basis(geo.n_vertices, geo.edges)
    pos = {c: i for i, c in enumerate(chords)}
    mats = []
    for ep in geo.edge_perms:
        M = np.zeros((len(chords), len(chords)), dtype=np.int64)
        for j, z in enumerate(basis):
            img = {ep[e]: k for e, k in z.items()}
            for e, k in img.items():
                if e in pos:
                    M[pos[e], j] += k
        mats.append(M)
    names = geo.edge_names
    return HomologyAction([names[c] for c in chords],
                          [{names[e]: k for e, k in z.items()} for z in basis], mats)


def enumerate_group(perms, limit: int = 100000):
    """All group elements as permutation tuples, each with a word in the generators (BFS)."""
    if not perms:
        return {}
    n = len(perms[0])
    ident = tuple(range(n))
    words = {ident: ()}
    q = deque([ident])
    while q:
        g = q.popleft()
        for i, p in enumerate(perms):
            h = tuple(p[x] for x in g)   # h = p o g
            if h not in words:
                words[h] = (i,) + words[g]
                if len(words) > limit:
                    raise CurveError("group too large to enumerate")
                q.append(h)
    return words


def check_homology_relations(C: ConicalCurve, act: HomologyAction | None = None) -> bool:
    """The generator matrices define a representation of the acting group.

    Each group element gets the matrix of one word for it; the check is that
    multiplying by any generator lands on the matrix stored for the product,
    which covers every defining relation.  Generators must have det +-1.
    """
    act = act or homology_action(C)
    geo = C.geometry
    if not geo.edge_perms:
        return True
    for M in act.matrices:
        if M.size and round(abs(np.linalg.det(M))) != 1:
            return False
    full = [tuple(vp) + tuple(len(vp) + e for e in ep)
            for vp, ep in zip(geo.vertex_perms, geo.edge_perms)]
    r = len(act.chords)
    mats = {}
    for g, word in enumerate_group(full).items():
        M = np.eye(r, dtype=np.int64)
        for i in reversed(word):
            M = act.matrices[i] @ M
        mats[g] = M
    for g, M in mats.items():
        for i, p in enumerate(full):
            h = tuple(p[x] for x in g)
            if not np.array_equal(act.matrices[i] @ M, mats[h]):
                return False
    return True


# -- tree centre -----------------------------------------------------------------

def tree_center(n: int, edges) -> list[int]:
    adj = [set() for _ in range(n)]
    for s, t in edges:
        adj[s].add(t)
        adj[t].add(s)
    alive = set(range(n))
    leaves = [v for v in alive if len(adj[v]) <= 1]
    while len(alive) > 2:
        nxt = []
        for v in leaves:
            alive.discard(v)
            for u in adj[v]:
                adj[u].discard(v)
                if len(adj[u]) == 1:
                    nxt.append(u)
            adj[v] = set()
        leaves = nxt
    return sorted(alive)


def fixed_vertex_of_tree(n: int, edges, perms, prefer) -> int:
    """A vertex fixed by all ``perms`` (automorphisms of the tree preserving a 2-colouring).

    The centre is canonical, so it is stable; a two-vertex centre is an edge
    whose endpoints have different colours, so neither endpoint can move.
    ``prefer(v)`` breaks the tie between the two.
    """
    if _count_components(n, edges) != 1 or len(edges) != n - 1:
        raise CurveError("fixed-vertex search needs a tree")
    center = tree_center(n, edges)
    fixed = [v for v in center if all(p[v] == v for p in perms)]
    if not fixed:
        raise CurveError("no fixed centre vertex: the action does not preserve the bipartition")
    fixed.sort(key=lambda v: (not prefer(v), v))
    return fixed[0]


def tree_fixed_vertex(C: ConicalCurve) -> str:
    inv = graph_invariants(C)
    if not inv["is_tree"]:
        raise CurveError("tree_fixed_vertex needs a curve whose incidence graph is a tree")
    geo = C.geometry
    v = fixed_vertex_of_tree(geo.n_vertices, geo.edges, geo.vertex_perms, lambda x: geo.is_point[x])
    return geo.vertices[v]


# -- Galois data from multiquadratic labels -------------------------------------------

def _square_classes_in(K: FieldSpec) -> list[int]:
    if isinstance(K, Quadratic):
        return [K.d]
    if isinstance(K, Compositum):
        return _square_classes_in(K.left) + _square_classes_in(K.right)
    return []


def _profiled_in(K: FieldSpec) -> list[Profiled]:
    if isinstance(K, Profiled):
        return [K]
    if isinstance(K, Compositum):
        return _profiled_in(K.left) + _profiled_in(K.right)
    return []


def field_action(K: FieldSpec, flip, profiled_perm) -> tuple:
    """Permutation of the embeddings of K induced by one generator.

    ``flip(d)`` tells whether sqrt(d) changes sign; ``profiled_perm(name)``
    gives the permutation of a profiled field's roots (None = identity).
    """
    if isinstance(K, RationalField):
        return (0,)
    if isinstance(K, Quadratic):
        return (1, 0) if flip(K.d) else (0, 1)
    if isinstance(K, Compositum):
        a = field_action(K.left, flip, profiled_perm)
        b = field_action(K.right, flip, profiled_perm)
        m = len(a)
        return tuple(a[i % m] + m * b[i // m] for i in range(m * len(b)))
    if isinstance(K, Profiled):
        p = profiled_perm(K.name)
        return tuple(range(K.degree)) if p is None else tuple(p)
    raise CurveError(f"no Galois action known for {K}")


def galois_from_labels(labels: dict, extra=()) -> GaloisData:
    """Acting group for orbit labels: one involution per independent square class, plus ``extra``.

    ``extra`` lists (name, {profiled field name: permutation}) generators for
    profiled fields; they fix every square root.  Profiled labels without
    supplied actions are rejected.
    """
    span = F2Span()
    for K in labels.values():
        for d in _square_classes_in(K):
            span.add(d)
    extra = list(extra)
    given = {name for _, perms in extra for name in perms}
    for K in labels.values():
        for P in _profiled_in(K):
            if P.name not in given and P.degree > 1:
                raise CurveError(f"profiled field {P.name} needs an explicitly supplied action")
    gens = []
    for j, d in enumerate(span.gens):
        def flip(x, j=j):
            return bool(span.coordinates(x) >> j & 1)
        gens.append((f"sigma[{d}]", {o: field_action(K, flip, lambda name: None)
                                     for o, K in labels.items() if K.degree > 1}))
    for name, perms in extra:
        gens.append((name, {o: field_action(K, lambda x: False, perms.get)
                            for o, K in labels.items() if K.degree > 1}))
    gens = [(n, {o: p for o, p in m.items() if p != tuple(range(len(p)))}) for n, m in gens]
    return GaloisData.make(gens, "perm" if extra else "elem2")


def group_order(G: GaloisData, C: ConicalCurve) -> int:
    full = []
    for g in range(G.rank):
        perm = []
        off = 0
        for o in C.components + C.points + C.branches:
            perm += [off + j for j in G.perm(g, o.name, o.size)]
            off += o.size
        full.append(tuple(perm))
    return len(enumerate_group(full)) if full else 1


S3_GENERATORS = (("rho", (1, 2, 0)), ("tau", (0, 2, 1)))


# -- builders -------------------------------------------------------------------------

def _form_orbits(f: BinaryForm, prefix_lin="R", prefix_quad="K"):
    out = []
    for i, root in enumerate(f.linear, 1):
        out.append((f"{prefix_lin}{i}", QQ, ("linear", root)))
    for i, d in enumerate(f.quadratic, 1):
        out.append((f"{prefix_quad}{i}", Quadratic(d), ("quadratic", d)))
    return out


def build_Cf(f: BinaryForm) -> ConicalCurve:
    """The plane curve f(x, y) = 0: lines through P = (0:0:1), one per geometric root of f.

    A line through P and the root (r : 1 : 0) is parametrised by (s : t) -> (s r : s : t),
    so every branch point (P itself) is (0 : 1) on its line.
    """
    if f.degree < 2:
        raise CurveError("C^f needs a form of degree at least 2")
    comps, branches, labels = [], [], {"P": QQ}
    for name, K, factor in _form_orbits(f):
        comps.append(Orbit(name, K, SPLIT))
        labels[name] = K
        bname = f"{name}>P"
        labels[bname] = K
        branches.append(BranchOrbit(bname, K, name, "P", tuple((i, 0) for i in range(K.degree)),
                                    tuple(((0, 1),) * K.degree)))
    G = galois_from_labels(labels)
    meta = {"equation": f"{f.expanded()} = 0", "ambient": "P^2 with coordinates (x:y:z)",
            "singular_point": "(0:0:1)", "form": f.to_json()}
    return ConicalCurve(comps, [Orbit("P", QQ)], branches, G, name="C^f", meta=meta)


def horizontal_degrees(d: int) -> tuple[int, int]:
    """[L:Q], [F:Q] for a vertical part of degree d."""
    return (d // 2 - 1, d // 2) if d % 2 == 0 else ((d - 1) // 2, (d + 1) // 2)


def default_profiled_actions(*fields) -> list:
    """S3 on the roots of every profiled cubic with a non-square discriminant."""
    extra = {}
    for K in fields:
        for P in _profiled_in(K):
            if P.degree == 3 and P.disc is not None and squarefree_part(P.disc) != 1:
                extra[P.name] = True
    return [(g, {name: perm for name in extra}) for g, perm in S3_GENERATORS] if extra else []


def _check_independent_closure(quad_classes, fields):
    """Direct-product assumption: the quadratic resolvent of a cubic is new to the square classes."""
    for K in fields:
        for P in _profiled_in(K):
            if P.disc is None:
                continue
            span = F2Span()
            for d in quad_classes:
                span.add(d)
            if span.coordinates(P.disc) is not None:
                raise CurveError(f"the discriminant class of {P.name} lies in the span of the quadratic labels; "
                                 "the direct-product Galois action would be wrong")


def build_D(f: BinaryForm, L: FieldSpec, F: FieldSpec, extra=None) -> ConicalCurve:
    """Verticals Z^f x P^1 and horizontals P^1 x Spec(L), P^1 x Spec(F) in P^1 x P^1."""
    d = f.degree
    if d < 5:
        raise CurveError(f"D needs deg f >= 5, got {d}")
    want = horizontal_degrees(d)
    if (L.degree, F.degree) != want:
        raise CurveError(f"for deg f = {d} need [L:Q], [F:Q] = {want}, got ({L.degree}, {F.degree})")
    verts = _form_orbits(f)
    for name, K, _ in verts:
        for H, hname in ((L, "L"), (F, "F")):
            if not tensor_is_field(K, H):
                raise CurveError(f"{hname} (x) {K} is not a field")
    if extra is None:
        extra = default_profiled_actions(L, F)
    quad = [d for _, K, _ in verts for d in _square_classes_in(K)] + _square_classes_in(L) + _square_classes_in(F)
    _check_independent_closure(quad, (L, F))

    comps = [Orbit(name, K, SPLIT) for name, K, _ in verts] + [Orbit("L", L, SPLIT), Orbit("F", F, SPLIT)]
    labels = {o.name: o.field for o in comps}
    points, branches = [], []
    for name, K, _ in verts:
        for H, hname in ((L, "L"), (F, "F")):
            E = compose(K, H)
            pname = f"{name}x{hname}"
            points.append(Orbit(pname, E))
            labels[pname] = E
            m = K.degree
            for cname, proj in ((name, lambda e: e % m), (hname, lambda e: e // m)):
                bname = f"{pname}>{cname}"
                labels[bname] = E
                branches.append(BranchOrbit(bname, E, cname, pname,
                                            tuple((proj(e), e) for e in range(E.degree))))
    G = galois_from_labels(labels, extra)
    meta = {"ambient": "P^1 x P^1 with coordinates ((x:y),(u:v))",
            "form": f.to_json(), "L": field_to_json(L), "F": field_to_json(F),
            "sides": {"+": [n for n, _, _ in verts], "-": ["L", "F"]}}
    return ConicalCurve(comps, points, branches, G, name="D", meta=meta)


# -- JSON and DOT ----------------------------------------------------------------------

def _mark_json(m):
    return None if m is None else [str(Fraction(c)) for c in m]


def curve_to_json(C: ConicalCurve) -> dict:
    def orbit_json(o, with_conic):
        out = {"orbit": o.name, "size": o.size, "field": field_to_json(o.field)}
        if with_conic:
            out["conic"] = o.conic.to_json()
        return out

    branches = []
    for b in C.branches:
        out = {"orbit": b.name, "size": b.size, "field": field_to_json(b.field),
               "component": b.component, "point": b.point,
               "ends": [[f"{b.component}.{c}", f"{b.point}.{p}"] for c, p in b.ends]}
        if b.marks is not None:
            out["marks"] = [_mark_json(m) for m in b.marks]
        branches.append(out)
    return {"name": C.name, "group": C.group.to_json(),
            "components": [orbit_json(o, True) for o in C.components],
            "sing_points": [orbit_json(o, False) for o in C.points],
            "branches": branches, "meta": C.meta}


def curve_from_json(obj) -> ConicalCurve:
    try:
        comps = [Orbit(o["orbit"], field_from_json(o["field"]), ConicLabel.from_json(o.get("conic", "split")))
                 for o in obj["components"]]
        pts = [Orbit(o["orbit"], field_from_json(o["field"])) for o in obj.get("sing_points", [])]
        branches = []
        for b in obj.get("branches", []):
            ends = []
            for src, dst in b["ends"]:
                c_orb, c_i = src.rsplit(".", 1)
                p_orb, p_i = dst.rsplit(".", 1)
                if c_orb != b["component"] or p_orb != b["point"]:
                    raise CurveError(f"branch {b['orbit']} has an end outside its declared orbits")
                ends.append((int(c_i), int(p_i)))
            marks = b.get("marks")
            if marks is not None:
                marks = tuple(None if m is None else tuple(Fraction(c) for c in m) for m in marks)
            branches.append(BranchOrbit(b["orbit"], field_from_json(b["field"]), b["component"],
                                        b["point"], tuple(ends), marks))
        for o in obj["components"] + obj.get("sing_points", []) + obj.get("branches", []):
            if "size" in o:
                K = next(x.field for x in comps + pts + branches if x.name == o["orbit"])
                if int(o["size"]) != K.degree:
                    raise CurveError(f"orbit {o['orbit']}: size {o['size']} != field degree {K.degree}")
        G = GaloisData.from_json(obj.get("group", {}))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CurveError):
            raise
        raise CurveError(f"malformed curve JSON: {exc}") from exc
    return ConicalCurve(comps, pts, branches, G, name=obj.get("name", ""), meta=obj.get("meta", {}))


def curve_to_dot(C: ConicalCurve) -> str:
    geo = C.geometry
    lines = [f'digraph "{C.name or "X(C)"}" {{']
    for v, name in enumerate(geo.vertices):
        shape = "point" if geo.is_point[v] else "box"
        lines.append(f'  "{name}" [shape={shape}, xlabel="{name}"];' if shape == "point"
                     else f'  "{name}" [shape=box];')
    for (s, t), ename in zip(geo.edges, geo.edge_names):
        lines.append(f'  "{geo.vertices[s]}" -> "{geo.vertices[t]}" [label="{ename}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def sides_of(C: ConicalCurve) -> tuple[list[str], list[str]] | None:
    """Split the component orbits into two sides making C bipartite, or None.

    Needs exactly two branches through each geometric singular point, coming
    from components on opposite sides.  Uses ``meta['sides']`` when present.
    """
    geo = C.geometry
    incident: dict[int, list[int]] = {}
    for s, t in geo.edges:
        incident.setdefault(t, []).append(s)
    if any(len(v) != 2 for v in incident.values()):
        return None
    orbit_adj: dict[str, set] = {o.name: set() for o in C.components}
    for t, (a, b) in incident.items():
        oa, ob = geo.orbit_of[a], geo.orbit_of[b]
        if oa == ob:
            return None
        orbit_adj[oa].add(ob)
        orbit_adj[ob].add(oa)
    colour: dict[str, int] = {}
    given = C.meta.get("sides")
    if given:
        colour = {n: 0 for n in given["+"]} | {n: 1 for n in given["-"]}
    else:
        for o in C.components:
            if o.name in colour:
                continue
            colour[o.name] = 0
            todo = [o.name]
            while todo:
                x = todo.pop()
                for y in orbit_adj[x]:
                    if y not in colour:
                        colour[y] = 1 - colour[x]
                        todo.append(y)
    for x, ys in orbit_adj.items():
        if any(colour.get(y) == colour.get(x) for y in ys):
            return None
    plus = [o.name for o in C.components if colour.get(o.name) == 0]
    minus = [o.name for o in C.components if colour.get(o.name) == 1]
    return plus, minus


def brute_fixed_vertices(C: ConicalCurve) -> list[str]:
    """Vertices fixed by the whole group, by closing orbits under the generators."""
    geo = C.geometry
    return [geo.vertices[v] for v in range(geo.n_vertices)
            if all(p[v] == v for p in geo.vertex_perms)]


def build_two_lines(d: int) -> ConicalCurve:
    """Two rational lines meeting in the two conjugate points of Spec Q(sqrt d)."""
    K = Quadratic(d)
    comps = [Orbit("A", QQ, SPLIT), Orbit("B", QQ, SPLIT)]
    branches = [BranchOrbit(f"{c}>P", K, c, "P", ((0, 0), (0, 1))) for c in ("A", "B")]
    labels = {"P": K, "A>P": K, "B>P": K}
    return ConicalCurve(comps, [Orbit("P", K)], branches, galois_from_labels(labels), name=f"two-lines({d})",
                        meta={"sides": {"+": ["A"], "-": ["B"]}})


def build_conjugate_lines(d: int) -> ConicalCurve:
    """A conjugate pair of lines over Q(sqrt d) meeting in a conjugate pair of points.

    Geometrically a 4-cycle: each line passes through both points.
    """
    K = Quadratic(d)
    comps = [Orbit("M", K, SPLIT)]
    ends0 = ((0, 0), (1, 1))       # line i through point i
    ends1 = ((0, 1), (1, 0))       # line i through point 1 - i
    branches = [BranchOrbit("M>P", K, "M", "P", ends0), BranchOrbit("M>P'", K, "M", "P", ends1)]
    labels = {"M": K, "P": K, "M>P": K, "M>P'": K}
    return ConicalCurve(comps, [Orbit("P", K)], branches, galois_from_labels(labels), name=f"conjugate-lines({d})")
