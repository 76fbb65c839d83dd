"""Brauer classes as local-invariant vectors and the truncated Brauer group of a conical curve.

A class over a field K is a finitely supported map (place v, local factor
index w) -> Q/Z.  For the curve, Br(C) is the kernel of

    Br(Pi) (+) (+)_lambda Br(k(lambda)) / [conic_lambda]  -->  Br(Psi),

with the component side entering by restriction and the point side by
minus restriction.  Everything is computed for n-torsion classes supported
on a finite set S of places, as integer vectors over Z/N (an invariant
k/N is stored as k).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith_core import QQZ, REAL, Place, hilbert_invariant, primes_up_to, quaternion_support
from .conics import ConicLabel
from .curve_model import ConicalCurve, sides_of, validate_curve
from .errors import CurveError, WindowError
from .fields import QQ, FieldSpec, factor_map, field_to_json
from .linalg import kernel_mod, quotient_mod

DEFAULT_TORSION_BOUND = 24
TORSION_ENV = "CONICAL_TORSION_BOUND"


def torsion_bound() -> int:
    raw = os.environ.get(TORSION_ENV)
    return int(raw) if raw else DEFAULT_TORSION_BOUND


# -- classes ------------------------------------------------------------------------------

@dataclass(frozen=True)
class BrauerClass:
    field: FieldSpec
    inv: tuple = ()        # sorted ((Place, factor index), QQZ), zero entries dropped

    @classmethod
    def make(cls, K: FieldSpec, inv: dict) -> BrauerClass:
        items = []
        for (v, w), a in inv.items():
            a = a if isinstance(a, QQZ) else QQZ(Fraction(a))
            if a:
                items.append(((Place.parse(v), int(w)), a))
        items.sort(key=lambda t: (t[0][0], t[0][1]))
        return cls(K, tuple(items))

    def get(self, v: Place, w: int = 0) -> QQZ:
        return dict(self.inv).get((v, w), QQZ())

    @property
    def support(self) -> list[Place]:
        return sorted({v for (v, _), _ in self.inv})

    def is_zero(self) -> bool:
        return not self.inv

    def __add__(self, other: BrauerClass) -> BrauerClass:
        if self.field != other.field:
            raise ValueError("classes over different fields")
        out = dict(self.inv)
        for key, a in other.inv:
            out[key] = out.get(key, QQZ()) + a
        return BrauerClass.make(self.field, out)

    def __neg__(self):
        return BrauerClass.make(self.field, {k: -a for k, a in self.inv})

    def to_json(self):
        out: dict = {}
        for (v, w), a in self.inv:
            out.setdefault(str(v), {})[str(w)] = str(a)
        return {"field": field_to_json(self.field), "invariants": out}


def conic_class(c: ConicLabel) -> BrauerClass:
    if c.is_split:
        return BrauerClass(QQ)
    return BrauerClass.make(QQ, {(v, 0): hilbert_invariant(c.a, c.b, v) for v in quaternion_support(c.a, c.b)})


def restrict_class(x: BrauerClass, M: FieldSpec) -> BrauerClass:
    """Restriction to M: the invariant at a factor of M is its relative local degree times the one below."""
    out = {}
    for (v, w), a in x.inv:
        for j, (below, e) in enumerate(factor_map(M, x.field, v)):
            if below == w:
                out[(v, j)] = a * e
    return BrauerClass.make(M, out)


def reciprocity_check(x: BrauerClass) -> QQZ:
    total = QQZ()
    for _, a in x.inv:
        total = total + a
    return total


# -- truncation window ----------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationWindow:
    n: int
    S: tuple

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise WindowError("torsion bound n must be positive")
        if n > torsion_bound():
            raise WindowError(f"n = {n} exceeds the torsion bound {torsion_bound()} (set {TORSION_ENV})")
        S = tuple(sorted({Place.parse(v) for v in self.S}))
        if REAL not in S or Place(2) not in S:
            raise WindowError("the place set must contain the real place and 2")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "S", S)

    @classmethod
    def up_to(cls, n: int, places_max: int, extra=()) -> TruncationWindow:
        return cls(n, (REAL, *(Place(p) for p in primes_up_to(places_max)), *extra))

    def require(self, places):
        missing = sorted(set(places) - set(self.S))
        if missing:
            raise WindowError(f"window is missing required places {[str(v) for v in missing]}")

    def to_json(self):
        return {"n": self.n, "S": [v.to_json() for v in self.S]}


def required_places(C: ConicalCurve) -> set:
    """Real, 2, every ramified place of a field label and every place where a conic label ramifies."""
    req = {REAL, Place(2)}
    for o in C.components + C.points + C.branches:
        req |= set(o.field.ramified())
    for o in C.components:
        req |= set(conic_class(o.conic).support)
    return req


def window_for(C: ConicalCurve, n: int, places_max: int) -> TruncationWindow:
    return TruncationWindow.up_to(n, places_max, sorted(required_places(C)))


# -- the linear system ----------------------------------------------------------------------------

@dataclass
class BrauerSystem:
    """A x = 0 over Z/N with x = (coordinates, conic multipliers t)."""

    N: int
    n: int
    coords: list                  # (orbit, place, factor index, local degree)
    n_t: int
    rows: list                    # dict column -> coefficient
    diagonal: list                # column vectors on the coordinates
    conic_vectors: list
    labels: list = field(default_factory=list)   # row descriptions

    @property
    def n_cols(self) -> int:
        return len(self.coords) + self.n_t

    def matrix(self) -> np.ndarray:
        A = np.zeros((max(len(self.rows), 1), self.n_cols), dtype=np.int64)
        for i, r in enumerate(self.rows):
            for j, c in r.items():
                A[i, j] = (A[i, j] + c) % self.N
        return A


def _orbit_coords(orbits, S):
    coords, index = [], {}
    for v in S:
        for o in orbits:
            for w, fac in enumerate(o.field.local_factors(v)):
                if v.is_real and fac.degree == 2:
                    continue      # complex place: invariant is always 0
                index[(o.name, v, w)] = len(coords)
                coords.append((o.name, v, w, fac.degree))
    return coords, index


def _assemble(C: ConicalCurve, w: TruncationWindow, domain, targets) -> BrauerSystem:
    """Shared assembly: ``domain`` are the orbits carrying variables, ``targets`` yield map rows.

    ``targets`` is a list of (target field, place-independent description, [(orbit, field of
    the orbit, sign, branch field)]); each target local factor gets one row.
    """
    conic_orbits = [o for o in domain if getattr(o, "conic", None) is not None and not o.conic.is_split]
    conic_orbits = [o for o in conic_orbits if not restrict_class(conic_class(o.conic), o.field).is_zero()]
    n = w.n
    N = 2 * n if conic_orbits else n
    coords, index = _orbit_coords(domain, w.S)
    t_col = {o.name: len(coords) + i for i, o in enumerate(conic_orbits)}
    rows, labels = [], []

    # local conditions and reciprocity for each field
    for (name, v, wi, deg), j in zip(coords, range(len(coords))):
        if v.is_real:
            rows.append({j: 2})
            labels.append(f"real:{name}")
    for o in domain:
        cols = [index[k] for k in index if k[0] == o.name]
        rows.append({j: 1 for j in cols})
        labels.append(f"reciprocity:{o.name}")

    # n-torsion in Br(k(lambda)) / [conic]
    conic_inv = {}
    for o in conic_orbits:
        cls = restrict_class(conic_class(o.conic), o.field)
        for v in w.S:
            for wi, _ in enumerate(o.field.local_factors(v)):
                if (o.name, v, wi) in index:
                    conic_inv[index[(o.name, v, wi)]] = int(cls.get(v, wi).value * N) % N
    if N != n:
        conic_names = {o.name for o in conic_orbits}
        for j, (name, v, wi, deg) in enumerate(coords):
            r = {j: n}
            if name in conic_names and conic_inv.get(j):
                r[t_col[name]] = -conic_inv[j]
            rows.append(r)
            labels.append(f"torsion:{name}")

    # restriction rows
    for tname, tfield, sources in targets:
        for v in w.S:
            tf = tfield.local_factors(v)
            maps = [(oname, sign, factor_map(bfield, ofield, v), bfield) for oname, ofield, sign, bfield in sources]
            for u, fac in enumerate(tf):
                if v.is_real and fac.degree == 2:
                    continue
                r = {}
                for oname, sign, fm, bfield in maps:
                    below, e = fm[u]
                    key = (oname, v, below)
                    if key not in index:
                        continue          # complex place below: zero
                    j = index[key]
                    r[j] = r.get(j, 0) + sign * e
                rows.append({j: c % N for j, c in r.items() if c % N})
                labels.append(f"map:{tname}@{v}#{u}")

    # diagonal image of Br(Q)[N]_S
    diag = []
    alphas = []
    for v in w.S:
        if v.is_real:
            if N % 2 == 0:
                alphas.append({REAL: N // 2, Place(2): N // 2})
        elif v.prime != 2:
            alphas.append({v: 1, Place(2): N - 1})
    for alpha in alphas:
        vec = np.zeros(len(coords), dtype=np.int64)
        for j, (name, v, wi, deg) in enumerate(coords):
            if v in alpha:
                vec[j] = deg * alpha[v] % N
        diag.append(vec)

    conic_vecs = []
    for o in conic_orbits:
        vec = np.zeros(len(coords), dtype=np.int64)
        for j, (name, v, wi, deg) in enumerate(coords):
            if name == o.name:
                vec[j] = conic_inv.get(j, 0)
        conic_vecs.append(vec)
    return BrauerSystem(N, n, coords, len(conic_orbits), rows, diag, conic_vecs, labels)


def general_system(C: ConicalCurve, w: TruncationWindow) -> BrauerSystem:
    domain = list(C.points) + list(C.components)
    targets = []
    for b in C.branches:
        comp, pt = C.orbit[b.component], C.orbit[b.point]
        targets.append((b.name, b.field, [(comp.name, comp.field, +1, b.field), (pt.name, pt.field, -1, b.field)]))
    return _assemble(C, w, domain, targets)


def bipartite_system(C: ConicalCurve, w: TruncationWindow) -> BrauerSystem:
    """The point variables eliminated: both sides restrict to the intersection, with signs +1 / -1."""
    sides = sides_of(C)
    if sides is None:
        raise CurveError("curve is not bipartite")
    plus = set(sides[0])
    targets = []
    for pt in C.points:
        bs = C.branches_of(pt.name)
        sources = []
        for b in bs:
            if b.field != pt.field:
                raise CurveError(f"branch {b.name} is not isomorphic to its point orbit")
            comp = C.orbit[b.component]
            sources.append((comp.name, comp.field, +1 if comp.name in plus else -1, b.field))
        targets.append((pt.name, pt.field, sources))
    return _assemble(C, w, list(C.components), targets)


@dataclass
class BrauerQuotient:
    window: TruncationWindow
    method: str
    N: int
    orders: list
    representatives: list
    kernel_generators: int
    system: BrauerSystem
    kernel: np.ndarray | None = None        # kernel generators on the coordinates, as columns
    relations: np.ndarray | None = None     # conic vectors and diagonal classes lying in the kernel

    @property
    def dimension(self) -> int:
        return len(self.orders)

    def decode(self, vec) -> dict:
        out: dict = {}
        for (name, v, wi, deg), k in zip(self.system.coords, vec):
            if k % self.N:
                out.setdefault(name, {}).setdefault(str(v), {})[str(wi)] = str(QQZ(Fraction(int(k), self.N)))
        return out

    def to_json(self):
        return {"window": self.window.to_json(), "method": self.method,
                "quotient_dimension": self.dimension, "orders": self.orders,
                "representatives": [{"order": o, "classes": self.decode(r)}
                                    for o, r in zip(self.orders, self.representatives)],
                "coordinates": len(self.system.coords), "equations": len(self.system.rows),
                "caveat": f"computed in the truncation window: {self.window.n}-torsion "
                          f"supported on {len(self.window.S)} places"}


def solve_system(sys_: BrauerSystem, window: TruncationWindow, method: str) -> BrauerQuotient:
    N, a = sys_.N, len(sys_.coords)
    A = sys_.matrix()
    K = kernel_mod(A, N, sys_.n_cols)
    Kx = K[:a, :]
    # diagonal classes whose image lands in the kernel: solve A (Delta c, t) = 0 in (c, t)
    rel = list(sys_.conic_vectors)
    if sys_.diagonal:
        Delta = np.array(sys_.diagonal, dtype=np.int64).T
        At = A[:, a:]
        B = np.concatenate([A[:, :a] @ Delta % N, At], axis=1) % N
        KB = kernel_mod(B, N, B.shape[1])
        m = Delta.shape[1]
        for col in KB.T:
            vec = Delta @ col[:m] % N
            if np.any(vec):
                rel.append(vec)
    Rel = np.array(rel, dtype=np.int64).T if rel else np.zeros((a, 0), dtype=np.int64)
    parts = quotient_mod(Kx, Rel, N) if a else []
    return BrauerQuotient(window, method, N, [o for o, _ in parts], [r for _, r in parts], Kx.shape[1], sys_,
                          Kx, Rel)


def curve_brauer_quotient(C: ConicalCurve, w: TruncationWindow, method: str = "general") -> BrauerQuotient:
    rep = validate_curve(C)
    if not rep.valid:
        raise CurveError(f"invalid curve: {rep.errors[0]}")
    w.require(required_places(C))
    if method == "general":
        return solve_system(general_system(C, w), w, method)
    if method == "bipartite":
        return solve_system(bipartite_system(C, w), w, method)
    raise ValueError(f"unknown method {method!r}")


# -- independent F2 oracle -----------------------------------------------------------------------

def _f2_rank(rows: list[int]) -> int:
    pivots: dict[int, int] = {}
    for r in rows:
        while r:
            h = r.bit_length() - 1
            if h not in pivots:
                pivots[h] = r
                break
            r ^= pivots[h]
    return len(pivots)


def _f2_kernel_dim(rows, ncols, enumerate_limit):
    if ncols <= enumerate_limit:
        count = 0
        for xbits in range(1 << ncols):
            if all(bin(r & xbits).count("1") % 2 == 0 for r in rows):
                count += 1
        return count.bit_length() - 1
    return ncols - _f2_rank(rows)


def f2_oracle_dimension(sys_: BrauerSystem, enumerate_limit: int = 18) -> int:
    """dim ker A - dim(diagonal image inside ker A) for a system over F2.

    Works on bit-packed rows, separately from the Smith-form code: by
    exhaustive enumeration when there are at most ``enumerate_limit``
    unknowns, by Gaussian elimination otherwise.
    """
    if sys_.N != 2 or sys_.n_t:
        raise ValueError("the F2 oracle needs N = 2 and no conic multipliers")
    a = len(sys_.coords)
    rows = [sum(1 << j for j, c in r.items() if c % 2) for r in sys_.rows]
    dim_ker = _f2_kernel_dim(rows, a, enumerate_limit)
    m = len(sys_.diagonal)
    if not m:
        return dim_ker
    D = [[int(vec[j]) % 2 for vec in sys_.diagonal] for j in range(a)]      # a x m
    # rows of A*Delta as bitmasks over the m diagonal generators
    AD = []
    for r in rows:
        bits = 0
        for i in range(m):
            s = 0
            rr = r
            while rr:
                j = rr.bit_length() - 1
                s ^= D[j][i]
                rr ^= 1 << j
            bits |= s << i
        AD.append(bits)
    Drows = [sum(D[j][i] << i for i in range(m)) for j in range(a)]
    dim_ker_AD = _f2_kernel_dim(AD, m, enumerate_limit)
    dim_ker_D = _f2_kernel_dim(Drows, m, enumerate_limit)
    return dim_ker - (dim_ker_AD - dim_ker_D)
