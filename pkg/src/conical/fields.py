"""Number fields and etale algebras over Q described by their local splitting data.

A field is never constructed as an explicit extension; it is described by
how it decomposes at each place.  For multiquadratic pieces the local
factors also carry their subgroup of local square classes, which is what
decides tensor products place by place.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import gcd
from typing import NamedTuple

from sympy import Poly, Symbol, real_roots, sieve
from sympy import discriminant as _sympy_disc

from .arith_core import (
    REAL,
    Place,
    is_squarefree,
    legendre_symbol,
    local_square_class,
    prime_support,
    squarefree_part,
)
from .errors import (
    CertificationUnsupported,
    ConicalError,
    FieldMapError,
    InsufficientProfile,
    UnsupportedTensor,
)


class LocalFactor(NamedTuple):
    """One field factor of K (x) Q_v.

    ``classes`` is the subgroup of Q_v*/Q_v*^2 (bitmasks) whose square roots
    generate the factor when it is multiquadratic, else None.  ``parents`` are
    the factor indices in the two tensor constituents for composita.
    """

    degree: int
    classes: frozenset | None
    parents: tuple = ()


_TRIVIAL = frozenset({0})


def _span(gens) -> frozenset:
    group = {0}
    for g in gens:
        group |= {x ^ g for x in group}
    return frozenset(group)


def _tensor_local(a: LocalFactor, b: LocalFactor) -> list[tuple[int, frozenset | None]]:
    if a.degree == 1:
        return [(b.degree, b.classes)]
    if b.degree == 1:
        return [(a.degree, a.classes)]
    if a.classes is not None and b.classes is not None:
        total = _span(a.classes | b.classes)
        copies = len(a.classes & b.classes)
        return [(len(total), total)] * copies
    if gcd(a.degree, b.degree) == 1:
        return [(a.degree * b.degree, None)]
    raise UnsupportedTensor(
        f"cannot decompose a tensor of local factors of degrees {a.degree} and {b.degree}")


class FieldSpec:
    """Base class.  Subclasses are frozen dataclasses, hence hashable."""

    degree: int

    def local_factors(self, v: Place) -> tuple[LocalFactor, ...]:
        return _local_factors(self, v)

    def local_degrees(self, v: Place) -> list[int]:
        return sorted(f.degree for f in self.local_factors(v))

    def ramified(self) -> frozenset:
        raise NotImplementedError

    def square_classes(self) -> list[int] | None:
        """Generators of the square classes adjoined, for multiquadratic fields."""
        return None

    @property
    def is_multiquadratic(self) -> bool:
        return self.square_classes() is not None


@dataclass(frozen=True)
class RationalField(FieldSpec):
    degree: int = field(default=1, init=False)

    def _factors(self, v):
        return (LocalFactor(1, _TRIVIAL),)

    def ramified(self):
        return frozenset()

    def square_classes(self):
        return []

    def __str__(self):
        return "Q"


QQ = RationalField()


@dataclass(frozen=True)
class Quadratic(FieldSpec):
    d: int
    degree: int = field(default=2, init=False)

    def __post_init__(self):
        if self.d == 0:
            raise ConicalError("Quadratic(0) is not a field")
        d = squarefree_part(self.d)
        if d == 1:
            raise ConicalError(f"{self.d} is a square: Q(sqrt {self.d}) = Q")
        object.__setattr__(self, "d", d)

    def _factors(self, v):
        c = local_square_class(self.d, v)
        if c == 0:
            return (LocalFactor(1, _TRIVIAL), LocalFactor(1, _TRIVIAL))
        return (LocalFactor(2, frozenset({0, c})),)

    def ramified(self):
        ps = {p for p in prime_support(self.d) if p != 2}
        if self.d % 4 != 1:
            ps.add(2)
        return frozenset(Place(p) for p in ps)

    def square_classes(self):
        return [self.d]

    def __str__(self):
        return f"Q(sqrt({self.d}))"


@dataclass(frozen=True)
class Compositum(FieldSpec):
    """The field K (x) L; only meaningful when that tensor product is a field."""

    left: FieldSpec
    right: FieldSpec

    def __post_init__(self):
        if not tensor_is_field(self.left, self.right):
            raise ConicalError(f"{self.left} (x) {self.right} is not a field")

    @property
    def degree(self):
        return self.left.degree * self.right.degree

    def _factors(self, v):
        out = []
        for i, a in enumerate(self.left.local_factors(v)):
            for j, b in enumerate(self.right.local_factors(v)):
                for deg, cls in _tensor_local(a, b):
                    out.append(LocalFactor(deg, cls, (i, j)))
        return tuple(out)

    def ramified(self):
        return self.left.ramified() | self.right.ramified()

    def square_classes(self):
        a, b = self.left.square_classes(), self.right.square_classes()
        if a is None or b is None:
            return None
        return a + b

    def __str__(self):
        return f"({self.left})*({self.right})"


@dataclass(frozen=True)
class Biquadratic(Compositum):
    """Q(sqrt d1, sqrt d2), stored as the compositum of its two quadratic subfields."""

    left: FieldSpec = field(init=False, repr=False)
    right: FieldSpec = field(init=False, repr=False)
    d1: int = 0
    d2: int = 0

    def __init__(self, d1: int, d2: int):
        q1, q2 = Quadratic(d1), Quadratic(d2)
        if q1 == q2:
            raise ConicalError(f"square classes {d1}, {d2} are dependent")
        object.__setattr__(self, "d1", q1.d)
        object.__setattr__(self, "d2", q2.d)
        object.__setattr__(self, "left", q1)
        object.__setattr__(self, "right", q2)

    def __str__(self):
        return f"Q(sqrt({self.d1}),sqrt({self.d2}))"


@dataclass(frozen=True)
class Profiled(FieldSpec):
    """A field known only through its splitting behaviour.

    ``profile`` maps places to local degree multisets and must cover every
    ramified prime.  Elsewhere, if ``poly`` (integer coefficients, leading
    first) is given, local degrees at unramified primes come from the
    factorisation of ``poly`` mod p and at the real place from its real roots.
    ``disc`` names the quadratic resolvent: degree-2 local factors are
    Q_v(sqrt disc), which holds for cubic fields.
    """

    name: str
    degree: int
    profile: tuple = ()
    ramified_places: frozenset = frozenset()
    poly: tuple | None = None
    disc: int | None = None

    def __post_init__(self):
        prof = self.profile.items() if isinstance(self.profile, dict) else self.profile
        norm = tuple(sorted((Place.parse(k), tuple(sorted(int(x) for x in ds))) for k, ds in prof))
        for v, ds in norm:
            if sum(ds) != self.degree or min(ds) < 1:
                raise ConicalError(f"profile of {self.name} at {v} does not sum to {self.degree}")
        object.__setattr__(self, "profile", norm)
        object.__setattr__(self, "ramified_places",
                           frozenset(Place.parse(p) for p in self.ramified_places))
        if self.poly is not None:
            object.__setattr__(self, "poly", tuple(int(c) for c in self.poly))
            if len(self.poly) - 1 != self.degree:
                raise ConicalError("poly degree does not match field degree")
        for v in self.ramified_places:
            if v not in dict(norm):
                raise ConicalError(f"profile of {self.name} must list ramified place {v}")

    def _degrees(self, v: Place) -> tuple[int, ...]:
        table = dict(self.profile)
        if v in table:
            return table[v]
        if v in self.ramified_places or self.poly is None:
            raise InsufficientProfile(f"no local data for {self.name} at {v}")
        x = Symbol("x")
        f = Poly(list(self.poly), x)
        if v.is_real:
            r = len(real_roots(f))
            return tuple([1] * r + [2] * ((self.degree - r) // 2))
        p = v.prime
        if self.poly[0] % p == 0 or _sympy_disc(f) % p == 0:
            raise InsufficientProfile(f"{p} divides the discriminant of the polynomial of {self.name}")
        fp = Poly(list(self.poly), x, modulus=p)
        return tuple(sorted(g.degree() for g, e in fp.factor_list()[1] for _ in range(e)))

    def _factors(self, v):
        out = []
        for deg in self._degrees(v):
            if deg == 1:
                out.append(LocalFactor(1, _TRIVIAL))
            elif deg == 2 and self.disc is not None:
                c = local_square_class(self.disc, v)
                if c == 0:
                    raise InsufficientProfile(f"{self.name}: disc is a local square at {v}")
                out.append(LocalFactor(2, frozenset({0, c})))
            else:
                out.append(LocalFactor(deg, None))
        return tuple(out)

    def ramified(self):
        return self.ramified_places

    def __str__(self):
        return self.name


@lru_cache(maxsize=None)
def _local_factors(K: FieldSpec, v: Place) -> tuple[LocalFactor, ...]:
    return K._factors(v)


def local_degrees(K: FieldSpec, v: Place) -> list[int]:
    return K.local_degrees(v)


# -- square classes of Q as F2 vectors ----------------------------------------

def _class_set(d: int) -> frozenset:
    d = squarefree_part(d)
    s = set(prime_support(d)) if abs(d) > 1 else set()
    if d < 0:
        s.add(-1)
    return frozenset(s)


class F2Span:
    """Incremental reduced basis of a subspace of Q*/Q*^2.

    Vectors are sets of primes (and -1); each stored row owns a pivot that
    appears in no other row.
    """

    def __init__(self):
        self.rows: list[tuple[object, frozenset, int]] = []  # (pivot, vector, combination mask)
        self.gens: list[int] = []

    def _reduce(self, vec: frozenset) -> tuple[frozenset, int]:
        mask = 0
        for pivot, row, comb in self.rows:
            if pivot in vec:
                vec = vec ^ row
                mask ^= comb
        return vec, mask

    def add(self, d: int) -> bool:
        vec, mask = self._reduce(_class_set(d))
        if not vec:
            return False
        comb = mask ^ (1 << len(self.gens))
        pivot = max(vec, key=_prime_key)
        self.rows = [(p, row ^ vec, c ^ comb) if pivot in row else (p, row, c)
                     for p, row, c in self.rows]
        self.rows.append((pivot, vec, comb))
        self.gens.append(squarefree_part(d))
        return True

    def coordinates(self, d: int) -> int | None:
        """Bitmask of basis generators whose product is d mod squares, or None."""
        vec, mask = self._reduce(_class_set(d))
        return None if vec else mask

    @property
    def rank(self) -> int:
        return len(self.gens)


def _prime_key(x):
    return (x == -1, x)


def f2_rank(classes) -> int:
    s = F2Span()
    for d in classes:
        s.add(d)
    return s.rank


def tensor_is_field(K: FieldSpec, L: FieldSpec) -> bool:
    if isinstance(K, RationalField) or isinstance(L, RationalField):
        return True
    a, b = K.square_classes(), L.square_classes()
    if a is not None and b is not None:
        return f2_rank(a + b) == len(a) + len(b)
    if gcd(K.degree, L.degree) == 1:
        return True
    raise UnsupportedTensor(f"cannot decide whether {K} (x) {L} is a field")


def contains(M: FieldSpec, K: FieldSpec) -> bool:
    """Whether K embeds canonically into M (identity, Q, or a compositum constituent)."""
    if K == M or isinstance(K, RationalField):
        return True
    if isinstance(M, Compositum):
        return contains(M.left, K) or contains(M.right, K)
    return False


def factor_map(M: FieldSpec, K: FieldSpec, v: Place) -> list[tuple[int, int]]:
    """For each local factor of M at v: (index of the K-factor below it, relative degree)."""
    mf = M.local_factors(v)
    if K == M:
        return [(i, 1) for i in range(len(mf))]
    kf = K.local_factors(v)
    if isinstance(K, RationalField):
        return [(0, f.degree) for f in mf]
    if isinstance(M, Compositum):
        for side, pos in ((M.left, 0), (M.right, 1)):
            if contains(side, K):
                inner = factor_map(side, K, v)
                out = []
                for f in mf:
                    j, _ = inner[f.parents[pos]]
                    out.append((j, f.degree // kf[j].degree))
                return out
    raise FieldMapError(f"no canonical embedding of {K} into {M}")


# -- etale algebras -------------------------------------------------------------

@dataclass(frozen=True)
class EtaleAlgebra:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ConicalError("an etale algebra needs at least one factor")

    @property
    def degree(self) -> int:
        return sum(K.degree for K in self.factors)


def has_local_point(A: EtaleAlgebra, v: Place) -> bool:
    return any(1 in K.local_degrees(v) for K in A.factors)


@dataclass
class LocalCertificate:
    soluble_everywhere: bool
    witness: Place | None
    direct: dict            # Place -> bool, the exceptional places checked one by one
    generic_ok: bool        # no Frobenius character kills every factor
    basis: list             # square classes spanning the algebra's classes
    bad_character: tuple | None = None

    def to_json(self):
        return {
            "soluble_everywhere": self.soluble_everywhere,
            "witness": None if self.witness is None else str(self.witness),
            "direct": {str(v): ok for v, ok in sorted(self.direct.items())},
            "generic_ok": self.generic_ok,
            "basis": list(self.basis),
            "bad_character": None if self.bad_character is None else list(self.bad_character),
        }


def exceptional_places(fields) -> list[Place]:
    ps = {2}
    for K in fields:
        for d in K.square_classes() or []:
            ps.update(prime_support(d))
        ps.update(v.prime for v in K.ramified() if not v.is_real)
    return [REAL] + [Place(p) for p in sorted(ps)]


def bad_characters(fields) -> tuple[list[int], list[tuple[int, ...]]]:
    """Frobenius sign patterns at unramified primes under which no field has a degree-1 place.

    A character assigns +-1 to each basis class; by Chebotarev every pattern
    occurs at infinitely many primes.  A multiquadratic field has a split place
    exactly when the character is trivial on all of its square classes.
    """
    span = F2Span()
    for K in fields:
        for d in K.square_classes():
            span.add(d)
    coords = [[span.coordinates(d) for d in K.square_classes()] for K in fields]
    bad = []
    for chi in product((0, 1), repeat=span.rank):
        def value(mask):
            return sum(chi[i] for i in range(span.rank) if mask >> i & 1) % 2
        if all(any(value(m) for m in cs) for cs in coords):
            bad.append(chi)
    return span.gens, bad


def _realize_character(basis, chi, skip, bound=10 ** 6) -> Place:
    for p in sieve.primerange(2, bound + 1):
        if p in skip:
            continue
        if all((legendre_symbol(d, p) == -1) == bool(c) for d, c in zip(basis, chi)):
            return Place(p)
    raise ConicalError("no prime realising the character below the search bound")


def certify_everywhere_local(A: EtaleAlgebra) -> LocalCertificate:
    """Decide whether A has a point over every completion of Q."""
    if any(not K.is_multiquadratic for K in A.factors):
        raise CertificationUnsupported("certification needs multiquadratic factors")
    if any(isinstance(K, RationalField) for K in A.factors):
        return LocalCertificate(True, None, {}, True, [])
    places = exceptional_places(A.factors)
    direct = {v: has_local_point(A, v) for v in places}
    basis, bad = bad_characters(A.factors)
    witness = None
    if bad:
        skip = {v.prime for v in places if not v.is_real}
        witness = _realize_character(basis, bad[0], skip)
        assert not has_local_point(A, witness)
    elif not all(direct.values()):
        witness = min(v for v, ok in direct.items() if not ok)
    ok = not bad and all(direct.values())
    return LocalCertificate(ok, witness, direct, not bad, basis, bad[0] if bad else None)


# -- JSON ---------------------------------------------------------------------

def field_to_json(K: FieldSpec) -> dict:
    if isinstance(K, RationalField):
        return {"type": "Q"}
    if isinstance(K, Quadratic):
        return {"type": "quad", "d": K.d}
    if isinstance(K, Biquadratic):
        return {"type": "biquad", "d1": K.d1, "d2": K.d2}
    if isinstance(K, Compositum):
        return {"type": "compositum", "left": field_to_json(K.left), "right": field_to_json(K.right)}
    if isinstance(K, Profiled):
        out = {"type": "profiled", "name": K.name, "degree": K.degree,
               "profile": {str(v): list(ds) for v, ds in K.profile},
               "ramified": sorted(v.to_json() for v in K.ramified_places)}
        if K.poly is not None:
            out["poly"] = list(K.poly)
        if K.disc is not None:
            out["disc"] = K.disc
        return out
    raise TypeError(K)


def field_from_json(obj) -> FieldSpec:
    kind = obj.get("type")
    if kind == "Q":
        return QQ
    if kind == "quad":
        return Quadratic(int(obj["d"]))
    if kind == "biquad":
        return Biquadratic(int(obj["d1"]), int(obj["d2"]))
    if kind == "compositum":
        return Compositum(field_from_json(obj["left"]), field_from_json(obj["right"]))
    if kind == "profiled":
        return Profiled(obj["name"], int(obj["degree"]), obj.get("profile", {}),
                        frozenset(obj.get("ramified", [])), obj.get("poly"), obj.get("disc"))
    raise ConicalError(f"unknown field type {kind!r}")


def cubic_x3_x_1() -> Profiled:
    """The cubic field of x^3 - x - 1 (discriminant -23), profiled at 23 and the real place."""
    return Profiled("F", 3, {"real": [1, 2], "23": [1, 2]}, frozenset({23}),
                    poly=(1, 0, -1, -1), disc=-23)


def compose(K: FieldSpec, L: FieldSpec) -> FieldSpec:
    """Compositum with Q absorbed; two quadratics give a Biquadratic."""
    if isinstance(K, RationalField):
        return L
    if isinstance(L, RationalField):
        return K
    if isinstance(K, Quadratic) and isinstance(L, Quadratic):
        return Biquadratic(K.d, L.d)
    return Compositum(K, L)


def check_squarefree_nonunit(d: int) -> int:
    if not is_squarefree(d) or d == 1:
        raise ConicalError(f"{d} is not a squarefree non-square")
    return d
