"""Conics z^2 = a x^2 + b y^2 over Q: labels, rational points by Legendre
descent, and enumeration of further points on a soluble conic."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from .arith_core import as_rational, hilbert_symbol, quaternion_support, sqrt_mod_squarefree
from .errors import ConicalError


@dataclass(frozen=True)
class ConicLabel:
    """``Split`` (a projective line) or the conic z^2 = a x^2 + b y^2 over Q."""

    a: Fraction | None = None
    b: Fraction | None = None

    def __post_init__(self):
        if (self.a is None) != (self.b is None):
            raise ConicalError("a quaternion label needs both coefficients")
        if self.a is not None:
            a, b = as_rational(self.a), as_rational(self.b)
            if a == 0 or b == 0:
                raise ConicalError("conic coefficients must be nonzero")
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @property
    def is_split(self) -> bool:
        return self.a is None

    def locally_soluble(self, v) -> bool:
        return self.is_split or hilbert_symbol(self.a, self.b, v) == 1

    def to_json(self):
        return "split" if self.is_split else {"a": str(self.a), "b": str(self.b)}

    @classmethod
    def from_json(cls, obj) -> ConicLabel:
        if obj in (None, "split"):
            return SPLIT
        return cls(as_rational(obj["a"]), as_rational(obj["b"]))

    def __str__(self):
        return "split" if self.is_split else f"({self.a},{self.b})"


SPLIT = ConicLabel()


def Quaternion(a, b) -> ConicLabel:
    return ConicLabel(as_rational(a), as_rational(b))


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s^2 * m with m squarefree; returns (m, s)."""
    from sympy import factorint

    s, m = 1, -1 if n < 0 else 1
    for p, e in factorint(abs(n)).items():
        s *= p ** (e // 2)
        m *= p ** (e % 2)
    return m, s


def _descent(a: int, b: int):
    """Primitive integer (x, y, z) with z^2 = a x^2 + b y^2 for squarefree a, b, or None."""
    if a == 1:
        return (1, 0, 1)
    if b == 1:
        return (0, 1, 1)
    if a < 0 and b < 0:
        return None
    if abs(a) > abs(b):
        sol = _descent(b, a)
        return None if sol is None else (sol[1], sol[0], sol[2])
    if a == b:
        # z^2 = a (x^2 + y^2): needs a = N(u + iv) times a square; reduce via -1
        sol = _descent(a, -1)
        if sol is None:
            return None
        x1, y1, z1 = sol  # z1^2 = a x1^2 - y1^2, so a x1^2 = z1^2 + y1^2
        return (z1, y1, a * x1)
    # |a| <= |b|, |b| >= 2
    t = sqrt_mod_squarefree(a % abs(b), abs(b))
    if t is None:
        return None
    if t > abs(b) // 2:
        t -= abs(b)
    q, rem = divmod(t * t - a, b)
    assert rem == 0
    b1, r = _squarefree_split(q)
    if b1 == 0:
        return None
    sol = _descent(a, b1)
    if sol is None:
        return None
    x1, y1, z1 = sol
    # (z1 + x1 sqrt a)(t + sqrt a) has norm b1 y1^2 * b * b1 r^2
    z = z1 * t + a * x1
    x = z1 + x1 * t
    y = b1 * r * y1
    g = gcd(gcd(x, y), z)
    return (x // g, y // g, z // g)


def conic_point(a, b) -> tuple[int, int, int] | None:
    """A rational point (x : y : z) on z^2 = a x^2 + b y^2, or None if there is none.

    Coefficients are cleared to squarefree integers, the conic is solved by
    Legendre-style descent on |b|, and the substitutions are unwound.  The
    result is checked exactly before it is returned.
    """
    a, b = as_rational(a), as_rational(b)
    if a == 0 or b == 0:
        raise ConicalError("conic coefficients must be nonzero")
    # a = n/d: a x^2 = (n d) (x/d)^2, and n d = s^2 m
    ma, sa = _squarefree_split(a.numerator * a.denominator)
    mb, sb = _squarefree_split(b.numerator * b.denominator)
    sol = _descent(ma, mb)
    if sol is None:
        return None
    x1, y1, z1 = sol
    # z^2 = ma x1^2 + mb y1^2 with a x^2 = ma (sa x / a.den)^2
    x = Fraction(x1 * a.denominator, sa)
    y = Fraction(y1 * b.denominator, sb)
    z = Fraction(z1)
    den = x.denominator * y.denominator // gcd(x.denominator, y.denominator)
    X, Y, Z = int(x * den), int(y * den), int(z * den)
    g = gcd(gcd(X, Y), Z)
    X, Y, Z = X // g, Y // g, Z // g
    if Z < 0 or (Z == 0 and (X, Y) < (0, 0)):
        X, Y, Z = -X, -Y, -Z
    if Z * Z != a * X * X + b * Y * Y:
        raise ConicalError(f"descent produced an invalid point for ({a}, {b})")
    return (X, Y, Z)


def on_conic(point, a, b) -> bool:
    x, y, z = (as_rational(c) for c in point)
    return (x, y, z) != (0, 0, 0) and z * z == as_rational(a) * x * x + as_rational(b) * y * y


def conic_is_split(a, b) -> bool:
    return all(hilbert_symbol(a, b, v) == 1 for v in quaternion_support(a, b))


def more_conic_points(a, b, start, count: int):
    """``count`` distinct rational points on the conic, via lines through ``start``."""
    a, b = as_rational(a), as_rational(b)
    x0, y0, z0 = (as_rational(c) for c in start)
    seen, out = set(), []
    t = 0
    while len(out) < count:
        for slope in ((Fraction(t),) if t == 0 else (Fraction(t), Fraction(-t))):
            # P0 + lam * (1, slope, 0)
            q = a + b * slope * slope
            if q == 0:
                continue
            lam = -2 * (a * x0 + b * y0 * slope) / q
            pt = _primitive((x0 + lam, y0 + lam * slope, z0))
            if pt not in seen:
                seen.add(pt)
                out.append(pt)
        t += 1
        if t > 10 * count + 10:
            break
    return out[:count]


def _primitive(pt):
    fr = [as_rational(c) for c in pt]
    den = 1
    for c in fr:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in fr]
    g = 0
    for c in ints:
        g = gcd(g, c)
    ints = [c // g for c in ints]
    for c in reversed(ints):
        if c:
            if c < 0:
                ints = [-c2 for c2 in ints]
            break
    return tuple(ints)


def small_conic_point(a: int, b: int, height: int):
    """Brute-force search for a point of height <= ``height`` (test oracle)."""
    for h in range(1, height + 1):
        for x in range(0, h + 1):
            for y in range(-h, h + 1):
                zz = a * x * x + b * y * y
                if zz < 0:
                    continue
                z = isqrt(zz)
                if z * z == zz and (x, y, z) != (0, 0, 0) and max(x, abs(y), z) == h:
                    return (x, y, z)
    return None
