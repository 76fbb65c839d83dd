"""Exact local arithmetic over Q: valuations, square classes, residue and
Hilbert symbols, modular square roots.

Everything here works on Python ints and ``fractions.Fraction``; completions
are handled by closed-form valuation/residue rules, never numerically.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import gcd

from sympy import factorint, isprime, sieve

from .errors import ConicalError


@total_ordering
@dataclass(frozen=True)
class Place:
    """A place of Q: ``prime=None`` is the real place."""

    prime: int | None = None

    def __post_init__(self):
        if self.prime is not None and not (isinstance(self.prime, int) and isprime(self.prime)):
            raise ConicalError(f"not a prime: {self.prime!r}")

    @classmethod
    def real(cls) -> Place:
        return cls(None)

    @classmethod
    def finite(cls, p: int) -> Place:
        return cls(int(p))

    @classmethod
    def parse(cls, s) -> Place:
        if isinstance(s, Place):
            return s
        if isinstance(s, str) and s.strip().lower() in ("real", "inf", "oo"):
            return cls.real()
        return cls.finite(int(s))

    @property
    def is_real(self) -> bool:
        return self.prime is None

    @property
    def kind(self) -> str:
        return "real" if self.prime is None else "finite"

    def _key(self):
        return (0, 0) if self.prime is None else (1, self.prime)

    def __lt__(self, other):
        if not isinstance(other, Place):
            return NotImplemented
        return self._key() < other._key()

    def __str__(self):
        return "real" if self.prime is None else str(self.prime)

    def __repr__(self):
        return f"Place({self})"

    def to_json(self):
        return "real" if self.prime is None else self.prime


REAL = Place.real()


@dataclass(frozen=True)
class QQZ:
    """An element of Q/Z, stored as a Fraction in [0, 1)."""

    value: Fraction = Fraction(0)

    def __post_init__(self):
        v = Fraction(self.value)
        object.__setattr__(self, "value", v - (v.numerator // v.denominator))

    def __add__(self, other):
        return QQZ(self.value + _as_fraction(other))

    __radd__ = __add__

    def __sub__(self, other):
        return QQZ(self.value - _as_fraction(other))

    def __neg__(self):
        return QQZ(-self.value)

    def __mul__(self, k: int):
        return QQZ(self.value * int(k))

    __rmul__ = __mul__

    def __bool__(self):
        return self.value != 0

    def order(self) -> int:
        return self.value.denominator

    def __str__(self):
        return str(self.value)

    def __repr__(self):
        return f"QQZ({self.value})"


def _as_fraction(x):
    if isinstance(x, QQZ):
        return x.value
    return Fraction(x)


HALF = QQZ(Fraction(1, 2))


def as_rational(a) -> Fraction:
    if isinstance(a, str):
        return Fraction(a.strip())
    return Fraction(a)


def _nonzero(a) -> Fraction:
    a = as_rational(a)
    if a == 0:
        raise ConicalError("zero is not allowed here")
    return a


def valuation(a, p: int) -> int:
    a = _nonzero(a)
    v = 0
    n, d = a.numerator, a.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part(a, p: int) -> Fraction:
    a = _nonzero(a)
    return a / Fraction(p) ** valuation(a, p)


def squarefree_part(a) -> int:
    """Squarefree integer in the same class of Q*/Q*^2 as ``a`` (sign kept)."""
    a = _nonzero(a)
    n = abs(a.numerator * a.denominator)
    out = 1
    for p, e in factorint(n).items():
        if e % 2:
            out *= p
    return -out if a < 0 else out


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorint(abs(n)).values())


def prime_support(a) -> list[int]:
    """Primes dividing the numerator or denominator of ``a``."""
    a = _nonzero(a)
    return sorted(set(factorint(abs(a.numerator))) | set(factorint(a.denominator)))


def primes_up_to(n: int) -> list[int]:
    return list(sieve.primerange(2, n + 1))


def legendre_symbol(a: int, p: int) -> int:
    if p == 2 or not isprime(p):
        raise ConicalError(f"legendre_symbol needs an odd prime, got {p}")
    r = pow(int(a) % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _unit_mod(u: Fraction, m: int) -> int:
    # residue of a p-adic unit u = n/d modulo m (d invertible mod m)
    return u.numerator * pow(u.denominator, -1, m) % m


def is_local_square(a, v: Place) -> bool:
    a = _nonzero(a)
    if v.is_real:
        return a > 0
    p = v.prime
    if valuation(a, p) % 2:
        return False
    u = unit_part(a, p)
    if p == 2:
        return _unit_mod(u, 8) == 1
    return legendre_symbol(_unit_mod(u, p), p) == 1


def local_square_class(a, v: Place) -> int:
    """Image of ``a`` in Q_v*/Q_v*^2 as a bitmask (a group homomorphism to F_2^k).

    real: 1 bit (sign); odd p: (valuation parity, residue bit); p = 2:
    (valuation parity, epsilon, omega) of the unit part.
    """
    a = _nonzero(a)
    if v.is_real:
        return int(a < 0)
    p = v.prime
    val = valuation(a, p) % 2
    u = unit_part(a, p)
    if p == 2:
        r = _unit_mod(u, 8)
        eps = ((r - 1) // 2) % 2
        omega = ((r * r - 1) // 8) % 2
        return val | (eps << 1) | (omega << 2)
    res = 0 if legendre_symbol(_unit_mod(u, p), p) == 1 else 1
    return val | (res << 1)


def hilbert_symbol(a, b, v: Place) -> int:
    a, b = _nonzero(a), _nonzero(b)
    if v.is_real:
        return -1 if (a < 0 and b < 0) else 1
    p = v.prime
    alpha, beta = valuation(a, p), valuation(b, p)
    u, w = unit_part(a, p), unit_part(b, p)
    if p == 2:
        ur, wr = _unit_mod(u, 8), _unit_mod(w, 8)
        eps_u, eps_w = ((ur - 1) // 2) % 2, ((wr - 1) // 2) % 2
        om_u, om_w = ((ur * ur - 1) // 8) % 2, ((wr * wr - 1) // 8) % 2
        e = eps_u * eps_w + alpha * om_w + beta * om_u
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    lu = legendre_symbol(_unit_mod(u, p), p)
    lw = legendre_symbol(_unit_mod(w, p), p)
    return sign * lu ** (beta % 2) * lw ** (alpha % 2)


def hilbert_invariant(a, b, v: Place) -> QQZ:
    """Local invariant (0 or 1/2) of the quaternion class (a, b) at v."""
    return HALF if hilbert_symbol(a, b, v) == -1 else QQZ()


def quaternion_support(a, b) -> list[Place]:
    """Places where (a, b) may be ramified: real, 2 and primes dividing a or b."""
    ps = {2} | set(prime_support(a)) | set(prime_support(b))
    return [REAL] + [Place(p) for p in sorted(ps)]


# -- square roots -----------------------------------------------------------

def sqrt_mod_prime(a: int, p: int) -> int | None:
    """A square root of a mod p (Tonelli-Shanks), or None."""
    a %= p
    if p == 2 or a == 0:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def hensel_sqrt(a: int, p: int, k: int) -> int | None:
    """r with r^2 = a mod p^k for a p-adic unit a, or None if a is not a p-adic square."""
    if a % p == 0:
        raise ConicalError("hensel_sqrt needs a unit")
    if p == 2:
        if a % 8 != 1:
            return None
        r = 1
        for j in range(3, k + 1):
            if (r * r - a) % (1 << (j + 1)):
                r += 1 << (j - 1)
        # r^2 = a mod 2^(k+1) once the loop reaches j = k
        return r % (1 << k) if k > 0 else 0
    r = sqrt_mod_prime(a, p)
    if r is None:
        return None
    mod = p
    while mod < p ** k:
        mod = min(mod * mod, p ** k)
        r = (r - (r * r - a) * pow(2 * r, -1, mod)) % mod
    return r % p ** k


def crt(residues, moduli) -> tuple[int, int]:
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        g = gcd(m, n)
        if (r - x) % g:
            raise ConicalError("incompatible congruences")
        t = (r - x) // g * pow(m // g, -1, n // g) % (n // g)
        x += m * t
        m = m // g * n
        x %= m
    return x, m


def sqrt_mod_squarefree(a: int, m: int) -> int | None:
    """A square root of a modulo a squarefree m > 0, or None."""
    if m == 1:
        return 0
    roots, mods = [], []
    for p in factorint(m):
        r = sqrt_mod_prime(a, p)
        if r is None:
            return None
        roots.append(r)
        mods.append(p)
    return crt(roots, mods)[0]
