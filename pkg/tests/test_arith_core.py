from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conical.arith_core import (
    HALF, QQZ, REAL, Place, as_rational, crt, hensel_sqrt, hilbert_invariant, hilbert_symbol,
    is_local_square, legendre_symbol, local_square_class, primes_up_to, quaternion_support,
    sqrt_mod_prime, sqrt_mod_squarefree, squarefree_part, valuation,
)
from conical.errors import ConicalError

nonzero = st.integers(-10 ** 4, 10 ** 4).filter(bool)
rationals = st.fractions(min_value=-1000, max_value=1000, max_denominator=200).filter(bool)
small_primes = st.sampled_from(primes_up_to(60))


def legendre_brute(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if any(x * x % p == a for x in range(1, p)) else -1


def _is_padic_square_brute(t, p):
    if t == 0:
        return False
    e = 0
    while t % p == 0:
        t //= p
        e += 1
    if e % 2:
        return False
    if p == 2:
        return t % 8 == 1
    return legendre_brute(t, p) == 1


def hilbert_brute(a, b, p, box=40):
    """(a, b)_p = 1 iff a x^2 + b y^2 is a nonzero p-adic square for some x, y; searched over a box."""
    for x in range(box):
        for y in range(box):
            if (x or y) and _is_padic_square_brute(a * x * x + b * y * y, p):
                return 1
    return -1


def test_places_order_and_parse():
    assert sorted([Place(5), REAL, Place(2)]) == [REAL, Place(2), Place(5)]
    assert Place.parse("real") == REAL and Place.parse("17") == Place(17)
    with pytest.raises(ConicalError):
        Place(15)


def test_qqz_arithmetic():
    assert HALF + HALF == QQZ()
    assert QQZ(Fraction(7, 3)).value == Fraction(1, 3)
    assert (QQZ(Fraction(1, 6)) * 3).order() == 2
    assert not QQZ(5)


def test_valuations_and_squarefree():
    assert valuation(Fraction(12, 49), 7) == -2
    assert valuation(96, 2) == 5
    assert squarefree_part(-72) == -2
    assert squarefree_part(Fraction(3, 4)) == 3
    assert as_rational("-5/10") == Fraction(-1, 2)


@pytest.mark.parametrize("p", primes_up_to(50)[1:])
def test_legendre_against_brute(p):
    for a in range(-p, 2 * p):
        assert legendre_symbol(a, p) == legendre_brute(a, p)


def test_hilbert_examples():
    assert hilbert_symbol(-1, -1, REAL) == -1
    assert hilbert_symbol(-1, -1, Place(2)) == -1
    assert hilbert_symbol(2, 17, Place(17)) == 1
    assert hilbert_symbol(3, 5, Place(5)) == -1
    assert hilbert_invariant(-1, -1, Place(3)) == QQZ()


@pytest.mark.parametrize("p", [2, 3, 5])
def test_hilbert_against_finite_search(p):
    vals = [u * p ** e for u in (1, -1, 2, 3, -3, 5, 6, 7, -7) for e in (0, 1)]
    vals = sorted({squarefree_part(v) for v in vals})
    for a in vals:
        for b in vals:
            assert hilbert_symbol(a, b, Place(p)) == hilbert_brute(a, b, p), (a, b, p)


def test_hilbert_two_by_mod8_enumeration():
    # the unit part of a 2-adic number only matters mod 8: check the epsilon/omega formula
    # against the classical table through enumeration of residue classes
    units = [1, 3, 5, 7]
    for u, w in product(units, units):
        for alpha, beta in product((0, 1), repeat=2):
            a, b = u * 2 ** alpha, w * 2 ** beta
            assert hilbert_symbol(a, b, Place(2)) == hilbert_brute(a, b, 2)


@given(nonzero, nonzero)
def test_product_formula(a, b):
    total = sum((hilbert_invariant(a, b, v) for v in quaternion_support(a, b)), QQZ())
    assert total == QQZ()


@given(rationals, rationals, rationals, st.sampled_from([REAL, Place(2), Place(3), Place(7)]))
def test_bimultiplicative_and_symmetric(a, b, c, v):
    assert hilbert_symbol(a, b * c, v) == hilbert_symbol(a, b, v) * hilbert_symbol(a, c, v)
    assert hilbert_symbol(a, b, v) == hilbert_symbol(b, a, v)
    assert hilbert_symbol(a, -a, v) == 1
    if a != 1:
        assert hilbert_symbol(a, 1 - a, v) == 1


@given(nonzero, nonzero, st.sampled_from([REAL, Place(2), Place(3), Place(5), Place(13)]))
def test_square_class_is_homomorphism(a, b, v):
    assert local_square_class(a * b, v) == local_square_class(a, v) ^ local_square_class(b, v)
    assert is_local_square(a, v) == (local_square_class(a, v) == 0)


@given(nonzero, st.sampled_from([REAL, Place(2), Place(3), Place(11)]))
def test_hilbert_trivial_iff_square_detects(a, v):
    # a is a local square iff (a, b)_v = 1 for every b (nondegeneracy), tested on a spanning set
    probes = [-1, 2, 3, 5, 6, 7, 10, 11, 22, 33, -11, 13, 26]
    if v.prime:
        probes += [v.prime, -v.prime, 2 * v.prime]
    assert is_local_square(a, v) == all(hilbert_symbol(a, b, v) == 1 for b in probes)


@given(small_primes.filter(lambda p: p > 2), st.integers(1, 10 ** 6))
def test_sqrt_mod_prime(p, a):
    r = sqrt_mod_prime(a, p)
    if legendre_symbol(a, p) == -1:
        assert r is None
    else:
        assert r is not None and (r * r - a) % p == 0


@given(small_primes, st.integers(-500, 500).filter(bool), st.integers(1, 8))
def test_hensel_sqrt(p, a, k):
    if a % p == 0:
        with pytest.raises(ConicalError):
            hensel_sqrt(a, p, k)
        return
    r = hensel_sqrt(a, p, k)
    if p == 2:
        if a % 8 == 1:
            assert r is not None and (r * r - a) % 2 ** k == 0
    elif legendre_symbol(a, p) == 1:
        assert r is not None and (r * r - a) % p ** k == 0
    if r is not None:
        assert (r * r - a) % p ** k == 0


def test_hensel_examples():
    r = hensel_sqrt(2, 17, 5)
    assert (r * r - 2) % 17 ** 5 == 0 and r % 17 in (6, 11)
    assert (hensel_sqrt(17, 2, 6) ** 2 - 17) % 64 == 0


def test_crt_and_squarefree_modulus():
    r, m = crt([2, 3], [5, 7])
    assert m == 35 and r % 5 == 2 and r % 7 == 3
    r = sqrt_mod_squarefree(2, 7 * 17)
    assert r is not None and (r * r - 2) % 119 == 0
    assert sqrt_mod_squarefree(3, 7) is None


@settings(max_examples=50)
@given(st.integers(-300, 300).filter(bool), st.integers(-300, 300).filter(bool))
def test_invariants_vanish_off_support(a, b):
    support = set(quaternion_support(a, b))
    for p in primes_up_to(60):
        if Place(p) not in support:
            assert hilbert_symbol(a, b, Place(p)) == 1
