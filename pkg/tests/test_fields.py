import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conical.arith_core import REAL, Place, legendre_symbol, primes_up_to
from conical.errors import ConicalError, FieldMapError, InsufficientProfile, UnsupportedTensor
from conical.fields import (
    QQ, Biquadratic, Compositum, EtaleAlgebra, F2Span, Profiled, Quadratic, bad_characters,
    certify_everywhere_local, compose, contains, exceptional_places, f2_rank, factor_map,
    field_from_json, field_to_json, has_local_point, cubic_x3_x_1, tensor_is_field,
)

x = sympy.Symbol("x")
CLASSES = [-1, 2, -2, 3, 5, 6, 7, -7, 10, 13, 17, 34, -23]


def _classes(K):
    return K.square_classes()


def minpoly(K):
    return sympy.minimal_polynomial(sum(sympy.sqrt(d) for d in _classes(K)), x)


def brute_local_degrees(K, v):
    f = sympy.Poly(minpoly(K), x)
    if v.is_real:
        r = len(sympy.real_roots(f))
        return sorted([1] * r + [2] * ((K.degree - r) // 2))
    fp = sympy.Poly(f.as_expr(), x, modulus=v.prime)
    return sorted(g.degree() for g, e in fp.factor_list()[1] for _ in range(e))


def random_multiquadratic(rng, k):
    while True:
        ds = rng.sample(CLASSES, k)
        if f2_rank(ds) == k:
            K = Quadratic(ds[0])
            for d in ds[1:]:
                K = compose(K, Quadratic(d))
            return K


def test_quadratic_normalises():
    assert Quadratic(8).d == 2
    assert Quadratic(-12).d == -3
    with pytest.raises(ConicalError):
        Quadratic(9)


def test_quadratic_ramification():
    assert Quadratic(5).ramified() == frozenset({Place(5)})
    assert Quadratic(-1).ramified() == frozenset({Place(2)})
    assert Quadratic(17).ramified() == frozenset({Place(17)})


@pytest.mark.parametrize("k", [1, 2, 3])
def test_local_degrees_match_factorisation(k):
    rng = random.Random(k)
    for _ in range(6):
        K = random_multiquadratic(rng, k)
        bad = {p for d in _classes(K) for p in sympy.primefactors(2 * d)}
        disc = sympy.discriminant(minpoly(K), x)
        for p in primes_up_to(80):
            if p in bad or disc % p == 0:
                continue
            assert sorted(K.local_degrees(Place(p))) == brute_local_degrees(K, Place(p)), (K, p)
        assert sorted(K.local_degrees(REAL)) == brute_local_degrees(K, REAL)


def test_local_degrees_at_ramified_primes_sum_to_degree():
    K = Biquadratic(2, 17)
    for p in (2, 17, 3):
        assert sum(K.local_degrees(Place(p))) == 4
    # Q_2(sqrt 17) = Q_2, and sqrt 2 generates a ramified quadratic
    assert sorted(K.local_degrees(Place(2))) == [2, 2]


def test_cubic_x3_x_1_profile():
    F = cubic_x3_x_1()
    f = sympy.Poly(x ** 3 - x - 1, x)
    for p in primes_up_to(200):
        if p == 23:
            assert sorted(F.local_degrees(Place(p))) == [1, 2]
            continue
        degs = sorted(F.local_degrees(Place(p)))
        fp = sympy.Poly(f.as_expr(), x, modulus=p)
        assert degs == sorted(g.degree() for g, e in fp.factor_list()[1] for _ in range(e))
        if degs == [1, 2]:
            # the quadratic factor is Q_p(sqrt(-23)) and -23 is a nonresidue
            assert legendre_symbol(-23, p) == -1
    assert sorted(F.local_degrees(REAL)) == [1, 2]


def test_profiled_without_data_raises():
    F = Profiled("G", 3, {"7": [3]}, frozenset({7}))
    with pytest.raises(InsufficientProfile):
        F.local_degrees(Place(11))
    with pytest.raises(ConicalError):
        Profiled("H", 3, {"7": [1, 1]})


def test_tensor_and_containment():
    assert tensor_is_field(Quadratic(2), Quadratic(17))
    assert not tensor_is_field(Quadratic(2), Quadratic(8))
    assert not tensor_is_field(Biquadratic(2, 17), Quadratic(34))
    assert tensor_is_field(Quadratic(5), cubic_x3_x_1())
    with pytest.raises(UnsupportedTensor):
        tensor_is_field(cubic_x3_x_1(), Profiled("G", 3, {"7": [3]}, frozenset({7})))
    B = Biquadratic(5, 13)
    assert contains(B, Quadratic(5)) and contains(B, QQ) and not contains(B, Quadratic(65))
    with pytest.raises(ConicalError):
        Compositum(Quadratic(3), Quadratic(12))


@given(st.lists(st.sampled_from(CLASSES), min_size=1, max_size=6))
def test_f2span_coordinates(ds):
    span = F2Span()
    for d in ds:
        span.add(d)
    for d in ds:
        mask = span.coordinates(d)
        prod = 1
        for i, g in enumerate(span.gens):
            if mask >> i & 1:
                prod *= g
        assert sympy.sqrt(sympy.Rational(prod, d)).is_rational
    assert span.rank == f2_rank(ds) <= len(ds)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([REAL, Place(2), Place(3), Place(5), Place(13), Place(17)]))
def test_factor_map_degrees(seed, v):
    rng = random.Random(seed)
    M = random_multiquadratic(rng, rng.randint(2, 3))
    for K in (QQ, M.left, M.right, M):
        fm = factor_map(M, K, v)
        kf = K.local_factors(v)
        assert len(fm) == len(M.local_factors(v))
        # relative degrees over each factor of K add up to [M:K]
        for j, fk in enumerate(kf):
            above = [(i, e) for i, (jj, e) in enumerate(fm) if jj == j]
            assert sum(M.local_factors(v)[i].degree for i, _ in above) == fk.degree * M.degree // K.degree


def test_factor_map_rejects_foreign_field():
    with pytest.raises(FieldMapError):
        factor_map(Biquadratic(2, 17), Quadratic(34), Place(3))


def test_bad_characters_sextic_algebra():
    fields = [Quadratic(2), Quadratic(17), Quadratic(34)]
    basis, bad = bad_characters(fields)
    assert sorted(basis) == [2, 17] and bad == []
    basis, bad = bad_characters([Quadratic(2), Quadratic(3)])
    assert len(bad) == 1


def test_certificates():
    cert = certify_everywhere_local(EtaleAlgebra([Quadratic(2), Quadratic(17), Quadratic(34)]))
    assert cert.soluble_everywhere and cert.generic_ok
    assert set(cert.direct) == {REAL, Place(2), Place(17)}
    cert = certify_everywhere_local(EtaleAlgebra([Quadratic(2)]))
    assert not cert.soluble_everywhere and not has_local_point(EtaleAlgebra([Quadratic(2)]), cert.witness)
    assert cert.witness == Place(3) and not has_local_point(EtaleAlgebra([Quadratic(2)]), Place(5))
    cert = certify_everywhere_local(EtaleAlgebra([Quadratic(-1), Quadratic(2), Quadratic(-2)]))
    assert cert.generic_ok and not cert.soluble_everywhere    # no point at the real place... or at 2
    assert cert.witness in (REAL, Place(2))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(CLASSES), min_size=1, max_size=4))
def test_certificate_agrees_with_prime_scan(ds):
    A = EtaleAlgebra([Quadratic(d) for d in ds])
    cert = certify_everywhere_local(A)
    places = [REAL] + [Place(p) for p in primes_up_to(400)]
    scan = all(has_local_point(A, v) for v in places)
    if cert.soluble_everywhere:
        assert scan
    else:
        assert not has_local_point(A, cert.witness)
    assert set(exceptional_places(A.factors)) >= set(cert.direct)


@pytest.mark.parametrize("K", [QQ, Quadratic(-1), Biquadratic(5, 13), cubic_x3_x_1(),
                               Compositum(Biquadratic(2, 17), Quadratic(5)), Compositum(Quadratic(5), cubic_x3_x_1())])
def test_field_json_roundtrip(K):
    assert field_from_json(field_to_json(K)) == K
