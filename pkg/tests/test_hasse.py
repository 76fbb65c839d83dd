import random
from decimal import Decimal, getcontext

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conical.arith_core import REAL, Place, is_local_square, primes_up_to
from conical.brauer import TruncationWindow, window_for
from conical.conics import Quaternion, conic_point, on_conic
from conical.curve_model import (
    BranchOrbit, ConicalCurve, Orbit, build_Cf, build_conjugate_lines, build_D, build_two_lines,
    galois_from_labels,
)
from conical.errors import ConicalError, CurveError
from conical.fields import QQ, Quadratic, cubic_x3_x_1
from conical.forms import SEXTIC_2_17_34, BinaryForm, construct_form
from conical.hasse import (
    TRUNCATION_CAVEAT, counterexample_report, curve_adelic_points, curve_local_points,
    curve_rational_points, sample_adelic_point, verify_tree_hasse, verify_witness,
)

from curvegen import brute_rational_points, random_tree_curve


@pytest.fixture(scope="module")
def D():
    return build_D(SEXTIC_2_17_34, Quadratic(5), cubic_x3_x_1())


def conic_star(a, b, d):
    """A rational conic z^2 = a x^2 + b y^2 meeting a conjugate pair of lines over Q(sqrt d)."""
    K = Quadratic(d)
    comps = [Orbit("E", QQ, Quaternion(a, b)), Orbit("M", K)]
    branches = [BranchOrbit("E>P", K, "E", "P", ((0, 0), (0, 1))),
                BranchOrbit("M>P", K, "M", "P", ((0, 0), (1, 1)))]
    labels = {"E": QQ, "M": K, "P": K, "E>P": K, "M>P": K}
    return ConicalCurve(comps, [Orbit("P", K)], branches, galois_from_labels(labels), name="star")


def test_local_points_examples(D):
    assert curve_local_points(build_Cf(SEXTIC_2_17_34), Place(17))
    for p in primes_up_to(100):
        if p not in (2, 5, 17, 23) and is_local_square(2, Place(p)):
            assert curve_local_points(D, Place(p))
    assert not curve_local_points(build_conjugate_lines(2), Place(5))


def test_adelic_examples(D):
    assert curve_adelic_points(build_Cf(SEXTIC_2_17_34)).status == "certified"
    cert = curve_adelic_points(D)
    assert cert.status == "certified" and sorted(cert.basis) == [2, 5, 17]
    cert = curve_adelic_points(build_conjugate_lines(2))
    assert cert.status == "certified_failure"
    assert not curve_local_points(build_conjugate_lines(2), cert.witness)


def test_adelic_certificate_matches_prime_scan(D):
    # the certificate covers every place; spot-check all primes below 500 directly
    for p in primes_up_to(500):
        assert curve_local_points(D, Place(p)), p
    assert curve_local_points(D, REAL)


def test_rational_points_examples(D):
    r = curve_rational_points(build_Cf(SEXTIC_2_17_34))
    assert r["exists"] and r["witness"].kind == "singular_point" and r["witness"].orbit == "P"
    assert not curve_rational_points(D)["exists"]
    line = ConicalCurve([Orbit("A", QQ)], [], [])
    r = curve_rational_points(line)
    assert r["exists"] and r["witness"].kind == "smooth_on_component" and verify_witness(line, r["witness"])


def test_tree_hasse_Cf():
    out = verify_tree_hasse(build_Cf(SEXTIC_2_17_34))
    assert out["hasse_holds"] and out["fixed_vertex"] == "P.0"
    assert out["witness"].kind == "singular_point" and out["witness"].orbit == "P"


def test_tree_hasse_conic_star():
    C = conic_star(5, 4, 2)
    out = verify_tree_hasse(C)
    w = out["witness"]
    assert out["fixed_vertex"] == "E.0" and w.kind == "smooth_on_component"
    assert on_conic(w.coordinates, 5, 4) and tuple(w.coordinates) == conic_point(5, 4)


def test_tree_hasse_rejects_non_trees_and_uncertified():
    with pytest.raises(CurveError):
        verify_tree_hasse(build_two_lines(-1))
    with pytest.raises(CurveError):
        verify_tree_hasse(conic_star(-1, -1, 2))


def test_marks_are_avoided():
    C = ConicalCurve([Orbit("A", QQ), Orbit("B", QQ)], [Orbit("P", QQ)],
                     [BranchOrbit("A>P", QQ, "A", "P", ((0, 0),), ((1, 0),)),
                      BranchOrbit("B>P", QQ, "B", "P", ((0, 0),), ((0, 1),))])
    r = curve_rational_points(C)
    assert r["exists"]
    from conical.hasse import smooth_witness
    w = smooth_witness(C, C.components[0])
    assert w.coordinates != (1, 0) and verify_witness(C, w)


def test_reports(D):
    rep = counterexample_report(D, window_for(D, 2, 50))
    assert rep["classification"] == "counterexample_with_trivial_truncated_Brauer"
    assert rep["caveat"] == TRUNCATION_CAVEAT and rep["quotient_dimension"] == 0
    C = build_Cf(SEXTIC_2_17_34)
    assert counterexample_report(C, window_for(C, 2, 20))["classification"] == "has_rational_points"
    C = build_conjugate_lines(2)
    assert counterexample_report(C, window_for(C, 2, 20))["classification"] == "locally_obstructed"


def test_report_flags_nontrivial_quotient():
    # two rational lines through a pair of conjugate points have a rational smooth point, so
    # the report must say so even though the truncated quotient is nontrivial
    C = build_two_lines(-1)
    rep = counterexample_report(C, TruncationWindow(2, (REAL, 2, 5)))
    assert rep["classification"] == "has_rational_points" and rep["quotient_dimension"] == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_rational_points_complete(seed):
    rng = random.Random(seed)
    C = random_tree_curve(rng, max_orbits=6)
    r = curve_rational_points(C)
    assert r["exists"] == brute_rational_points(C)
    if r["exists"]:
        assert verify_witness(C, r["witness"])
        for v in [REAL] + [Place(p) for p in primes_up_to(60)]:
            assert curve_local_points(C, v)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_tree_hasse_never_fails(seed):
    C = random_tree_curve(random.Random(seed))
    cert = curve_adelic_points(C)
    if cert.status == "certified":
        out = verify_tree_hasse(C, cert)
        assert out["hasse_holds"] and verify_witness(C, out["witness"])
        assert curve_rational_points(C)["exists"]
    else:
        # a tree curve without adelic points: the certificate names a failing place
        assert cert.status == "certified_failure"
        assert not curve_local_points(C, cert.witness)


def test_sample_examples():
    out = sample_adelic_point(SEXTIC_2_17_34, [17, "real", 2], 5)
    r17 = int(out["17"]["xy_ratio"])
    assert out["17"]["modulus"] == "17^5" and (r17 * r17 - 2) % 17 ** 5 == 0 and r17 % 17 in (6, 11)
    assert out["real"]["xy_ratio"].startswith("1.41421")
    r2 = int(out["2"]["xy_ratio"])
    assert (r2 * r2 - 17) % 2 ** 5 == 0
    assert sample_adelic_point(SEXTIC_2_17_34, [17], 5, z=0) != sample_adelic_point(SEXTIC_2_17_34, [17], 5, z=1)
    with pytest.raises(ConicalError):
        sample_adelic_point(BinaryForm(quadratic=(2, 3)), [REAL], 3)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(2, 5), (3, -1), (2, 17), (-2, 7), (5, 13)]), st.integers(1, 8))
def test_sampled_points_satisfy_f(ab, k):
    f = construct_form(*ab)
    S = [REAL] + [Place(p) for p in primes_up_to(40)]
    getcontext().prec = 60
    for key, pt in sample_adelic_point(f, S, k).items():
        if key == "real":
            r = Decimal(pt["xy_ratio"])
            d = int(pt["factor"].split("- ")[1].split("*")[0])
            assert abs(r - Decimal(d).sqrt()) < Decimal(10) ** -k
        else:
            p = int(key)
            r = int(pt["xy_ratio"])
            assert pt["modulus"] == f"{p}^{k}"
            assert f.evaluate(r, 1) % p ** k == 0
