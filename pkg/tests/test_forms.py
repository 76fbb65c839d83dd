import random

import pytest
from sympy import primefactors
from hypothesis import given, settings
from hypothesis import strategies as st

from conical.arith_core import REAL, Place, is_squarefree, legendre_symbol, primes_up_to, squarefree_part
from conical.errors import ConicalError
from conical.forms import SEXTIC_2_17_34, BinaryForm, analyze_form, construct_form, local_root_search

SQF = [d for d in range(-50, 51) if d not in (0, 1) and is_squarefree(abs(d))]


def valid_pairs(rng, count):
    out = []
    while len(out) < count:
        a, b = rng.choice(SQF), rng.choice(SQF)
        if squarefree_part(a * b) != 1:
            out.append((a, b))
    return out


def test_sextic_is_counterexample():
    rep = analyze_form(SEXTIC_2_17_34)
    assert rep.verdict == "counterexample"
    assert rep.locally_soluble_everywhere and not rep.globally_soluble
    assert set(rep.certificate.direct) == {REAL, Place(2), Place(17)}
    assert SEXTIC_2_17_34.degree == 6


def test_sextic_direct_places_have_brute_force_roots():
    rep = analyze_form(SEXTIC_2_17_34)
    for v in rep.certificate.direct:
        assert local_root_search(SEXTIC_2_17_34, v, 10) is not None, v
    for p in primes_up_to(50):
        root = local_root_search(SEXTIC_2_17_34, Place(p), 10)
        assert root is not None, p
        x, y = root
        assert SEXTIC_2_17_34.evaluate(x, y) % p ** 10 == 0


def test_verdicts():
    assert analyze_form(BinaryForm(linear=((1, 2),), quadratic=(2,))).verdict == "soluble"
    rep = analyze_form(BinaryForm(quadratic=(2, 3)))
    assert rep.verdict == "locally_obstructed" and rep.witness_place is not None
    assert local_root_search(BinaryForm(quadratic=(2, 3)), rep.witness_place, 6) is None


def test_form_validation_and_printing():
    with pytest.raises(ConicalError):
        BinaryForm(quadratic=(4,))
    with pytest.raises(ConicalError):
        BinaryForm(quadratic=(2, 2))
    assert str(BinaryForm(quadratic=(-1, 2))) == "(x^2 + 1*y^2)*(x^2 - 2*y^2)"
    f = BinaryForm(linear=((2, 4),))
    assert f.linear == ((1, 2),)
    assert BinaryForm.from_json(SEXTIC_2_17_34.to_json()) == SEXTIC_2_17_34
    assert SEXTIC_2_17_34.expanded() == "x**6 - 53*x**4*y**2 + 680*x**2*y**4 - 1156*y**6"


def test_construct_examples():
    f = construct_form(2, 5)
    assert f.degree == 8 and analyze_form(f).verdict == "counterexample"
    f = construct_form(3, -1)
    c = f.quadratic[-1]
    assert c > 0 and c % 8 == 1 and legendre_symbol(c, 3) == 1
    with pytest.raises(ConicalError):
        construct_form(2, 2)
    with pytest.raises(ConicalError):
        construct_form(2, 8)


def test_construct_bound_is_reported():
    with pytest.raises(ConicalError, match="no admissible c"):
        construct_form(2 * 3 * 5 * 7, 11 * 13, bound=10)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SQF), st.sampled_from(SQF))
def test_construct_output_is_certified(a, b):
    if squarefree_part(a * b) == 1:
        with pytest.raises(ConicalError):
            construct_form(a, b)
        return
    f = construct_form(a, b)
    c = f.quadratic[-1]
    assert f.degree == 8
    assert c > 0 and c % 8 == 1 and is_squarefree(c)
    for p in (set(primefactors(a)) | set(primefactors(b))) - {2}:
        assert legendre_symbol(c, p) == 1
    assert analyze_form(f).verdict == "counterexample"


def test_construct_random_batch():
    rng = random.Random(7)
    forms = [construct_form(a, b) for a, b in valid_pairs(rng, 20)]
    assert all(analyze_form(f).verdict == "counterexample" for f in forms)
