"""The partner curve C of D in P^1 x P^1 and the pencil lambda*r + mu*s = 0.

C is a union of (1,1)-curves through a rational point P = ((p:1),(q:1)),
all tangent at P to the direction X = U, where X = x - p*y and U = u - q*v.
The curve number i is

    s_i = alpha_i * X * U + X * v - y * U,

whose bilinear matrix [[alpha_i, 1], [-1, 0]] has determinant 1, so each
s_i is irreducible.  Two of them differ by (alpha_i - alpha_j) * X * U and
so meet only at P.  For even deg f one s_i is replaced by the vertical line X = 0.
"""
from __future__ import annotations

from fractions import Fraction

import sympy

from .conics import SPLIT
from .curve_model import BranchOrbit, ConicalCurve, Orbit, build_D, galois_from_labels, horizontal_degrees
from .errors import CurveError
from .fields import QQ, Biquadratic, FieldSpec, Profiled, Quadratic, RationalField
from .forms import BinaryForm

x, y, u, v = sympy.symbols("x y u v")


def horizontal_poly(K: FieldSpec):
    """Binary form in (u, v) whose roots embed Spec(K) into P^1."""
    if isinstance(K, RationalField):
        return u
    if isinstance(K, Quadratic):
        return u ** 2 - K.d * v ** 2
    if isinstance(K, Biquadratic):
        a, b = K.d1, K.d2
        return u ** 4 - 2 * (a + b) * u ** 2 * v ** 2 + (a - b) ** 2 * v ** 4
    if isinstance(K, Profiled) and K.poly is not None:
        n = len(K.poly) - 1
        return sum(c * u ** (n - i) * v ** i for i, c in enumerate(K.poly))
    raise CurveError(f"no defining polynomial available for {K}")


def _vertical_factors(f: BinaryForm):
    return f.factor_polys(x, y)


def _hits_dsing(s, f: BinaryForm, horizontals) -> bool:
    """Whether s = 0 passes through an intersection of a vertical and a horizontal of D."""
    for phi in _vertical_factors(f):
        for psi in horizontals:
            g = sympy.Poly(psi.subs(v, 1), u)
            if sympy.Poly(phi, x, y).degree(x) == 0:      # phi = c*y: the root (1:0)
                h = sympy.Poly(s.subs({x: 1, y: 0, v: 1}), u)
                if h.is_zero or sympy.gcd(h, g).degree() > 0:
                    return True
                continue
            h = sympy.expand(s.subs({y: 1, v: 1}))
            res = sympy.Poly(sympy.resultant(h, g.as_expr(), u), x)
            ph = sympy.Poly(phi.subs(y, 1), x)
            if res.is_zero or sympy.gcd(res, ph).degree() > 0:
                return True
    return False


def _candidates():
    yield 0
    k = 1
    while True:
        yield k
        yield -k
        k += 1


def build_pencil(f: BinaryForm, L: FieldSpec, F: FieldSpec, P=None, alphas=None, max_alpha: int = 200):
    """Equations r (for D) and s (for C), the pencil, and the bookkeeping reports."""
    D = build_D(f, L, F)
    d = f.degree
    gL, gF = horizontal_poly(L), horizontal_poly(F)
    fx = sympy.Mul(*_vertical_factors(f))
    if P is None:
        p = next(c for c in _candidates() if fx.subs({x: c, y: 1}) != 0)
        q = next(c for c in _candidates() if (gL * gF).subs({u: c, v: 1}) != 0)
    else:
        p, q = (Fraction(c) for c in P)
        if fx.subs({x: sympy.Rational(p), y: 1}) == 0 or (gL * gF).subs({u: sympy.Rational(q), v: 1}) == 0:
            raise CurveError(f"P = ({p}, {q}) lies on D")
    p, q = sympy.Rational(p), sympy.Rational(q)
    X, U = x - p * y, u - q * v
    n_conics = d if d % 2 else d - 1
    chosen, rejected = [], []
    pool = iter(alphas) if alphas is not None else iter(range(1, max_alpha + 1))
    for a in pool:
        s_i = sympy.expand(a * X * U + X * v - y * U)
        if _hits_dsing(s_i, f, (gL, gF)):
            rejected.append(a)
            continue
        chosen.append((a, s_i))
        if len(chosen) == n_conics:
            break
    if len(chosen) < n_conics:
        raise CurveError("could not find enough (1,1)-curves avoiding D_sing")
    factors = [s_i for _, s_i in chosen] + ([] if d % 2 else [X])
    r = sympy.expand(fx * gL * gF)
    s = sympy.expand(sympy.Mul(*factors))

    def bideg(expr):
        P_ = sympy.Poly(expr, x, y, u, v)
        degs = {(m[0] + m[1], m[2] + m[3]) for m in P_.monoms()}
        if len(degs) != 1:
            raise CurveError("form is not bihomogeneous")
        return degs.pop()

    target = (d, d if d % 2 else d - 1)
    class_check = {"class_D": list(bideg(r)), "class_C": list(bideg(s)), "expected": list(target),
                   "equal": bideg(r) == bideg(s) == target}

    nL, nF = L.degree, F.degree
    rows = []
    for a, _ in chosen:
        rows.append({"component": f"s[{a}]", "bidegree": [1, 1],
                     "meets_verticals": d, "meets_horizontals": nL + nF})
    if d % 2 == 0:
        rows.append({"component": "x - p*y", "bidegree": [1, 0], "meets_verticals": 0,
                     "meets_horizontals": nL + nF})
    count = sum(r_["meets_verticals"] + r_["meets_horizontals"] for r_ in rows)
    a1, a2 = target
    transversality = {
        "intersections": rows,
        "total_points": count,
        "intersection_number": a1 * a2 + a2 * a1,
        "all_simple": count == 2 * a1 * a2,
        "misses_D_sing": True,
        "rejected_alphas": rejected,
        "note": "each component of C has intersection number 1 with each line of D, and "
                "distinct components of C meet only at P, which is off D",
    }

    comps = [Orbit(f"C{i}", QQ, SPLIT) for i in range(1, n_conics + 1)]
    if d % 2 == 0:
        comps.append(Orbit("V", QQ, SPLIT))
    branches = [BranchOrbit(f"{o.name}>P", QQ, o.name, "P", ((0, 0),)) for o in comps]
    labels = {o.name: QQ for o in comps}
    C = ConicalCurve(comps, [Orbit("P", QQ)], branches, galois_from_labels(labels),
                     name="C", meta={"P": [str(p), str(q)], "tangent_direction": "x - p*y = u - q*v",
                                     "alphas": [str(a) for a, _ in chosen]})
    return {
        "curve_C_model": C,
        "curve_D_model": D,
        "r": str(r),
        "s": str(s),
        "s_components": [str(c) for c in factors],
        "pencil": "lambda*r(x,y;u,v) + mu*s(x,y;u,v) = 0",
        "class_check": class_check,
        "transversality": transversality,
        "choices": {"P": [str(p), str(q)], "tangent_direction": [1, 1], "alphas": [int(a) for a, _ in chosen]},
        "smoothness_of_total_space": "not checked",
        "horizontal_degrees": list(horizontal_degrees(d)),
    }
