"""Local, adelic and rational points on conical curves, and the counterexample report."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

from .arith_core import Place, hensel_sqrt, hilbert_symbol, is_local_square, primes_up_to, quaternion_support
from .brauer import TruncationWindow, curve_brauer_quotient
from .conics import conic_point, more_conic_points, on_conic
from .curve_model import ConicalCurve, graph_invariants, tree_fixed_vertex, validate_curve
from .errors import ConicalError, CurveError, InsufficientProfile
from .fields import bad_characters, exceptional_places, _realize_character
from .forms import BinaryForm, analyze_form


def _has_degree_one(K, v) -> bool:
    return 1 in K.local_degrees(v)


def curve_local_points(C: ConicalCurve, v: Place) -> bool:
    """C(Q_v) is nonempty: a singular point defined over Q_v, or a component over Q_v whose conic has a Q_v-point."""
    if any(_has_degree_one(o.field, v) for o in C.points):
        return True
    return any(_has_degree_one(o.field, v) and o.conic.locally_soluble(v) for o in C.components)


@dataclass
class AdelicCertificate:
    status: str                         # certified | certified_failure | uncertified
    checked: dict                       # Place -> bool
    generic_ok: bool | None
    witness: Place | None = None
    bound: int | None = None
    reason: str = ""
    basis: list = field(default_factory=list)

    def to_json(self):
        return {"status": self.status,
                "checked_places": {str(v): ok for v, ok in sorted(self.checked.items())},
                "generic_certificate": {"ok": self.generic_ok, "basis": self.basis},
                "witness": None if self.witness is None else str(self.witness),
                "bound": self.bound, "reason": self.reason}


def curve_adelic_points(C: ConicalCurve, bound: int = 1000) -> AdelicCertificate:
    """Decide C(A_Q) != {} from finitely many places plus a Frobenius-character argument.

    Away from the exceptional places every quaternion label splits and every
    field is unramified, so C has a Q_p-point exactly when some orbit field
    has a split place over p.  The multiquadratic labels alone decide that for
    all Frobenius classes when no character kills all of them; profiled
    labels can only add points, so a failure of the multiquadratic part is
    inconclusive for them and falls back to enumeration up to ``bound``.
    """
    rat = [o for o in C.points if o.field.degree == 1]
    if rat:
        return AdelicCertificate("certified", {}, True, reason=f"rational singular point {rat[0].name}")
    orbits = list(C.components) + list(C.points)
    fields = [o.field for o in orbits]
    places = set(exceptional_places([K for K in fields if K.is_multiquadratic]))
    for K in fields:
        places |= set(K.ramified())
    for o in C.components:
        places |= set(quaternion_support(o.conic.a, o.conic.b)) if not o.conic.is_split else set()
    places = sorted(places)
    checked = {}
    for v in places:
        try:
            checked[v] = curve_local_points(C, v)
        except InsufficientProfile as exc:
            return AdelicCertificate("uncertified", checked, None, bound=None, reason=str(exc))
    failing = [v for v, ok in checked.items() if not ok]
    if failing:
        return AdelicCertificate("certified_failure", checked, None, witness=failing[0],
                                 reason="no local point at an exceptional place")
    mq = [K for K in fields if K.is_multiquadratic]
    if any(K.degree == 1 for K in mq):
        return AdelicCertificate("certified", checked, True, reason="a rational orbit covers every unramified prime")
    basis, bad = bad_characters(mq) if mq else ([], [()])
    if not bad:
        return AdelicCertificate("certified", checked, True, basis=list(basis))
    skip = {v.prime for v in places if not v.is_real}
    if all(K.is_multiquadratic for K in fields):
        witness = _realize_character(basis, bad[0], skip)
        if curve_local_points(C, witness):
            raise ConicalError(f"character realised at {witness} but a local point exists (defect)")
        return AdelicCertificate("certified_failure", checked, False, witness=witness, basis=list(basis),
                                 reason="a Frobenius character kills every orbit field")
    for p in primes_up_to(bound):
        if p in skip:
            continue
        v = Place(p)
        try:
            ok = curve_local_points(C, v)
        except InsufficientProfile:
            continue
        if not ok:
            return AdelicCertificate("certified_failure", checked, False, witness=v, basis=list(basis),
                                     reason="local points fail at an enumerated prime")
    return AdelicCertificate("uncertified", checked, False, bound=bound, basis=list(basis),
                             reason="profiled labels; no failure found up to the bound")


# -- rational points ------------------------------------------------------------------

@dataclass
class PointWitness:
    kind: str                  # singular_point | smooth_on_component
    orbit: str
    coordinates: tuple | None = None
    avoided: tuple = ()

    def to_json(self):
        out = {"kind": self.kind, "orbit": self.orbit}
        if self.coordinates is not None:
            out["coordinates"] = [str(c) for c in self.coordinates]
        return out


def _projective_equal(a, b) -> bool:
    a = [Fraction(c) for c in a]
    b = [Fraction(c) for c in b]
    if len(a) != len(b):
        return False
    return all(a[i] * b[j] == a[j] * b[i] for i in range(len(a)) for j in range(len(a)))


def _rational_marks(C: ConicalCurve, comp_name: str):
    """Marked rational branch points on a rational component, and whether some rational branch is unmarked."""
    marks, unmarked = [], False
    for b in C.branches:
        if b.component != comp_name or b.field.degree != 1:
            continue
        if b.marks is None or b.marks[0] is None:
            unmarked = True
        else:
            marks.append(tuple(b.marks[0]))
    return marks, unmarked


def smooth_witness(C: ConicalCurve, comp) -> PointWitness | None:
    """A rational point on a rational component, chosen away from its marked branch points."""
    marks, _ = _rational_marks(C, comp.name)
    if comp.conic.is_split:
        candidates = [(1, 0), (0, 1)] + [(k, 1) for k in range(1, len(marks) + 2)]
        for pt in candidates:
            if not any(_projective_equal(pt, m) for m in marks):
                return PointWitness("smooth_on_component", comp.name, pt, tuple(marks))
        return None
    a, b = comp.conic.a, comp.conic.b
    start = conic_point(a, b)
    if start is None:
        return None
    for pt in [start] + more_conic_points(a, b, start, len(marks) + 2):
        if on_conic(pt, a, b) and not any(_projective_equal(pt, m) for m in marks):
            return PointWitness("smooth_on_component", comp.name, tuple(pt), tuple(marks))
    return None


def curve_rational_points(C: ConicalCurve) -> dict:
    for o in C.points:
        if o.field.degree == 1:
            return {"exists": True, "witness": PointWitness("singular_point", o.name)}
    for o in C.components:
        if o.field.degree == 1:
            w = smooth_witness(C, o)
            if w is not None:
                return {"exists": True, "witness": w}
    return {"exists": False, "witness": None}


def verify_witness(C: ConicalCurve, w: PointWitness) -> bool:
    o = C.orbit.get(w.orbit)
    if o is None or o.field.degree != 1:
        return False
    if w.kind == "singular_point":
        return o in C.points
    if w.kind != "smooth_on_component" or o not in C.components:
        return False
    if o.conic.is_split:
        ok = len(w.coordinates) == 2 and any(Fraction(c) != 0 for c in w.coordinates)
    else:
        ok = on_conic(w.coordinates, o.conic.a, o.conic.b)
    marks, _ = _rational_marks(C, o.name)
    return ok and not any(_projective_equal(w.coordinates, m) for m in marks)


def verify_tree_hasse(C: ConicalCurve, cert: AdelicCertificate | None = None) -> dict:
    """Rational point on an adelically soluble tree curve, from the vertex the Galois group fixes."""
    if not graph_invariants(C)["is_tree"]:
        raise CurveError("verify_tree_hasse needs a tree")
    cert = cert or curve_adelic_points(C)
    if cert.status != "certified":
        raise CurveError(f"adelic points not certified ({cert.status})")
    vertex = tree_fixed_vertex(C)
    orbit_name = vertex.rsplit(".", 1)[0]
    o = C.orbit[orbit_name]
    if o in C.points:
        w = PointWitness("singular_point", o.name)
    else:
        if not o.conic.is_split:
            bad = [v for v in quaternion_support(o.conic.a, o.conic.b)
                   if hilbert_symbol(o.conic.a, o.conic.b, v) == -1]
            if bad:
                raise CurveError(f"defect: fixed component {o.name} has no local point at {bad[0]}")
        marks, unmarked = _rational_marks(C, o.name)
        w = smooth_witness(C, o)
        if w is None:
            raise CurveError(f"defect: no rational point found on {o.name}")
        if unmarked:
            # a rational branch on o maps to a rational singular point; report that exact point instead
            b = next(b for b in C.branches if b.component == o.name and b.field.degree == 1
                     and (b.marks is None or b.marks[0] is None))
            w = PointWitness("singular_point", b.point)
    if not verify_witness(C, w):
        raise CurveError("defect: witness failed verification")
    return {"hasse_holds": True, "fixed_vertex": vertex, "witness": w}


# -- report -------------------------------------------------------------------------------

TRUNCATION_CAVEAT = ("trivial only within the truncation window: n-torsion classes supported on S; "
                     "the full Brauer group is not certified")


def counterexample_report(C: ConicalCurve, w: TruncationWindow) -> dict:
    rep = validate_curve(C)
    if not rep.valid:
        raise CurveError(f"invalid curve: {rep.errors[0]}")
    adelic = curve_adelic_points(C)
    rational = curve_rational_points(C)
    quotient = curve_brauer_quotient(C, w)
    if rational["exists"]:
        cls = "has_rational_points"
    elif adelic.status == "certified_failure":
        cls = "locally_obstructed"
    elif quotient.dimension > 0:
        cls = "BM_obstructed_candidate"
    elif adelic.status == "certified":
        cls = "counterexample_with_trivial_truncated_Brauer"
    else:
        cls = "undecided"
    out = {"classification": cls,
           "adelic": adelic.to_json(),
           "rational": {"exists": rational["exists"],
                        "witness": None if rational["witness"] is None else rational["witness"].to_json()},
           "brauer": quotient.to_json(),
           "quotient_dimension": quotient.dimension}
    if cls == "counterexample_with_trivial_truncated_Brauer":
        out["caveat"] = TRUNCATION_CAVEAT
    if cls == "BM_obstructed_candidate":
        out["witness_class"] = quotient.to_json()["representatives"][0]
        out["caveat"] = ("the truncated Brauer group is nontrivial modulo constants; whether it "
                         "obstructs the adelic points is not evaluated")
    return out


# -- adelic points on C^f -----------------------------------------------------------------------

def sample_adelic_point(f: BinaryForm, S, precision: int = 10, z: int = 0) -> dict:
    """Local points (r : 1 : z) of C^f, r a root of f(x, 1) in Q_v, one per place of S.

    Different z give different points, none equal to the singular point (0:0:1).
    p-adic roots are returned modulo p^precision; real roots as a decimal
    truncated to ``precision`` digits.
    """
    rep = analyze_form(f)
    if not rep.locally_soluble_everywhere:
        raise ConicalError("f has no adelic points")
    out = {}
    for v in sorted(Place.parse(s) for s in S):
        out[str(v)] = _local_point(f, v, precision, z)
    return out


def _local_point(f: BinaryForm, v: Place, k: int, z: int) -> dict:
    for p_, q_ in f.linear:
        coords = (p_, q_, z)
        return {"place": str(v), "modulus": "exact", "point": [str(c) for c in coords],
                "xy_ratio": "infinity" if q_ == 0 else str(Fraction(p_, q_)), "factor": f"linear({p_}:{q_})"}
    for d in f.quadratic:
        if not is_local_square(d, v):
            continue
        if v.is_real:
            scale = 10 ** k
            r = isqrt(d * scale * scale)
            s = str(r)
            txt = s[:-k] + "." + s[-k:] if k else s
            return {"place": "real", "modulus": f"10^-{k}", "xy_ratio": txt, "z": str(z),
                    "factor": f"x^2 - {d}*y^2"}
        p = v.prime
        r = hensel_sqrt(d % p ** (k + 3), p, k)
        if r is None or (r * r - d) % p ** k:
            raise ConicalError(f"defect: Hensel lift of sqrt({d}) failed at {p}")
        return {"place": str(p), "modulus": f"{p}^{k}", "xy_ratio": str(r), "z": str(z),
                "factor": f"x^2 - {d}*y^2"}
    raise ConicalError(f"no local root at {v}")
