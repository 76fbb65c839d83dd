"""Command-line front end.  Every command prints canonical JSON.

Exit codes: 0 computed with a favourable verdict, 1 computed with an
unfavourable one (counterexample, obstruction, invalid model), 2 error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .arith_core import Place
from .brauer import curve_brauer_quotient, f2_oracle_dimension, required_places, window_for
from .curve_model import (
    build_Cf,
    build_D,
    build_two_lines,
    curve_from_json,
    curve_to_dot,
    curve_to_json,
    graph_invariants,
    homology_action,
    validate_curve,
)
from .errors import ConicalError
from .fields import Quadratic, field_from_json, cubic_x3_x_1
from .forms import SEXTIC_2_17_34, BinaryForm, analyze_form, construct_form
from .hasse import counterexample_report, curve_adelic_points, sample_adelic_point, verify_tree_hasse
from .pencil import build_pencil

WINDOW_N_ENV = "CONICAL_WINDOW_N"
PLACES_MAX_ENV = "CONICAL_PLACES_MAX"
BIG = 2 ** 53


def _canon(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return str(obj) if abs(obj) >= BIG else obj
    if isinstance(obj, float):
        return repr(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if hasattr(obj, "to_json"):
        return _canon(obj.to_json())
    if hasattr(obj, "tolist"):
        return _canon(obj.tolist())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def canonical_json(obj) -> str:
    return json.dumps(_canon(obj), sort_keys=True, indent=2, ensure_ascii=True) + "\n"


class DemoFailure(ConicalError):
    pass


def _read_input(args):
    src = getattr(args, "input", None)
    if src in (None, "-"):
        text = sys.stdin.read()
    else:
        with open(src) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConicalError(f"input is not valid JSON: {exc}") from exc


def _window(args, C):
    n = args.window_n if args.window_n is not None else int(os.environ.get(WINDOW_N_ENV, 2))
    smax = args.places_max if args.places_max is not None else int(os.environ.get(PLACES_MAX_ENV, 50))
    return window_for(C, n, smax)


# -- commands ----------------------------------------------------------------------------

def cmd_check_form(args):
    f = BinaryForm.from_json(_read_input(args))
    rep = analyze_form(f)
    out = rep.to_json() | {"form": f.to_json(), "expanded": f.expanded(), "degree": f.degree}
    return (0 if rep.verdict == "soluble" else 1), out


def cmd_construct_form(args):
    if args.a is not None and args.b is not None:
        a, b = args.a, args.b
    else:
        obj = _read_input(args)
        a, b = int(obj["a"]), int(obj["b"])
    f = construct_form(a, b, bound=args.bound)
    rep = analyze_form(f)
    return 0, {"a": a, "b": b, "c": f.quadratic[-1], "form": f.to_json(), "expanded": f.expanded(),
               "degree": f.degree, "verdict": rep.verdict}


def cmd_curve_validate(args):
    C = curve_from_json(_read_input(args))
    rep = validate_curve(C)
    return (0 if rep.valid else 1), rep.to_json()


def cmd_curve_graph(args):
    C = curve_from_json(_read_input(args))
    rep = validate_curve(C)
    if not rep.valid:
        return 1, {"validation": rep.to_json()}
    if args.out == "dot":
        return 0, curve_to_dot(C)
    inv = graph_invariants(C)
    return 0, inv | {"homology": homology_action(C).to_json()}


def cmd_curve_brauer(args):
    C = curve_from_json(_read_input(args))
    q = curve_brauer_quotient(C, _window(args, C), method=args.method)
    return (0 if q.dimension == 0 else 1), q.to_json()


def cmd_curve_hasse(args):
    C = curve_from_json(_read_input(args))
    rep = counterexample_report(C, _window(args, C))
    return (0 if rep["classification"] == "has_rational_points" else 1), rep


def cmd_build_curve(args):
    kind = args.kind
    if kind == "Cf":
        f = BinaryForm.from_json(_read_input(args)) if args.input else SEXTIC_2_17_34
        C = build_Cf(f)
    elif kind == "D":
        if args.input:
            obj = _read_input(args)
            f = BinaryForm.from_json(obj["form"])
            C = build_D(f, field_from_json(obj["L"]), field_from_json(obj["F"]))
        else:
            C = build_D(SEXTIC_2_17_34, Quadratic(5), cubic_x3_x_1())
    elif kind == "two-lines":
        C = build_two_lines(args.d)
    else:
        raise ConicalError(f"unknown curve kind {kind!r}")
    if args.out == "dot":
        return 0, curve_to_dot(C)
    return 0, curve_to_json(C)


def _check(cond, what):
    if not cond:
        raise DemoFailure(f"self-check failed: {what}")


def demo_e1(args):
    rep = analyze_form(SEXTIC_2_17_34)
    cert = rep.certificate
    _check(rep.verdict == "counterexample", "sextic verdict is counterexample")
    _check(set(str(v) for v in cert.direct) == {"real", "2", "17"} and all(cert.direct.values()),
           "direct checks at real, 2, 17 pass")
    _check(cert.generic_ok, "no Frobenius character kills all factors")
    return 1, {"demo": "e1", "form": SEXTIC_2_17_34.to_json(), "expanded": SEXTIC_2_17_34.expanded(),
               "analysis": rep.to_json(), "expected": "counterexample", "self_check": "passed"}


def demo_Cf(args):
    C = build_Cf(SEXTIC_2_17_34)
    val = validate_curve(C)
    inv = graph_invariants(C)
    cert = curve_adelic_points(C)
    hasse = verify_tree_hasse(C, cert)
    places = [Place.parse(p) for p in args.places.split(",")] if args.places else \
        [Place.parse(p) for p in ("real", 2, 17)]
    pts = sample_adelic_point(SEXTIC_2_17_34, places, args.precision)
    moved = sample_adelic_point(SEXTIC_2_17_34, places, args.precision, z=1)
    q = curve_brauer_quotient(C, _window(args, C))
    _check(val.valid, "C^f validates")
    _check(inv["is_tree"] and inv["h1_rank"] == 0, "C^f is a tree")
    _check(hasse["witness"].kind == "singular_point" and hasse["witness"].orbit == "P", "witness is P")
    _check(q.dimension == 0, "Br(Q) -> Br(C^f) is onto in the window")
    _check(pts != moved, "different lines give different adelic points")
    return 0, {"demo": "Cf", "curve": curve_to_json(C), "graph": inv, "adelic": cert.to_json(),
               "tree_hasse": {"hasse_holds": hasse["hasse_holds"], "fixed_vertex": hasse["fixed_vertex"],
                              "witness": hasse["witness"].to_json()},
               "adelic_sample": {"z=0": pts, "z=1": moved},
               "brauer": q.to_json(), "expected": "has_rational_points", "self_check": "passed"}


def demo_D(args):
    D = build_D(SEXTIC_2_17_34, Quadratic(5), cubic_x3_x_1())
    w = _window(args, D)
    val = validate_curve(D)
    inv = graph_invariants(D)
    rep = counterexample_report(D, w)
    _check(val.valid, "D validates")
    _check(inv["h1_rank"] == 20 and not inv["is_tree"], "h1(X(D)) = 20")
    _check(rep["classification"] == "counterexample_with_trivial_truncated_Brauer", "classification")
    elim = curve_brauer_quotient(D, w, method="bipartite")
    _check(elim.dimension == rep["quotient_dimension"], "bipartite elimination agrees")
    oracle = None
    if w.n == 2:
        from .brauer import general_system
        oracle = f2_oracle_dimension(general_system(D, w))
        _check(oracle == rep["quotient_dimension"], "F2 oracle agrees")
    pencil = build_pencil(SEXTIC_2_17_34, Quadratic(5), cubic_x3_x_1())
    _check(pencil["class_check"]["equal"], "C and D have the same class")
    return 1, {"demo": "D", "classification": rep["classification"],
               "quotient_dimension": rep["quotient_dimension"], "report": rep, "graph": inv,
               "bipartite_quotient_dimension": elim.dimension, "f2_oracle_dimension": oracle,
               "required_places": [v.to_json() for v in sorted(required_places(D))],
               "pencil": {k: pencil[k] for k in ("r", "s", "pencil", "class_check", "transversality",
                                                 "choices", "smoothness_of_total_space")},
               "expected": "counterexample_with_trivial_truncated_Brauer", "self_check": "passed"}


DEMOS = {"e1": demo_e1, "Cf": demo_Cf, "D": demo_D}


def cmd_paper_demo(args):
    return DEMOS[args.which](args)


def cmd_pencil(args):
    if args.input:
        obj = _read_input(args)
        f, L, F = BinaryForm.from_json(obj["form"]), field_from_json(obj["L"]), field_from_json(obj["F"])
    else:
        f, L, F = SEXTIC_2_17_34, Quadratic(5), cubic_x3_x_1()
    out = build_pencil(f, L, F)
    out["curve_C_model"] = curve_to_json(out["curve_C_model"])
    out["curve_D_model"] = curve_to_json(out["curve_D_model"])
    return (0 if out["class_check"]["equal"] else 1), out


# -- parser ------------------------------------------------------------------------------

def _window_flags(p):
    p.add_argument("--window-n", "--n", dest="window_n", type=int, default=None,
                   help=f"torsion bound n (default ${WINDOW_N_ENV} or 2)")
    p.add_argument("--places-max", "--smax", dest="places_max", type=int, default=None,
                   help=f"include all primes up to this bound (default ${PLACES_MAX_ENV} or 50)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conical", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, input_=True):
        p = sub.add_parser(name, help=help_)
        if input_:
            p.add_argument("--input", "-i", default=None, help="JSON file (default: standard input)")
        p.set_defaults(fn=fn)
        return p

    add("check-form", cmd_check_form, "local-global analysis of a binary form")
    p = add("construct-form", cmd_construct_form, "degree-8 form violating the Hasse principle")
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--bound", type=int, default=10 ** 6)
    add("curve-validate", cmd_curve_validate, "check the invariants of a curve model")
    p = add("curve-graph", cmd_curve_graph, "incidence graph invariants and homology action")
    p.add_argument("--out", choices=("json", "dot"), default="json")
    p = add("curve-brauer", cmd_curve_brauer, "truncated Br(C) modulo constants")
    _window_flags(p)
    p.add_argument("--method", choices=("general", "bipartite"), default="general")
    p = add("curve-hasse", cmd_curve_hasse, "adelic, rational and Brauer report")
    _window_flags(p)
    p = add("build-curve", cmd_build_curve, "emit a curve model as JSON")
    p.add_argument("kind", choices=("Cf", "D", "two-lines"))
    p.add_argument("--d", type=int, default=-1, help="square class for two-lines")
    p.add_argument("--out", choices=("json", "dot"), default="json")
    add("pencil", cmd_pencil, "equations of the partner curve C and the pencil")
    p = add("paper-demo", cmd_paper_demo, "reproduce a worked example with self-checks", input_=False)
    p.add_argument("which", choices=sorted(DEMOS))
    _window_flags(p)
    p.add_argument("--precision", type=int, default=5)
    p.add_argument("--places", default=None, help="comma-separated places for adelic sampling")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        sys.stdout.write(canonical_json({"error": {"type": "usage", "message": "invalid arguments"}}))
        return 2
    try:
        code, out = args.fn(args)
    except (ConicalError, KeyError, TypeError, ValueError, OSError) as exc:
        sys.stdout.write(canonical_json({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        return 2
    sys.stdout.write(out if isinstance(out, str) else canonical_json(out))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
