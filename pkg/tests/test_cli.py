import json
from pathlib import Path

import pytest

from conical.cli import canonical_json, main

FIXTURES = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def write(tmp_path, obj, name="in.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def test_check_form_sextic(capsys, tmp_path):
    code, out = run(capsys, "check-form", "-i", write(tmp_path, {"quadratic": [2, 17, 34]}))
    data = json.loads(out)
    assert code == 1 and data["verdict"] == "counterexample" and data["degree"] == 6


def test_check_form_soluble(capsys, tmp_path):
    code, out = run(capsys, "check-form", "-i", write(tmp_path, {"linear": [[1, 3]], "quadratic": [2]}))
    assert code == 0 and json.loads(out)["verdict"] == "soluble"


def test_construct_form(capsys):
    code, out = run(capsys, "construct-form", "--a", "2", "--b", "5")
    data = json.loads(out)
    assert code == 0 and data["degree"] == 8 and data["verdict"] == "counterexample"


def test_build_then_graph(capsys, tmp_path):
    code, out = run(capsys, "build-curve", "Cf")
    assert code == 0
    path = write(tmp_path, out)
    code, graph = run(capsys, "curve-graph", "-i", path)
    data = json.loads(graph)
    assert code == 0 and data["is_tree"] and data["h1_rank"] == 0
    code, dot = run(capsys, "curve-graph", "-i", path, "--out", "dot")
    assert code == 0 and dot.lstrip().startswith(("graph", "digraph"))


def test_build_curve_roundtrip_is_byte_stable(capsys, tmp_path):
    for kind in ("Cf", "D", "two-lines"):
        _, first = run(capsys, "build-curve", kind)
        code, again = run(capsys, "curve-validate", "-i", write(tmp_path, first))
        assert code == 0 and json.loads(again)["valid"]
        # reparse and re-emit through canonical JSON
        assert canonical_json(json.loads(first)) == first


def test_curve_brauer_exit_codes(capsys, tmp_path):
    _, lines = run(capsys, "build-curve", "two-lines", "--d", "-1")
    path = write(tmp_path, lines)
    # primes up to 5 include 3, inert in Q(i), so two classes survive
    code, out = run(capsys, "curve-brauer", "-i", path, "--n", "2", "--smax", "5")
    assert code == 1 and json.loads(out)["quotient_dimension"] == 2
    code, out2 = run(capsys, "curve-brauer", "-i", path, "--n", "2", "--smax", "5", "--method", "bipartite")
    assert code == 1 and json.loads(out2)["quotient_dimension"] == 2
    _, cf = run(capsys, "build-curve", "Cf")
    code, out = run(capsys, "curve-brauer", "-i", write(tmp_path, cf, "cf.json"), "--smax", "20")
    assert code == 0 and json.loads(out)["quotient_dimension"] == 0


def test_curve_hasse(capsys, tmp_path):
    _, cf = run(capsys, "build-curve", "Cf")
    code, out = run(capsys, "curve-hasse", "-i", write(tmp_path, cf), "--smax", "20")
    assert code == 0 and json.loads(out)["classification"] == "has_rational_points"


def test_invalid_model_exit_1(capsys, tmp_path):
    _, lines = run(capsys, "build-curve", "two-lines")
    obj = json.loads(lines)
    obj["branches"] = obj["branches"][:1]
    path = write(tmp_path, obj)
    assert run(capsys, "curve-validate", "-i", path)[0] == 1
    assert run(capsys, "curve-graph", "-i", path)[0] == 1


@pytest.mark.parametrize("argv", [
    ["check-form"], ["curve-validate"], ["curve-brauer"], ["curve-hasse"],
])
def test_bad_json_is_error(capsys, tmp_path, argv):
    code, out = run(capsys, *argv, "-i", write(tmp_path, "{not json"))
    assert code == 2 and "error" in json.loads(out)


def test_missing_file_and_bad_fields(capsys, tmp_path):
    code, out = run(capsys, "check-form", "-i", str(tmp_path / "absent.json"))
    assert code == 2 and json.loads(out)["error"]["type"] == "FileNotFoundError"
    code, out = run(capsys, "check-form", "-i", write(tmp_path, {"quadratic": [4]}))
    assert code == 2 and "error" in json.loads(out)


def test_usage_error(capsys):
    code, out = run(capsys, "no-such-command")
    assert code == 2 and json.loads(out)["error"]["type"] == "usage"
    code, out = run(capsys, "paper-demo", "nope")
    assert code == 2


@pytest.mark.parametrize("which,expected", [("e1", 1), ("Cf", 0), ("D", 1)])
def test_demos_match_fixtures(capsys, which, expected):
    code, out = run(capsys, "paper-demo", which)
    assert code == expected
    assert out == (FIXTURES / f"demo_{which}.json").read_text()


def test_canonical_json_big_integers():
    text = canonical_json({"b": 2 ** 80, "a": [1, 2]})
    assert text.endswith("\n") and text.index('"a"') < text.index('"b"')
    assert json.loads(text)["b"] == str(2 ** 80)
