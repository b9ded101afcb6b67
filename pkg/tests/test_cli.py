from __future__ import annotations

import json

import pytest
from conftest import FIXTURES

from renet.cli import INPUT, NEGATIVE, OK, UNKNOWN, run, validate_output
from renet.netf import parse, print_document

ROOT = FIXTURES.parent


@pytest.fixture(autouse=True)
def _in_repo(monkeypatch):
    monkeypatch.chdir(ROOT)
    monkeypatch.delenv("RENET_WORKSPACE", raising=False)


def fx(name: str) -> str:
    return f"fixtures/{name}"


GROW = """rule G {
  preform {
    left { node x p in=1 out=1 tag i x:in:0 tag o x:out:0 }
    right {
      node x p in=1 out=1
      node y p in=1 out=1
      edge x:out:0 -- y:in:0
      tag i x:in:0
      tag o y:out:0
    }
  }
}
"""


def test_net_delta():
    code, out, _ = run(["net", "delta", fx("d1.netf")])
    assert code == OK and out.strip() == "2 (in=1,out=1)"


def test_net_eq():
    assert run(["net", "eq", fx("d1.netf"), fx("d1.netf")])[0] == OK
    assert run(["net", "eq", fx("d1.netf"), fx("d2.netf")])[0] == NEGATIVE


def test_net_print_is_canonical():
    code, out, _ = run(["net", "print", fx("d1.netf")])
    assert code == OK and out == print_document(parse((FIXTURES / "d1.netf").read_text()))


def test_rw_apply_and_matches():
    code, out, _ = run(["rw", "apply", "--rns", fx("r1.netf"), "--input", fx("d1.netf")])
    assert code == OK and " h in=2 out=1" in out and " f " not in out
    assert run(["rw", "matches", "--rns", fx("r1.netf"), "--input", fx("d2.netf")])[0] == NEGATIVE


def test_normalize_unknown(tmp_path):
    (tmp_path / "g.netf").write_text(GROW)
    code, _, err = run(["rw", "normalize", "--rns", str(tmp_path / "g.netf"), "--input", fx("d2.netf"),
                        "--budget", "3"])
    assert code == UNKNOWN and err.startswith("unknown")


@pytest.mark.parametrize("argv", [
    ["net", "parse", fx("broken.netf")],
    ["net", "delta", fx("missing.netf")],
    ["net", "frobnicate", fx("d1.netf")],
    ["rw", "apply", "--input", fx("d1.netf")],
    ["rw", "derive", "--rns", fx("r1.netf"), "--input", fx("d1.netf"), "--budget", "-1"],
])
def test_input_errors(argv):
    code, _, err = run(argv)
    assert code == INPUT and err.startswith("error:")


def test_parse_error_location():
    _, _, err = run(["net", "parse", fx("broken.netf")])
    assert err.split(":")[1].strip().isdigit() and err.split(":")[2].isdigit()


@pytest.mark.parametrize("argv", [
    ["net", "delta", fx("d1.netf")],
    ["net", "eq", fx("d1.netf"), fx("d2.netf")],
    ["net", "parse", fx("broken.netf")],
    ["rw", "apply", "--rns", fx("r1.netf"), "--input", fx("d1.netf")],
    ["rw", "matches", "--rns", fx("r1.netf"), "--input", fx("d1.netf")],
    ["rw", "derive", "--rns", fx("r1.netf"), "--input", fx("d1.netf")],
    ["prns", "synth", "--input", fx("d1.netf"), "--blocks", "n1|n2"],
    ["prns", "roundtrip", "--input", fx("d1.netf"), "--blocks", "n1,n2"],
    ["abs", "sisters", fx("d1.netf"), fx("c1.netf")],
    ["abs", "origin", fx("sa.netf"), fx("sb.netf")],
    ["parallel", "verify", "--rns", fx("rz.netf"), fx("sa.netf"), fx("sb.netf")],
    ["realize", "closure", "--input", fx("c1.netf"), "--alphabet", "f:2:1,a:0:1", "--budget", "1"],
    ["macro", "build", "--rns", fx("r1.netf"), "--input", fx("d1.netf"), "--blocks", "n1,n2"],
])
def test_json_envelopes_validate(argv):
    code, out, _ = run(argv + ["--json"])
    doc = json.loads(out)
    validate_output(doc)
    assert doc["command"] == " ".join(argv[:2])
    assert doc["status"] == {OK: "ok", NEGATIVE: "negative", UNKNOWN: "unknown", INPUT: "error"}[code]


def test_realize_eval(tmp_path):
    (tmp_path / "in.json").write_text(json.dumps({"g0.in0": 1, "g0.in1": 1, "g1.in0": 1}))
    code, out, _ = run(["realize", "eval", "--input", fx("gates.netf"), "--algebra", fx("bool.json"),
                        "--inputs", str(tmp_path / "in.json"), "--json"])
    assert code == OK
    doc = json.loads(out)
    validate_output(doc)
    assert doc["result"]["outputs"] == {"g2.out0": [1]}
    inline = run(["realize", "eval", "--input", fx("gates.netf"), "--algebra", fx("bool.json"),
                  "--inputs", (tmp_path / "in.json").read_text(), "--json"])
    assert inline[1] == out


def test_memory_add_list_and_solve(tmp_path):
    mem = str(tmp_path / "mem")
    code, _, _ = run(["solve", "memory", "add", "--memory", mem, "--subject", fx("sa.netf"),
                      "--rns", fx("rz.netf"), "--recognizer", fx("has_z.json")])
    assert code == OK
    code, out, _ = run(["solve", "memory", "list", "--memory", mem, "--json"])
    assert code == OK and len(json.loads(out)["result"]["entries"]) == 1
    runs = [run(["solve", "run", "--problem", fx("problem.json"), "--memory", mem, "--json"]) for _ in range(2)]
    assert runs[0] == runs[1] and runs[0][0] == OK
    doc = json.loads(runs[0][1])
    validate_output(doc)
    assert doc["result"]["method"] == "transfer"


def test_memory_add_rejects_non_solution(tmp_path):
    code, _, _ = run(["solve", "memory", "add", "--memory", str(tmp_path / "m"), "--subject", fx("d1.netf"),
                      "--rns", fx("r1.netf"), "--recognizer", fx("has_z.json")])
    assert code == NEGATIVE


def test_solve_without_memory(tmp_path):
    code, out, _ = run(["solve", "run", "--problem", fx("problem.json"), "--memory", str(tmp_path / "none")])
    assert code == NEGATIVE and out.startswith("no-solution-within-budget")


def test_help_exits_zero():
    assert run(["--help"])[0] == OK
