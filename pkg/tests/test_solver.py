from __future__ import annotations

import json

import pytest
from conftest import chain, d1_with, load, relabel

from renet.errors import BudgetExhausted, InputError
from renet.net import Net, Node
from renet.realize import AlgebraSpec
from renet.rewrite import Transducer, pipeline
from renet.rules import Rns, rule
from renet.solver import (
    Conjunction,
    DeltaSignature,
    Limits,
    MemoryBank,
    NormalFormMembership,
    PatternContainment,
    Problem,
    RealizationCheck,
    associated_member,
    check_solution,
    load_bank,
    models,
    recognize,
    recognizer_from_json,
    save_bank,
    solve,
    transducer_from_json,
    transducer_to_json,
)

HAS_Z = PatternContainment(Net({"v": Node("z", 1, 1)}))


def _rz():
    return load("rz.netf").rules["RZ"]


def _wz():
    return relabel("w", "z", 1, 1, "wz")


# -- recognizers --------------------------------------------------------------


def test_pattern_containment(d1):
    h = PatternContainment(Net({"v": Node("h", 2, 1)}))
    assert not recognize(h, [d1]) and recognize(h, [d1_with("h")])
    assert not recognize(h, [])
    some = PatternContainment(Net({"v": Node("h", 2, 1)}), every=False)
    assert recognize(some, [d1, d1_with("h")]) and not recognize(h, [d1, d1_with("h")])


def test_delta_signature(d1, d2):
    assert recognize(DeltaSignature(2, 1, 1), [d1])
    assert not recognize(DeltaSignature(2, 1, 1), [d2])


def test_normal_form_membership(r1, d1):
    rec = NormalFormMembership(Rns("R", (r1,)), frozenset({"h"}), frozenset({"f"}))
    assert recognize(rec, [d1])
    assert not recognize(rec, [d1_with("k")])
    assert not recognize(NormalFormMembership(Rns("R", (r1,)), frozenset({"k"})), [d1])


def test_realization_and_conjunction(d1):
    alg = AlgebraSpec.from_functions([0, 1], {"not": (1, lambda a: 1 - a)})
    net = Net({"g": Node("not", 1, 1)})
    rec = RealizationCheck(alg, (("g.in0", 1),), ((("g", "out", 0), (0,)),))
    assert recognize(rec, [net])
    both = Conjunction((rec, DeltaSignature(2, 1, 1)))
    assert recognize(both, [net])
    assert not recognize(Conjunction((rec, DeltaSignature(0, 0, 0))), [net])


@pytest.mark.parametrize("rec", [
    HAS_Z,
    DeltaSignature(2, 1, 1),
    Conjunction((HAS_Z, DeltaSignature(2, 1, 1))),
])
def test_recognizer_json_roundtrip(rec):
    assert recognizer_from_json(json.loads(json.dumps(rec.to_json()))) == rec


def test_recognizer_json_errors():
    with pytest.raises(InputError):
        recognizer_from_json({"kind": "bogus"})
    with pytest.raises(InputError):
        recognizer_from_json({"kind": "delta-signature"})


# -- models and associated members --------------------------------------------


def test_models(r1, d1):
    assert models(r1, [d1], [d1_with("h")], 4)
    assert not models(r1, [d1], [d1_with("k")], 4)
    assert models(r1, [d1], [], 4)


def test_models_unknown(d2):
    tags = {"i": ("x", "in", 0), "o": ("x", "out", 0)}
    grow = rule("grow", Net({"x": Node("p", 1, 1)}, (), tags),
                Net({"x": Node("p", 1, 1), "y": Node("p", 1, 1)}, [("x", 0, "y", 0)],
                    {"i": ("x", "in", 0), "o": ("y", "out", 0)}))
    with pytest.raises(BudgetExhausted):
        models(grow, [d2], [d1_with("k")], 2)


def test_associated_member(d1, d2, c1):
    assert associated_member([d1, c1], "total", [(1, 2)])
    assert not associated_member([d1, d2], "split", [(1, 2)])
    assert associated_member([d1, d2], "split", [])
    with pytest.raises(InputError):
        associated_member([d1], "split", [(1, 3)])


# -- solutions ----------------------------------------------------------------


def test_trivial_presolution(d1):
    p = Problem([d1], DeltaSignature(2, 1, 1))
    res = check_solution(Transducer(()), p)
    assert res.presolution and res.solution and res.product == {d1}


def test_r1_solution(r1, d1):
    p = Problem([d1], PatternContainment(Net({"v": Node("h", 2, 1)})))
    res = check_solution(r1, p)
    assert res.solution and res.product == {d1_with("h")}
    tight = Problem([d1], p.recognizer, Limits(max_td_stages=0))
    res = check_solution(r1, tight)
    assert res.presolution and not res.solution


def test_limits_reject_negative():
    with pytest.raises(InputError):
        Limits(max_td_stages=-1)


def test_solve_trivial(c1):
    rep = solve(Problem([Net({"z": Node("z", 1, 1)})], HAS_Z), MemoryBank())
    assert rep.solved and rep.method == "trivial"


def test_solve_direct(c1):
    bank = MemoryBank()
    bank.add(c1, _wz(), HAS_Z)
    rep = solve(Problem([c1], HAS_Z), bank)
    assert rep.solved and rep.method == "direct"


def test_solve_transfer(c1):
    bank = MemoryBank()
    bank.add(c1, _wz(), HAS_Z)
    rep = solve(Problem([chain("u", "v")], HAS_Z), bank)
    assert rep.solved and rep.method == "transfer" and rep.witness is not None
    assert all("z" in n.letters() for n in rep.product)
    assert check_solution(rep.solution, Problem([chain("u", "v")], HAS_Z)).solution
    assert [t["result"] for t in rep.trace][-1] == "solved"


def test_solve_fixture_pair():
    doc = load("sa.netf").nets["SA"], load("sb.netf").nets["SB"]
    bank = MemoryBank()
    bank.add(doc[0], _rz(), HAS_Z)
    runs = [json.dumps(solve(Problem([doc[1]], HAS_Z), bank).to_json(), sort_keys=True) for _ in range(3)]
    assert len(set(runs)) == 1 and json.loads(runs[0])["method"] == "transfer"


def test_solve_empty_memory(d1):
    rep = solve(Problem([d1], HAS_Z), MemoryBank())
    assert rep.status == "no-solution-within-budget" and rep.solution is None


def test_auto_insert(c1):
    bank = MemoryBank()
    bank.add(c1, _wz(), HAS_Z)
    solve(Problem([chain("u", "v")], HAS_Z), bank, auto_insert=True)
    assert len(bank) == 2 and bank.entries[1].subject == chain("u", "v")


# -- memory persistence -------------------------------------------------------


def test_transducer_json_roundtrip(r1):
    td = pipeline(Rns("R", (r1,)), _wz(), budget=3)
    back = transducer_from_json(json.loads(json.dumps(transducer_to_json(td))))
    assert transducer_to_json(back) == transducer_to_json(td)


def _bank(c1, d1, r1) -> MemoryBank:
    bank = MemoryBank()
    bank.add(c1, _wz(), HAS_Z)
    bank.add(d1, r1, PatternContainment(Net({"v": Node("h", 2, 1)})))
    bank.add(load("sa.netf").nets["SA"], _rz(), HAS_Z, origin="fixture")
    return bank


def test_bank_roundtrip(tmp_path, c1, d1, r1):
    bank = _bank(c1, d1, r1)
    save_bank(bank, tmp_path / "mem")
    back = load_bank(tmp_path / "mem")
    assert not back.quarantined and len(back) == 3
    for a, b in zip(bank.entries, back.entries):
        assert a.subject == b.subject and a.recognizer == b.recognizer and a.metadata == b.metadata
        assert transducer_to_json(a.solution) == transducer_to_json(b.solution)


def test_bank_quarantines_tampered_entry(tmp_path, c1, d1, r1):
    root = save_bank(_bank(c1, d1, r1), tmp_path / "mem")
    doc = json.loads((root / "entry-001" / "transducer.json").read_text())
    doc["stages"] = []
    (root / "entry-001" / "transducer.json").write_text(json.dumps(doc))
    back = load_bank(root)
    assert len(back) == 2 and [q[0] for q in back.quarantined] == ["entry-001"]


def test_empty_bank(tmp_path):
    root = save_bank(MemoryBank(), tmp_path / "mem")
    assert json.loads((root / "manifest.json").read_text())["entries"] == []
    assert len(load_bank(root)) == 0
    with pytest.raises(InputError):
        load_bank(tmp_path / "missing")
