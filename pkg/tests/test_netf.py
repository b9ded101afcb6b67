from __future__ import annotations

import random

import pytest
from conftest import FIXTURES, load
from hypothesis import given, settings
from hypothesis import strategies as st

from renet.errors import ParseError
from renet.generate import random_net, random_rns, random_tagged
from renet.net import Net, Node, var_node
from renet.netf import canonical_roundtrip, parse, parse_net, print_document, print_net, print_rns, to_dot
from renet.rules import ApplyOrder, FreshLetters, Rns, rns_equal

GOOD = sorted(p.name for p in FIXTURES.glob("*.netf") if p.name != "broken.netf")


@pytest.mark.parametrize("name", GOOD)
def test_fixtures_are_canonical(name):
    text = (FIXTURES / name).read_text()
    assert canonical_roundtrip(text)
    once = print_document(parse(text))
    assert print_document(parse(once)) == once


def test_reordered_lines_print_identically():
    a = "net N {\n  node b f in=2 out=1\n  node a a in=0 out=1\n  edge a:out:0 -- b:in:0\n  tag t b:in:1\n}\n"
    b = "# shuffled\nnet N {\n  tag t b:in:1\n  edge a:out:0 -- b:in:0\n  node a a in=0 out=1\n  node b f in=2 out=1\n}\n"
    assert print_document(parse(a)) == print_document(parse(b))


def test_broken_fixture_reports_location():
    with pytest.raises(ParseError) as err:
        load("broken.netf")
    assert err.value.line >= 3 and err.value.column > 0
    assert str(err.value).startswith(f"{err.value.line}:{err.value.column}:")


@pytest.mark.parametrize("text", [
    "net N { node n f in=x out=1 }",
    "net N { node n f in=1 out=1 edge n:out:0 -- m:in:0 }",
    "net N { bogus }",
    "rule R { }",
    'net N { node n f in=1 out=1 "unterminated }',
])
def test_malformed_inputs(text):
    with pytest.raises(ParseError):
        parse(text)


def test_variables_and_references():
    doc = parse("net L { var x X node n f in=1 out=1 edge x:out:0 -- n:in:0 }\n"
                "rule R { preform { left @L right @L } }\n")
    assert doc.nets["L"].nodes["x"] == var_node("X")
    assert doc.rules["R"].preforms[0].left == doc.nets["L"]


def test_rns_conditions_roundtrip(r1):
    rns = Rns("W", (r1,), (FreshLetters(), ApplyOrder(("R1",))))
    back = parse(print_rns(rns)).rns["W"]
    assert rns_equal(back, rns) and back.conditions == rns.conditions


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_random_net_roundtrip(seed):
    rng = random.Random(seed)
    t = random_tagged(rng, random_net(rng, max_nodes=6))
    assert parse_net(print_net(t, "T")) == t
    assert parse_net(print_net(t, "T")).tags == t.tags


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_random_rns_roundtrip(seed):
    rns = random_rns(random.Random(seed), n_rules=2, variables=seed % 2 == 0)
    assert rns_equal(parse(print_rns(rns)).rns[rns.name], rns)


def test_dot_output(d1):
    dot = to_dot(d1, "D1")
    assert dot.startswith('digraph "D1" {') and dot.rstrip().endswith("}")
    assert '"n2" -> "n1"' in dot and "shape=point" in dot
    assert to_dot(Net({"n": Node("f", 0, 0)})).count("->") == 0
