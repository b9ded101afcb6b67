from __future__ import annotations

import random

import pytest
from conftest import relabel
from hypothesis import given, settings
from hypothesis import strategies as st

from renet.errors import HeightUndefined, PlaceholderArityMismatch
from renet.generate import random_rule
from renet.net import Net, Node, var_node
from renet.rules import rule
from renet.typology import HomImage, apply_net_homomorphism, classify_homomorphism, classify_rule

ALPHA = {"f": (2, 1), "a": (0, 1)}


def test_r1_labels(r1):
    labels = classify_rule(r1)
    assert {
        "manoeuvre-saving", "arity-saving", "arity-mightiness-saving",
        "letter-count-preserving", "height-saving", "totally-linear",
    } <= labels
    assert "identity" not in labels


def test_duplicating_variable_not_mightiness_saving():
    left = Net({"n": Node("f", 2, 1), "x": var_node("x")}, [("x", 0, "n", 0)],
               {"t1": ("n", "in", 1), "t2": ("n", "out", 0)})
    right = Net({"n": Node("h", 2, 1), "x": var_node("x"), "y": var_node("x")},
                [("x", 0, "n", 0), ("y", 0, "n", 1)], {"t2": ("n", "out", 0)})
    labels = classify_rule(rule("dup", left, right))
    assert "manoeuvre-mightiness-saving" not in labels
    assert "right-linear" not in labels and "left-linear" in labels


def test_identity_rule():
    labels = classify_rule(relabel("f", "f", 2, 1))
    assert {"identity", "manoeuvre-saving", "arity-saving", "letter-saving", "height-saving",
            "arity-mightiness-saving", "manoeuvre-mightiness-saving"} <= labels


def test_height_undefined_on_loop():
    loop = Net({"p": Node("p", 1, 1)}, [("p", 0, "p", 0)])
    r = rule("l", loop, Net({"q": Node("q", 1, 1)}, [("q", 0, "q", 0)]))
    assert not any(lab.startswith("height") for lab in classify_rule(r))
    with pytest.raises(HeightUndefined):
        classify_rule(r, heights=True)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_labels_consistent(seed):
    r = random_rule(random.Random(seed), max_side=3, variables=seed % 2 == 0)
    labels = classify_rule(r, monadic_bound=3)
    for cat in ("manoeuvre", "arity", "letter"):
        if f"{cat}-saving" in labels:
            assert f"{cat}-increasing" not in labels and f"{cat}-deleting" not in labels
    assert sum(x in labels for x in ("monadic", "not-monadic", "monadic-unknown")) == 1
    assert ("totally-linear" in labels) == ({"left-linear", "right-linear"} <= labels)
    if "identity" in labels:
        assert "arity-mightiness-saving" in labels


# -- homomorphisms ------------------------------------------------------------


def _chain_image(drop_in1: bool = False) -> HomImage:
    gk = Net({"g": Node("g", 2, 1), "k": Node("k", 1, 1)}, [("g", 0, "k", 0)])
    ph = {("in", 0): ("g", "in", 0), ("out", 0): ("k", "out", 0)}
    if not drop_in1:
        ph[("in", 1)] = ("g", "in", 1)
    return HomImage(gk, ph)


def test_identity_homomorphism(d1):
    assert apply_net_homomorphism({}, d1) == d1


def test_chain_homomorphism(d1):
    out = apply_net_homomorphism({"f": _chain_image()}, d1)
    expect = Net({"a": Node("a", 0, 1), "g": Node("g", 2, 1), "k": Node("k", 1, 1)},
                 [("a", 0, "g", 0), ("g", 0, "k", 0)])
    assert out == expect
    assert "down-preserving" in classify_homomorphism({"f": _chain_image()}, ALPHA)


def test_deleting_homomorphism(d1):
    h = {"f": _chain_image(drop_in1=True)}
    assert "down-deleting" in classify_homomorphism(h, ALPHA)
    # in:1 of f is unoccupied in D1, so only a declared-preserving use of in:0 would fail
    d1_full = Net({"n1": Node("f", 2, 1), "n2": Node("a", 0, 1), "n3": Node("a", 0, 1)},
                  [("n2", 0, "n1", 0), ("n3", 0, "n1", 1)])
    with pytest.raises(PlaceholderArityMismatch):
        apply_net_homomorphism(h, d1_full, preserving=True)
