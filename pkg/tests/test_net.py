from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renet.enclosure import (
    PartitionSpec,
    enclosures,
    is_enclosure,
    overlaps,
    partition_ops,
    induced_covers_t,
)
from renet.errors import (
    BoundTooSmall,
    DuplicateTag,
    PortDoubleOccupied,
    PortIndexOutOfRange,
    TagOnOccupiedPort,
    UnknownLetter,
)
from renet.generate import random_net
from renet.net import Alphabet, Net, Node, delta_d, nets_equal, structure, validate_net, var_node

D1_RAW = {
    "nodes": {"n1": ("f", 2, 1), "n2": ("a", 0, 1)},
    "edges": ["n2:out:0 -- n1:in:0"],
}


def single(letter: str, n_in: int, n_out: int) -> Net:
    return Net({"x": Node(letter, n_in, n_out)})


# -- validation ---------------------------------------------------------------


def test_validate_d1_counts():
    t = validate_net(D1_RAW)
    assert len(t) == 2 and len(t.edges) == 1 and len(t.unoccupied()) == 2


def test_validate_double_occupancy():
    raw = dict(D1_RAW, nodes={**D1_RAW["nodes"], "n3": ("a", 0, 1)})
    raw["edges"] = ["n2:out:0 -- n1:in:0", "n3:out:0 -- n1:in:0"]
    with pytest.raises(PortDoubleOccupied):
        validate_net(raw)


def test_validate_d2_closed(d2):
    assert d2.unoccupied() == []


@pytest.mark.parametrize(
    "raw, exc",
    [
        ({"nodes": {"x": ("f", 1, 1)}, "edges": [("x", 0, "x", 3)]}, PortIndexOutOfRange),
        ({"nodes": {"x": ("f", 1, 1)}, "edges": [("x", 0, "x", 0)], "tags": {"t": "x:in:0"}}, TagOnOccupiedPort),
        ({"nodes": {"x": ("f", 1, 1)}, "tags": [("t", "x:in:0"), ("t", "x:out:0")]}, DuplicateTag),
    ],
)
def test_validate_errors(raw, exc):
    with pytest.raises(exc):
        validate_net(raw)


def test_unknown_letter_against_alphabet():
    alpha = Alphabet({"f": (2, 1), "a": (0, 1)})
    assert validate_net({"nodes": {"n1": "f", "n2": "a"}, "edges": ["n2:out:0 -- n1:in:0"]}, alpha) == validate_net(D1_RAW)
    with pytest.raises(UnknownLetter):
        validate_net({"nodes": {"x": "zz"}}, alpha)


# -- equality -----------------------------------------------------------------


def _loop_presentation(root: str) -> Net:
    """The three-node loop t -> u -> v -> t with side nets, listed from ``root``."""
    order = {"t": ["t", "u", "v"], "u": ["u", "v", "t"], "v": ["v", "t", "u"]}[root]
    ids = {name: f"{root}{k}" for k, name in enumerate(order)}
    ids.update({s: f"{root}_{s}" for s in ("rho", "sigma", "mu", "lam")})
    letters = {"t": ("t", 1, 1), "u": ("u", 2, 2), "v": ("v", 2, 2),
               "rho": ("rho", 0, 1), "sigma": ("sigma", 1, 0), "mu": ("mu", 0, 1), "lam": ("lam", 1, 0)}
    edges = [
        ("t", 0, "u", 1), ("u", 1, "v", 1), ("v", 0, "t", 0),
        ("rho", 0, "u", 0), ("u", 0, "sigma", 0), ("mu", 0, "v", 0), ("v", 1, "lam", 0),
    ]
    # rotate the edge list so each presentation starts from its root
    k = order.index(root)
    edges = edges[k:] + edges[:k]
    nodes = {ids[n]: Node(*letters[n]) for n in order + ["rho", "sigma", "mu", "lam"]}
    return Net(nodes, [(ids[a], i, ids[b], j) for a, i, b, j in edges])


def test_loop_presentations_equal():
    s, q, r = (_loop_presentation(x) for x in "tuv")
    assert s == q == r
    assert structure(s).has_directed_loop


def test_renamed_ids_equal(d1):
    assert d1 == d1.rename({"n1": "zz", "n2": "yy"})


def test_d1_d2_unequal(d1, d2):
    assert not nets_equal(d1, d2)


def test_tags_ignored(d1):
    assert d1 == d1.replace(tags={"t": ("n1", "in", 1)})


def test_port_permuting_mode():
    a = Net({"x": Node("f", 2, 1), "y": Node("a", 0, 1)}, [("y", 0, "x", 0)])
    b = Net({"x": Node("f", 2, 1), "y": Node("a", 0, 1)}, [("y", 0, "x", 1)])
    assert a != b
    assert nets_equal(a, b, "port-permuting")


nets = st.builds(lambda seed: random_net(random.Random(seed), max_nodes=4), st.integers(0, 10**6))


@settings(max_examples=60, deadline=None)
@given(nets, nets, nets)
def test_equality_is_equivalence(a, b, c):
    for mode in ("strict", "permuting"):
        assert nets_equal(a, a, mode)
        assert nets_equal(a, b, mode) == nets_equal(b, a, mode)
        if nets_equal(a, b, mode) and nets_equal(b, c, mode):
            assert nets_equal(a, c, mode)


@settings(max_examples=60, deadline=None)
@given(nets, st.randoms(use_true_random=False))
def test_equality_invariant_under_renaming(a, rnd):
    ids = list(a.nodes)
    perm = ids[:]
    rnd.shuffle(perm)
    assert a.rename(dict(zip(ids, [f"q{p}" for p in perm]))) == a


# -- delta --------------------------------------------------------------------


def test_delta_examples(d1, d2, c1):
    assert tuple(delta_d(d1)) == (2, 1, 1)
    assert tuple(delta_d(d2)) == (0, 0, 0)
    assert tuple(delta_d([d1, c1])) == (4, 2, 2)


@settings(max_examples=60, deadline=None)
@given(nets)
def test_delta_equals_full_tagging(t):
    tagged = t.replace(tags={f"t{k}": p for k, p in enumerate(t.unoccupied())})
    assert delta_d(t).total == len(tagged.tags)


# -- enclosures ---------------------------------------------------------------


def test_enclosures_d1(d1):
    encs = enclosures(d1, 2)
    assert len(encs) == 3 and d1 in encs


def test_is_enclosure(d1):
    assert is_enclosure(single("f", 2, 1), d1)
    assert not is_enclosure(single("h", 2, 1), d1)


def test_enclosure_bound():
    with pytest.raises(BoundTooSmall):
        enclosures(single("f", 1, 1), 0)


@settings(max_examples=40, deadline=None)
@given(nets)
def test_enclosures_contain_whole_and_singletons(t):
    if len(t.components()) != 1:
        return
    encs = enclosures(t, len(t))
    assert t in encs
    for v in t.nodes:
        assert t.induced([v]) in encs


# -- partitions and covers ----------------------------------------------------


def test_partition_whole_cover(d1):
    rep = partition_ops(d1, [d1])
    assert rep.is_cover and rep.is_saturating and rep.is_partition
    assert len(rep.induced.blocks) == 1


def test_partition_overlapping_cover(d1):
    rep = partition_ops(d1, [single("f", 2, 1), d1])
    assert rep.is_cover and rep.is_saturating and not rep.is_partition
    assert sorted(map(sorted, rep.induced.blocks)) == [["n1"], ["n2"]]
    assert induced_covers_t(d1, rep)


def test_not_a_cover(d1):
    rep = partition_ops(d1, [single("f", 2, 1)])
    assert not rep.is_cover
    assert not induced_covers_t(d1, rep)


def test_partition_spec_parse():
    p = PartitionSpec.parse("n1,n2|n3")
    assert sorted(map(sorted, p.blocks)) == [["n1", "n2"], ["n3"]]


# -- structure ----------------------------------------------------------------


def test_structure_examples(d1, d2):
    assert structure(Net({"x": var_node("x")})).height == 0
    s = structure(d1)
    assert (s.components, s.has_directed_loop, s.height) == (1, False, 2)
    s = structure(d2)
    assert s.has_directed_loop and s.height is None


@settings(max_examples=80, deadline=None)
@given(st.builds(lambda seed: random_net(random.Random(seed), max_nodes=6), st.integers(0, 10**6)))
def test_height_defined_iff_acyclic(t):
    s = structure(t)
    assert (s.height is None) == s.has_directed_loop


# -- overlaps -----------------------------------------------------------------


def test_overlaps_examples(d1, d2):
    o = overlaps(d1, d1, 2)
    assert o.overlap and o.shared == d1
    assert not overlaps(d1, d2, 2).overlap
    o = overlaps(d1, single("f", 2, 1), 2)
    assert o.overlap and o.shared == single("f", 2, 1)
