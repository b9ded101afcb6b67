from __future__ import annotations

from pathlib import Path

import pytest

from renet.net import Net, Node, var_node
from renet.netf import parse
from renet.rules import Preform, Rule

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load(name: str):
    return parse((FIXTURES / name).read_text())


@pytest.fixture
def d1() -> Net:
    return load("d1.netf").nets["D1"]


@pytest.fixture
def d2() -> Net:
    return load("d2.netf").nets["D2"]


@pytest.fixture
def c1() -> Net:
    return load("c1.netf").nets["C1"]


@pytest.fixture
def r1() -> Rule:
    return load("r1.netf").rules["R1"]


def relabel(src: str, dst: str, n_in: int, n_out: int, name: str = "rl") -> Rule:
    tags = {f"{d}{k}": ("x", d, k) for d, r in (("in", n_in), ("out", n_out)) for k in range(r)}
    return Rule(name, (Preform(Net({"x": Node(src, n_in, n_out)}, (), tags),
                               Net({"x": Node(dst, n_in, n_out)}, (), tags)),))


def d1_with(letter: str) -> Net:
    return Net({"n1": Node(letter, 2, 1), "n2": Node("a", 0, 1)}, [("n2", 0, "n1", 0)])


def chain(*letters: str) -> Net:
    """A directed chain of unary nodes c0 -> c1 -> ..."""
    nodes = {f"c{k}": Node(x, 1, 1) for k, x in enumerate(letters)}
    return Net(nodes, [(f"c{k}", 0, f"c{k + 1}", 0) for k in range(len(letters) - 1)])


def f_with_var() -> Net:
    """f(2,1) with variable x tied at in:0."""
    return Net({"n1": Node("f", 2, 1), "x": var_node("x")}, [("x", 0, "n1", 0)])
