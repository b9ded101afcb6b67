"""Realizations of nets over finite (power) algebras."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional

from .errors import GeneratorUnmapped, InputError, MissingInput, NoFixpointWithinBudget
from .net import IN, OUT, Net, Node, Port, has_directed_loop, parse_port, port_name


@dataclass(frozen=True)
class Row:
    inp: tuple
    out: tuple  # one frozenset per out port
    up: Optional[tuple] = None  # sorted (letter, out index) pairs; None matches any context


@dataclass(frozen=True)
class AlgebraSpec:
    """Finite carrier plus set-valued operation tables; variables project."""

    carrier: tuple
    tables: Mapping[str, tuple]  # letter -> rows

    def __post_init__(self):
        object.__setattr__(self, "carrier", tuple(self.carrier))
        object.__setattr__(self, "tables", {k: tuple(v) for k, v in self.tables.items()})
        values = set(self.carrier)
        for letter, rows in self.tables.items():
            for row in rows:
                bad = (set(row.inp) | set().union(*row.out)) - values
                if bad:
                    raise InputError(f"table {letter!r} uses values outside the carrier: {sorted(map(str, bad))}")

    @classmethod
    def from_json(cls, doc: Mapping) -> "AlgebraSpec":
        try:
            carrier = tuple(doc["carrier"])
            tables = {}
            for letter, spec in doc["tables"].items():
                rows = []
                for e in spec["entries"]:
                    up = e.get("up")
                    rows.append(Row(tuple(e["in"]), _outs(e["out"]), None if up is None else _up(up)))
                tables[letter] = rows
        except (KeyError, TypeError) as e:
            raise InputError(f"malformed algebra spec: {e}") from e
        return cls(carrier, tables)

    def to_json(self) -> dict:
        tables = {}
        for letter, rows in sorted(self.tables.items()):
            entries = []
            for r in rows:
                e = {"in": list(r.inp), "out": [sorted(o, key=str) for o in r.out]}
                if r.up is not None:
                    e["up"] = [list(x) for x in r.up]
                entries.append(e)
            tables[letter] = {"entries": entries}
        return {"carrier": list(self.carrier), "tables": tables}

    @classmethod
    def from_functions(cls, carrier: Iterable, ops: Mapping[str, tuple]) -> "AlgebraSpec":
        """Tables from Python callables: ``ops[letter] = (n_in, fn)``; fn returns a value."""
        carrier = tuple(carrier)
        tables = {}
        for letter, (n_in, fn) in ops.items():
            tables[letter] = [
                Row(args, (frozenset([fn(*args)]),)) for args in itertools.product(carrier, repeat=n_in)
            ]
        return cls(carrier, tables)

    def lookup(self, letter: str, args: tuple, up: tuple, n_out: int) -> tuple:
        rows = self.tables.get(letter)
        if rows is None:
            raise InputError(f"no table for letter {letter!r}")
        exact = [r for r in rows if r.inp == args and r.up == up]
        loose = [r for r in rows if r.inp == args and r.up is None]
        chosen = exact or loose
        out = [set() for _ in range(n_out)]
        for r in chosen:
            for k in range(n_out):
                out[k] |= r.out[k] if k < len(r.out) else r.out[-1]
        return tuple(frozenset(o) for o in out)


def _outs(out) -> tuple:
    """``out`` lists one entry per out port; an entry is a value or a list (value set)."""
    res = []
    for o in out:
        res.append(frozenset(o) if isinstance(o, list) else frozenset([o]))
    return tuple(res)


def _up(up) -> tuple:
    return tuple(sorted((str(a), int(b)) for a, b in up))


def up_context(t: Net, v: str) -> tuple:
    """Immediate up-neighbours of ``v`` as sorted (letter, out index) pairs."""
    ctx = []
    for p in t.ports(v):
        if p[1] != IN:
            continue
        q = t.link(p)
        if q is not None:
            ctx.append((t.nodes[q[0]].letter, q[2]))
    return tuple(sorted(ctx))


_DOTTED = re.compile(r"^(.+)\.(in|out)(\d+)$")


def _port(p) -> Port:
    """Ports as tuples, ``id:dir:k`` or ``id.dirk`` strings."""
    if isinstance(p, tuple):
        return p
    m = _DOTTED.match(p)
    if m and ":" not in p:
        return (m.group(1), m.group(2), int(m.group(3)))
    return parse_port(p)


def _normalize_inputs(inputs: Mapping) -> dict:
    out = {}
    for p, v in inputs.items():
        out[_port(p)] = frozenset(v) if isinstance(v, (set, frozenset, list)) else frozenset([v])
    return out


def input_ports(t: Net) -> list[Port]:
    return sorted(p for p in t.unoccupied(include_vars=True) if p[1] == IN)


def output_ports(t: Net) -> list[Port]:
    return sorted(p for p in t.unoccupied(include_vars=True) if p[1] == OUT)


def _topological(t: Net) -> list[str]:
    indeg = {v: 0 for v in t.nodes}
    succ: dict = {v: [] for v in t.nodes}
    for u, _, v, _ in t.edges:
        indeg[v] += 1
        succ[u].append(v)
    ready = sorted(v for v, d in indeg.items() if d == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for w in sorted(succ[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
        ready.sort()
    return order


@dataclass
class Evaluation:
    outputs: dict  # out port -> frozenset
    iterations: int = 0
    values: dict = field(default_factory=dict)  # (node, out index) -> frozenset


def evaluate(t: Net, alg: AlgebraSpec, inputs: Mapping, budget: Optional[int] = None) -> Evaluation:
    """Set-valued realization of ``t``; cyclic nets take the least fixpoint."""
    given = _normalize_inputs(inputs)
    missing = [p for p in input_ports(t) if p not in given]
    if missing:
        raise MissingInput(f"no input for {', '.join(port_name(p) for p in missing)}")
    if budget is None:
        budget = len(alg.carrier) * max(1, len(t)) + 1
    if budget < 1:
        raise InputError("budget must be >= 1")
    ups = {v: up_context(t, v) for v in t.nodes}
    values: dict = {(v, k): frozenset() for v, n in t.nodes.items() for k in range(n.n_out)}

    def in_values(v: str) -> list[frozenset]:
        res = []
        for p in t.ports(v):
            if p[1] != IN:
                continue
            q = t.link(p)
            res.append(given[p] if q is None else values[(q[0], q[2])])
        return res

    def fire(v: str) -> tuple:
        node = t.nodes[v]
        ins = in_values(v)
        if node.var:
            return tuple(ins[0] if ins else frozenset() for _ in range(node.n_out))
        out = [set() for _ in range(node.n_out)]
        for args in itertools.product(*[sorted(s, key=str) for s in ins]):
            for k, s in enumerate(alg.lookup(node.letter, tuple(args), ups[v], node.n_out)):
                out[k] |= s
        return tuple(frozenset(o) for o in out)

    iterations = 0
    if not has_directed_loop(t):
        for v in _topological(t):
            for k, s in enumerate(fire(v)):
                values[(v, k)] = s
        iterations = 1
    else:
        for iterations in range(1, budget + 1):
            new = dict(values)
            for v in sorted(t.nodes):
                for k, s in enumerate(fire(v)):
                    new[(v, k)] = values[(v, k)] | s
            if new == values:
                break
            values = new
        else:
            raise NoFixpointWithinBudget(f"no fixpoint after {budget} iterations")
    outputs = {p: values[(p[0], p[2])] for p in output_ports(t)}
    return Evaluation(outputs, iterations, values)


def hom_extend(phi: Mapping, t: Net, alg: AlgebraSpec) -> dict:
    """Homomorphic extension of a generator assignment along an acyclic net.

    Generators are looked up by node id, then by letter (or variable name),
    then by port name for free in-ports of ranked nodes.
    """
    if has_directed_loop(t):
        raise InputError("hom_extend needs an acyclic net")
    memo: dict = {}

    def gen(key_options, what):
        for k in key_options:
            if k in phi:
                v = phi[k]
                return frozenset(v) if isinstance(v, (set, frozenset)) else frozenset([v])
        raise GeneratorUnmapped(f"generator {what!r} is unmapped")

    def value(v: str, k: int) -> frozenset:
        if (v, k) in memo:
            return memo[(v, k)]
        node = t.nodes[v]
        if node.var and t.link((v, IN, 0)) is None:
            res = memo[(v, k)] = gen((v, node.letter, f"{v}.in0"), v)
            return res
        ins = []
        for p in t.ports(v):
            if p[1] != IN:
                continue
            q = t.link(p)
            ins.append(gen((port_name(p), p), port_name(p)) if q is None else value(q[0], q[2]))
        if node.var:
            res = ins[0] if ins else gen((v, node.letter), v)
        elif node.n_in == 0 and (v in phi or node.letter in phi or node.letter not in alg.tables):
            res = gen((v, node.letter), v)
        else:
            acc = set()
            for args in itertools.product(*[sorted(s, key=str) for s in ins]):
                acc |= alg.lookup(node.letter, tuple(args), up_context(t, v), node.n_out)[k]
            res = frozenset(acc)
        memo[(v, k)] = res
        return res

    return {p: value(p[0], p[2]) for p in output_ports(t)}


def generated_closure(
    q: Iterable[Net], alphabet: Mapping[str, tuple], depth: int, node_cap: Optional[int] = None
) -> frozenset:
    """Free generation G^depth(Q): attach current nets under each letter's in-ports.

    ``alphabet`` maps letter -> (n_in, n_out). Each step builds, for every
    letter, a fresh root node whose in-ports are each either left free or
    fed by an unoccupied out-port of a current net. Nets above ``node_cap``
    nodes are dropped.
    """
    if depth < 0:
        raise InputError("depth must be >= 0")
    current = {n: n for n in q}
    for _ in range(depth):
        pool = sorted(current.values(), key=lambda n: (len(n), n.key))
        feeds = [None] + [(s, p) for s in pool for p in output_ports(s) if not s.nodes[p[0]].var]
        new = dict(current)
        for letter, (n_in, n_out) in sorted(alphabet.items()):
            for choice in itertools.product(feeds, repeat=n_in):
                size = 1 + sum(len(c[0]) for c in choice if c is not None)
                if node_cap is not None and size > node_cap:
                    continue
                net = _build(letter, n_in, n_out, choice)
                new.setdefault(net, net)
        current = new
    return frozenset(current.values())


def _build(letter: str, n_in: int, n_out: int, choice) -> Net:
    nodes = {"r": Node(letter, n_in, n_out)}
    edges = []
    for j, c in enumerate(choice):
        if c is None:
            continue
        s, p = c
        pre = f"c{j}_"
        for v, n in s.nodes.items():
            nodes[pre + v] = n
        edges.extend((pre + u, i, pre + v, k) for u, i, v, k in s.edges)
        edges.append((pre + p[0], p[2], "r", j))
    return Net(nodes, edges, check=False)
