"""Nets: finite labelled port-graphs with indexed, directed ports.

A node carries a letter and fixed in/out ranks. An edge joins one out-port
to one in-port; each port holds at most one edge. Tags give stable names to
unoccupied ports and are ignored by equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional

from .canon import Edge, canonical_form, components
from .errors import (
    DuplicateTag,
    InputError,
    PortDoubleOccupied,
    PortIndexOutOfRange,
    TagOnOccupiedPort,
    UnknownLetter,
    UnknownNode,
)

IN = "in"
OUT = "out"
DIRECTIONS = (IN, OUT)

# (node id, direction, index)
Port = tuple[str, str, int]


def opposite(direction: str) -> str:
    return OUT if direction == IN else IN


@dataclass(frozen=True, order=True)
class Node:
    letter: str
    n_in: int
    n_out: int
    var: bool = False

    def rank(self, direction: str) -> int:
        return self.n_in if direction == IN else self.n_out

    @property
    def is_ground(self) -> bool:
        return not self.var and self.n_in == 0 and self.n_out == 1


def var_node(name: str) -> Node:
    """Frontier letters always carry in-rank 1 and out-rank 1."""
    return Node(name, 1, 1, True)


@dataclass(frozen=True)
class Alphabet:
    ranked: Mapping[str, tuple[int, int]] = field(default_factory=dict)
    frontier: frozenset = frozenset()
    fresh_prefix: str = "$"

    def __post_init__(self):
        clash = set(self.ranked) & set(self.frontier)
        if clash:
            raise InputError(f"letters both ranked and frontier: {sorted(clash)}")
        bad = [x for x in itertools.chain(self.ranked, self.frontier) if x.startswith(self.fresh_prefix)]
        if bad:
            raise InputError(f"letters use the reserved fresh prefix: {bad}")

    @property
    def ground(self) -> frozenset:
        return frozenset(a for a, r in self.ranked.items() if tuple(r) == (0, 1))

    def node(self, letter: str) -> Node:
        if letter in self.frontier:
            return var_node(letter)
        if letter not in self.ranked:
            raise UnknownLetter(letter)
        i, o = self.ranked[letter]
        return Node(letter, i, o)

    def check(self, net: "Net") -> None:
        for nid, node in net.nodes.items():
            if node.var:
                if node.letter not in self.frontier:
                    raise UnknownLetter(f"{nid}: frontier letter {node.letter!r}")
            elif node.letter.startswith(self.fresh_prefix):
                continue
            elif self.ranked.get(node.letter) != (node.n_in, node.n_out):
                raise UnknownLetter(f"{nid}: {node.letter!r} with ranks ({node.n_in},{node.n_out})")


class FreshLetters:
    """Mints letters outside any user alphabet: reserved prefix + monotone counter."""

    def __init__(self, prefix: str = "$", start: int = 0):
        self.prefix = prefix
        self.counter = start

    def mint(self, avoid: Iterable[str] = ()) -> str:
        avoid = set(avoid)
        while True:
            letter = f"{self.prefix}{self.counter}"
            self.counter += 1
            if letter not in avoid:
                return letter


class Net:
    """An immutable net. Equality is strict isomorphism, ignoring tags and ids."""

    def __init__(
        self,
        nodes: Mapping[str, Node],
        edges: Iterable[Edge] = (),
        tags: Optional[Mapping[str, Port]] = None,
        name: str = "",
        check: bool = True,
    ):
        self._nodes = MappingProxyType(dict(nodes))
        self._edges = frozenset(tuple(e) for e in edges)
        self._tags = MappingProxyType({k: tuple(v) for k, v in (tags or {}).items()})
        self.name = name
        if check:
            self._validate()

    # -- structure ---------------------------------------------------------
    @property
    def nodes(self) -> Mapping[str, Node]:
        return self._nodes

    @property
    def edges(self) -> frozenset:
        return self._edges

    @property
    def tags(self) -> Mapping[str, Port]:
        return self._tags

    def _validate(self) -> None:
        seen: dict[Port, Edge] = {}
        for e in self._edges:
            u, i, v, j = e
            for port in ((u, OUT, i), (v, IN, j)):
                nid, d, k = port
                if nid not in self._nodes:
                    raise UnknownNode(f"edge {e} names unknown node {nid!r}")
                if not (isinstance(k, int) and 0 <= k < self._nodes[nid].rank(d)):
                    raise PortIndexOutOfRange(f"{nid}:{d}:{k}")
                if port in seen:
                    raise PortDoubleOccupied(f"{nid}:{d}:{k} occupied by {seen[port]} and {e}")
                seen[port] = e
        ports_tagged = {}
        for t, p in self._tags.items():
            nid, d, k = p
            if nid not in self._nodes:
                raise UnknownNode(f"tag {t!r} names unknown node {nid!r}")
            if d not in DIRECTIONS or not (0 <= k < self._nodes[nid].rank(d)):
                raise PortIndexOutOfRange(f"tag {t!r} at {nid}:{d}:{k}")
            if p in seen:
                raise TagOnOccupiedPort(f"tag {t!r} at {nid}:{d}:{k}")
            if p in ports_tagged:
                raise DuplicateTag(f"port {nid}:{d}:{k} tagged {ports_tagged[p]!r} and {t!r}")
            ports_tagged[p] = t

    @cached_property
    def links(self) -> Mapping[Port, Port]:
        out = {}
        for u, i, v, j in self._edges:
            out[(u, OUT, i)] = (v, IN, j)
            out[(v, IN, j)] = (u, OUT, i)
        return MappingProxyType(out)

    @cached_property
    def tag_at(self) -> Mapping[Port, str]:
        return MappingProxyType({p: t for t, p in self._tags.items()})

    def link(self, port: Port) -> Optional[Port]:
        return self.links.get(port)

    def ports(self, nid: str) -> Iterator[Port]:
        node = self._nodes[nid]
        for d in DIRECTIONS:
            for k in range(node.rank(d)):
                yield (nid, d, k)

    def all_ports(self) -> Iterator[Port]:
        for nid in sorted(self._nodes):
            yield from self.ports(nid)

    def unoccupied(self, include_vars: bool = False) -> list[Port]:
        return [
            p
            for p in self.all_ports()
            if p not in self.links and (include_vars or not self._nodes[p[0]].var)
        ]

    def neighbours(self, nid: str) -> set[str]:
        return {self.links[p][0] for p in self.ports(nid) if p in self.links}

    def ranked_ids(self) -> list[str]:
        return sorted(n for n, node in self._nodes.items() if not node.var)

    def var_ids(self) -> list[str]:
        return sorted(n for n, node in self._nodes.items() if node.var)

    def letters(self) -> frozenset:
        """Ranked (non-frontier) letters."""
        return frozenset(n.letter for n in self._nodes.values() if not n.var)

    def variables(self) -> frozenset:
        return frozenset(n.letter for n in self._nodes.values() if n.var)

    def components(self) -> list[list[str]]:
        return components(self._nodes, self._edges)

    def __len__(self) -> int:
        return len(self._nodes)

    # -- equality ----------------------------------------------------------
    @cached_property
    def _canon(self):
        base = {v: (n.letter, n.n_in, n.n_out, n.var) for v, n in self._nodes.items()}
        return canonical_form(base, self._edges, ports=True)

    @cached_property
    def _canon_permuting(self):
        base = {v: (n.letter, n.n_in, n.n_out, n.var) for v, n in self._nodes.items()}
        return canonical_form(base, self._edges, ports=False)

    @cached_property
    def tagged_key(self):
        """Canonical key that also fixes which port carries which tag name."""
        base = {v: (0, n.letter, n.n_in, n.n_out, n.var) for v, n in self._nodes.items()}
        edges = list(self._edges)
        for t, (v, d, k) in self._tags.items():
            pid = f"\x00tag:{t}"
            base[pid] = (1, t, d)
            edges.append((pid, 0, v, k) if d == IN else (v, k, pid, 0))
        return canonical_form(base, edges, ports=True)[0]

    @property
    def key(self):
        return self._canon[0]

    @property
    def canonical_order(self) -> list[str]:
        return self._canon[1]

    @property
    def permuting_key(self):
        return self._canon_permuting[0]

    def __eq__(self, other):
        if not isinstance(other, Net):
            return NotImplemented
        if len(self._nodes) != len(other._nodes) or len(self._edges) != len(other._edges):
            return False
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<Net{label} nodes={len(self._nodes)} edges={len(self._edges)} tags={len(self._tags)}>"

    # -- derived nets --------------------------------------------------------
    def replace(self, **changes) -> "Net":
        args = dict(nodes=self._nodes, edges=self._edges, tags=self._tags, name=self.name)
        args.update(changes)
        return Net(**args)

    def with_name(self, name: str) -> "Net":
        return Net(self._nodes, self._edges, self._tags, name=name, check=False)

    def without_tags(self) -> "Net":
        return Net(self._nodes, self._edges, {}, name=self.name, check=False)

    def tagged_equal(self, other: "Net") -> bool:
        return self == other and self.tagged_key == other.tagged_key

    def rename(self, mapping: Mapping[str, str]) -> "Net":
        """Rename node ids; ids missing from ``mapping`` are kept."""
        m = lambda v: mapping.get(v, v)
        return Net(
            {m(v): n for v, n in self._nodes.items()},
            [(m(u), i, m(v), j) for u, i, v, j in self._edges],
            {t: (m(p[0]), p[1], p[2]) for t, p in self._tags.items()},
            name=self.name,
        )

    def prefixed(self, prefix: str) -> "Net":
        return self.rename({v: prefix + v for v in self._nodes})

    def relabel_letters(self, mapping: Mapping[str, str]) -> "Net":
        return Net(
            {
                v: (n if n.var else Node(mapping.get(n.letter, n.letter), n.n_in, n.n_out))
                for v, n in self._nodes.items()
            },
            self._edges,
            self._tags,
            name=self.name,
            check=False,
        )

    def induced(self, ids: Iterable[str], tag_boundary: bool = False) -> "Net":
        """Node-induced subnet; severed edge endpoints become unoccupied ports.

        With ``tag_boundary`` every unoccupied port of a ranked node is tagged
        ``id.in0`` / ``id.out1`` style (existing tags are kept otherwise).
        """
        ids = set(ids)
        missing = ids - set(self._nodes)
        if missing:
            raise UnknownNode(sorted(missing))
        nodes = {v: self._nodes[v] for v in ids}
        edges = [e for e in self._edges if e[0] in ids and e[2] in ids]
        if tag_boundary:
            sub = Net(nodes, edges, check=False)
            tags = {port_name(p): p for p in sub.unoccupied()}
        else:
            tags = {t: p for t, p in self._tags.items() if p[0] in ids}
        return Net(nodes, edges, tags, name=self.name, check=False)

    def with_boundary_tags(self) -> "Net":
        return self.induced(self._nodes, tag_boundary=True)


def port_name(p: Port) -> str:
    return f"{p[0]}.{p[1]}{p[2]}"


def disjoint_union(nets: Iterable[Net], name: str = "") -> Net:
    nodes, edges, tags = {}, [], {}
    for k, net in enumerate(nets):
        pre = f"j{k}_"
        r = net.prefixed(pre)
        nodes.update(r.nodes)
        edges.extend(r.edges)
        for t, p in r.tags.items():
            tags[t if t not in tags else f"{pre}{t}"] = p
    return Net(nodes, edges, tags, name=name)


def isomorphism(a: Net, b: Net) -> Optional[dict[str, str]]:
    """A strict node bijection a -> b, or None."""
    if a != b:
        return None
    return dict(zip(a.canonical_order, b.canonical_order))


# -- construction from raw descriptions --------------------------------------

def validate_net(raw: Mapping, alphabet: Optional[Alphabet] = None, name: str = "") -> Net:
    """Build a Net from a plain description.

    ``raw`` has ``nodes`` (id -> letter or (letter, in, out)), optional
    ``vars`` (id -> frontier name), ``edges`` as ``(src, i, dst, j)`` or
    ``"a:out:0 -- b:in:1"`` strings, and ``tags`` (name -> port).
    """
    nodes: dict[str, Node] = {}
    for nid, spec in dict(raw.get("nodes", {})).items():
        if isinstance(spec, Node):
            node = spec
        elif isinstance(spec, str):
            if alphabet is None:
                raise InputError(f"node {nid}: ranks needed without an alphabet")
            node = alphabet.node(spec)
        else:
            letter, i, o = spec
            node = Node(letter, int(i), int(o))
        nodes[str(nid)] = node
    for nid, vname in dict(raw.get("vars", {})).items():
        if str(nid) in nodes:
            raise InputError(f"duplicate node id {nid!r}")
        nodes[str(nid)] = var_node(vname)
    edges = [parse_edge(e) for e in raw.get("edges", ())]
    if len(set(edges)) != len(edges):
        dup = next(e for e in edges if edges.count(e) > 1)
        raise PortDoubleOccupied(f"edge listed twice: {dup}")
    tags = {}
    raw_tags = raw.get("tags", {})
    items = raw_tags.items() if isinstance(raw_tags, Mapping) else raw_tags
    for t, p in items:
        if t in tags:
            raise DuplicateTag(t)
        tags[t] = parse_port(p)
    net = Net(nodes, edges, tags, name=name or raw.get("name", ""))
    if alphabet is not None:
        alphabet.check(net)
    return net


def parse_port(p) -> Port:
    if isinstance(p, str):
        parts = p.split(":")
        if len(parts) != 3 or parts[1] not in DIRECTIONS:
            raise InputError(f"bad port {p!r}")
        return (parts[0], parts[1], int(parts[2]))
    nid, d, k = p
    return (str(nid), d, int(k))


def parse_edge(e) -> Edge:
    if isinstance(e, str):
        left, right = (s.strip() for s in e.split("--"))
        a, b = parse_port(left), parse_port(right)
        if a[1] == IN and b[1] == OUT:
            a, b = b, a
        if a[1] != OUT or b[1] != IN:
            raise InputError(f"edge must join an out-port to an in-port: {e!r}")
        return (a[0], a[2], b[0], b[2])
    u, i, v, j = e
    return (str(u), int(i), str(v), int(j))


# -- queries -------------------------------------------------------------------

def nets_equal(p: Net, q: Net, mode: str = "strict") -> bool:
    if mode == "strict":
        return p == q
    if mode in ("permuting", "port-permuting"):
        return len(p) == len(q) and p.permuting_key == q.permuting_key
    raise ValueError(f"unknown equality mode {mode!r}")


@dataclass(frozen=True)
class Delta:
    total: int
    n_in: int
    n_out: int

    def __iter__(self):
        return iter((self.total, self.n_in, self.n_out))

    @property
    def split(self) -> tuple[int, int]:
        return (self.n_in, self.n_out)


def delta_d(j) -> Delta:
    """Unoccupied-port counts of a net or jungle (ranked nodes only)."""
    nets = [j] if isinstance(j, Net) else list(j)
    n_in = n_out = 0
    for net in nets:
        for _, d, _ in net.unoccupied():
            if d == IN:
                n_in += 1
            else:
                n_out += 1
    return Delta(n_in + n_out, n_in, n_out)


def has_directed_loop(net: Net) -> bool:
    succ = {v: [] for v in net.nodes}
    for u, _, v, _ in net.edges:
        succ[u].append(v)
    state = dict.fromkeys(net.nodes, 0)
    for root in net.nodes:
        if state[root]:
            continue
        stack = [(root, iter(succ[root]))]
        state[root] = 1
        while stack:
            v, it = stack[-1]
            w = next(it, None)
            if w is None:
                state[v] = 2
                stack.pop()
            elif state[w] == 1:
                return True
            elif state[w] == 0:
                state[w] = 1
                stack.append((w, iter(succ[w])))
    return False


def height(net: Net) -> Optional[int]:
    """Height, or None when the net has a directed loop.

    A bare frontier, ground or empty net has height 0; otherwise each node
    sits one above the highest node feeding its in-ports.
    """
    if len(net) == 0:
        return 0
    if len(net) == 1:
        (node,) = net.nodes.values()
        if node.var or node.is_ground:
            return 0
    if has_directed_loop(net):
        return None
    below = {v: [] for v in net.nodes}
    for u, _, v, _ in net.edges:
        below[v].append(u)
    memo: dict[str, int] = {}

    def h(v):
        if v not in memo:
            stack = [v]
            while stack:
                x = stack[-1]
                pending = [u for u in below[x] if u not in memo]
                if pending:
                    stack.extend(pending)
                    continue
                memo[x] = 1 + max((memo[u] for u in below[x]), default=0)
                stack.pop()
        return memo[v]

    return max(h(v) for v in net.nodes)


@dataclass(frozen=True)
class Structure:
    components: int
    has_directed_loop: bool
    height: Optional[int]

    @property
    def broken(self) -> bool:
        return self.components > 1


def structure(t) -> Structure:
    if isinstance(t, Net):
        return Structure(len(t.components()), has_directed_loop(t), height(t))
    nets = list(t)
    comps = sum(len(n.components()) for n in nets)
    loop = any(has_directed_loop(n) for n in nets)
    hs = [height(n) for n in nets]
    h = None if loop or not nets else max(hs)
    return Structure(comps, loop, h)


def jungle(*nets: Net) -> frozenset:
    return frozenset(nets)


def jungle_letters(j: Iterable[Net]) -> frozenset:
    out = set()
    for n in j:
        out |= n.letters()
    return frozenset(out)
