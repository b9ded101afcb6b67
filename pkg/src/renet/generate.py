"""Seeded random generators for nets, rules, partitions and sister pairs.

Everything takes an explicit ``random.Random`` so runs are reproducible.
"""

from __future__ import annotations

import random
from typing import Mapping, Optional

from .enclosure import PartitionSpec, random_partition
from .net import IN, OUT, Net, Node, delta_d, var_node
from .rules import Preform, Rns, Rule

# a small default alphabet: a ground letter, two unary letters, a binary one
DESK = {"a": (0, 1), "f": (1, 1), "g": (1, 1), "h": (2, 1)}


def _free(nodes: Mapping[str, Node], edges, d: str) -> list:
    used = {(u, OUT, i) for u, i, _, _ in edges} | {(v, IN, j) for _, _, v, j in edges}
    return [
        (v, d, k)
        for v in sorted(nodes)
        for k in range(nodes[v].rank(d))
        if (v, d, k) not in used
    ]


def _link(edges: list, a, b) -> None:
    out, inn = (a, b) if a[1] == OUT else (b, a)
    edges.append((out[0], out[2], inn[0], inn[2]))


def random_net(
    rng: random.Random,
    alphabet: Mapping[str, tuple[int, int]] = DESK,
    n_nodes: Optional[int] = None,
    max_nodes: int = 5,
    edge_p: float = 0.6,
    connected: bool = False,
    prefix: str = "n",
) -> Net:
    """A random net; ``connected`` retries until a single component appears."""
    letters = sorted(alphabet)
    for _ in range(200):
        n = n_nodes if n_nodes is not None else rng.randint(1, max_nodes)
        nodes = {f"{prefix}{k}": Node(x, *alphabet[x]) for k, x in enumerate(rng.choice(letters) for _ in range(n))}
        edges: list = []
        ids = list(nodes)
        # spanning attempt first, then extra edges
        for k in range(1, n):
            v = ids[k]
            options = []
            for u in ids[:k]:
                options += [(p, q) for p in _free({v: nodes[v]}, edges, OUT) for q in _free({u: nodes[u]}, edges, IN)]
                options += [(p, q) for p in _free({v: nodes[v]}, edges, IN) for q in _free({u: nodes[u]}, edges, OUT)]
            if options and (connected or rng.random() < edge_p):
                _link(edges, *rng.choice(options))
        outs, ins = _free(nodes, edges, OUT), _free(nodes, edges, IN)
        rng.shuffle(outs)
        rng.shuffle(ins)
        for p, q in zip(outs, ins):
            if rng.random() < edge_p * 0.5:
                _link(edges, p, q)
        net = Net(nodes, edges)
        if not connected or len(net.components()) == 1:
            return net
    raise RuntimeError("could not generate a connected net")


def random_tagged(rng: random.Random, net: Net, p: float = 0.7) -> Net:
    """Tag a random subset of the unoccupied ports (names t0, t1, ...)."""
    tags = {}
    for port in net.unoccupied():
        if rng.random() < p:
            tags[f"t{len(tags)}"] = port
    return net.replace(tags=tags)


def random_rule(
    rng: random.Random,
    alphabet: Mapping[str, tuple[int, int]] = DESK,
    max_side: int = 3,
    variables: bool = False,
    name: str = "r",
) -> Rule:
    """A random rule with connected sides of at most ``max_side`` nodes.

    Right-side tags reuse left tag names of the same direction; a variable
    (when asked for) hangs off an untagged unoccupied left port and, with
    probability one half, is kept on the right at a port of the same
    direction.
    """
    while True:
        left = random_tagged(rng, random_net(rng, alphabet, max_nodes=max_side, connected=True, prefix="l"))
        right = random_net(rng, alphabet, max_nodes=max_side, connected=True, prefix="r")
        lnodes, ledges = dict(left.nodes), list(left.edges)
        rnodes, redges = dict(right.nodes), list(right.edges)
        ltags = dict(left.tags)
        var_dir = None
        if variables:
            spots = [p for p in left.unoccupied() if p not in left.tag_at]
            if spots:
                spot = rng.choice(spots)
                lnodes["X"] = var_node("X")
                _link(ledges, spot, ("X", IN if spot[1] == OUT else OUT, 0))
                var_dir = spot[1]
        rtags = {}
        free_r = {d: _free(rnodes, redges, d) for d in (IN, OUT)}
        for d in free_r:
            rng.shuffle(free_r[d])
        if var_dir is not None and rng.random() < 0.5 and free_r[var_dir]:
            spot = free_r[var_dir].pop()
            rnodes["X"] = var_node("X")
            _link(redges, spot, ("X", IN if spot[1] == OUT else OUT, 0))
        for t, p in sorted(ltags.items()):
            if free_r[p[1]] and rng.random() < 0.8:
                rtags[t] = free_r[p[1]].pop()
        try:
            pre = Preform(Net(lnodes, ledges, ltags), Net(rnodes, redges, rtags))
        except Exception:
            continue
        return Rule(name, (pre,))


def relabel_rule(letter: str, rank: tuple[int, int], new_letter: str, name: str = "relabel") -> Rule:
    """A totally linear, arity-saving rule: rename one letter, every port tagged."""
    n_in, n_out = rank
    tags = {f"{d}{k}": ("x", d, k) for d in (IN, OUT) for k in range(n_in if d == IN else n_out)}
    left = Net({"x": Node(letter, n_in, n_out)}, (), tags)
    right = Net({"x": Node(new_letter, n_in, n_out)}, (), tags)
    return Rule(name, (Preform(left, right),))


def random_rns(rng: random.Random, alphabet=DESK, n_rules: int = 1, **kw) -> Rns:
    return Rns("R", tuple(random_rule(rng, alphabet, name=f"r{k}", **kw) for k in range(n_rules)))


def random_blocks(rng: random.Random, t: Net, merge_p: float = 0.5) -> PartitionSpec:
    return random_partition(t, rng, merge_p)


def random_sister(
    rng: random.Random,
    a: Net,
    alphabet: Mapping[str, tuple[int, int]] = DESK,
    max_nodes: int = 3,
    tries: int = 2000,
) -> Optional[Net]:
    """A random net with the same split unoccupied-port signature as ``a``."""
    target = delta_d(a)
    for _ in range(tries):
        b = random_net(rng, alphabet, max_nodes=max_nodes, prefix="m")
        if delta_d(b) == target:
            return b
    return None


def single_node_nets(alphabet: Mapping[str, tuple[int, int]]) -> list[Net]:
    """Every one-node net: each letter with every set of self-loops."""
    out = []
    for x in sorted(alphabet):
        n_in, n_out = alphabet[x]
        node = Node(x, n_in, n_out)

        def loops(i: int, used_in: frozenset, acc: tuple):
            if i == n_out:
                yield acc
                return
            yield from loops(i + 1, used_in, acc)
            for j in range(n_in):
                if j not in used_in:
                    yield from loops(i + 1, used_in | {j}, acc + (("v", i, "v", j),))

        for edges in loops(0, frozenset(), ()):
            out.append(Net({"v": node}, edges))
    return out


BOOL = {"and": (2, 1), "or": (2, 1), "not": (1, 1), "xor": (2, 1)}


def random_boolean_net(rng: random.Random, max_nodes: int = 6, acyclic: bool = True) -> Net:
    """Gates only; acyclic nets wire each gate's inputs to earlier gates' outputs."""
    n = rng.randint(1, max_nodes)
    letters = sorted(BOOL)
    nodes = {f"g{k}": Node(x, *BOOL[x]) for k, x in enumerate(rng.choice(letters) for _ in range(n))}
    edges: list = []
    used_out: set = set()
    for k in range(n):
        v = f"g{k}"
        for j in range(nodes[v].n_in):
            pool = [f"g{i}" for i in (range(k) if acyclic else range(n)) if f"g{i}" not in used_out]
            if pool and rng.random() < 0.6:
                u = rng.choice(pool)
                used_out.add(u)
                edges.append((u, 0, v, j))
    return Net(nodes, edges)


def planted_host(rng: random.Random, pattern: Net, extra: Net, edge_p: float = 0.5) -> Net:
    """Disjoint union of ``pattern``'s ranked part and ``extra``, randomly wired."""
    core = pattern.induced(pattern.ranked_ids()).without_tags()
    nodes = {f"p{v}": n for v, n in core.nodes.items()}
    nodes.update({f"e{v}": n for v, n in extra.nodes.items()})
    edges = [(f"p{u}", i, f"p{v}", j) for u, i, v, j in core.edges]
    edges += [(f"e{u}", i, f"e{v}", j) for u, i, v, j in extra.edges]
    outs, ins = _free(nodes, edges, OUT), _free(nodes, edges, IN)
    rng.shuffle(outs)
    rng.shuffle(ins)
    for p, q in zip(outs, ins):
        if rng.random() < edge_p:
            _link(edges, p, q)
    return Net(nodes, edges)


def all_nets(alphabet: Mapping[str, tuple[int, int]], max_nodes: int) -> list[Net]:
    """Every net up to isomorphism with 1..max_nodes nodes over ``alphabet``."""
    import itertools

    seen: dict = {}
    for n in range(1, max_nodes + 1):
        for word in itertools.combinations_with_replacement(sorted(alphabet), n):
            nodes = {f"n{k}": Node(x, *alphabet[x]) for k, x in enumerate(word)}
            outs = _free(nodes, [], OUT)
            ins = _free(nodes, [], IN)

            def wire(k: int, used: frozenset, acc: tuple):
                if k == len(outs):
                    yield acc
                    return
                yield from wire(k + 1, used, acc)
                for q in ins:
                    if q not in used:
                        p = outs[k]
                        yield from wire(k + 1, used | {q}, acc + ((p[0], p[2], q[0], q[2]),))

            for edges in wire(0, frozenset(), ()):
                net = Net(nodes, edges, check=False)
                seen.setdefault(net, net)
    return sorted(seen.values(), key=lambda t: (len(t), len(t.edges), t.key))


def cover_rns(
    rng: random.Random,
    t: Net,
    blocks,
    split_p: float = 0.5,
    share: bool = False,
    name: str = "C",
) -> Rns:
    """A cover RNS contracting each block class of ``t``.

    Each isomorphism class of blocks gets its own right side: one fresh
    node, or (with probability ``split_p``) a fresh two-node chain that
    carries the in-ports on its head and the out-ports on its tail. With
    ``share`` set, classes whose single-node right sides would coincide
    reuse one letter, so right sides are no longer pairwise distinct.
    """
    from .abstraction import block_pattern
    from .rules import FreshLetters as Fresh

    letters = iter(f"$c{k}" for k in range(10_000))
    by_key: dict = {}
    shared: dict = {}
    rules = []
    for b in sorted(blocks, key=sorted):
        pattern, _ = block_pattern(t, b)
        if pattern.tagged_key in by_key:
            continue
        ins = sorted((n, p) for n, p in pattern.tags.items() if p[1] == IN)
        outs = sorted((n, p) for n, p in pattern.tags.items() if p[1] == OUT)
        if not share and rng.random() < split_p:
            head = Node(next(letters), len(ins), 1)
            tail = Node(next(letters), 1, len(outs))
            tags = {n: ("u", IN, k) for k, (n, _) in enumerate(ins)}
            tags.update({n: ("v", OUT, k) for k, (n, _) in enumerate(outs)})
            right = Net({"u": head, "v": tail}, [("u", 0, "v", 0)], tags)
        else:
            sig = (tuple(n for n, _ in ins), tuple(n for n, _ in outs))
            if share and sig in shared:
                letter = shared[sig]
            else:
                letter = next(letters)
                shared[sig] = letter
            tags = {n: ("w", IN, k) for k, (n, _) in enumerate(ins)}
            tags.update({n: ("w", OUT, k) for k, (n, _) in enumerate(outs)})
            right = Net({"w": Node(letter, len(ins), len(outs))}, [], tags)
        rname = f"{name}.{len(rules)}"
        by_key[pattern.tagged_key] = rname
        rules.append(Rule(rname, (Preform(pattern, right),)))
    return Rns(name, tuple(rules), (Fresh(),))
