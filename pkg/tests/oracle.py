"""Brute-force reference implementations, written without the library's matcher.

They trade speed for obviousness: every injective map is tried, every
condition is checked literally.
"""

from __future__ import annotations

import itertools
from collections import deque

from renet.net import IN, OUT, Net


def _links(net: Net) -> dict:
    out = {}
    for u, i, v, j in net.edges:
        out[(u, OUT, i)] = (v, IN, j)
        out[(v, IN, j)] = (u, OUT, i)
    return out


def _ports(net: Net, v: str):
    node = net.nodes[v]
    return [(v, IN, k) for k in range(node.n_in)] + [(v, OUT, k) for k in range(node.n_out)]


def _reach(host: Net, start: str, blocked: set) -> set:
    hl = _links(host)
    seen, todo = {start}, deque([start])
    while todo:
        v = todo.popleft()
        for p in _ports(host, v):
            q = hl.get(p)
            if q and q[0] not in blocked and q[0] not in seen:
                seen.add(q[0])
                todo.append(q[0])
    return seen


def oracle_matches(left: Net, host: Net):
    """Yield (phi, bindings) for every admissible embedding of ``left``."""
    ll, hl = _links(left), _links(host)
    ranked = [v for v in sorted(left.nodes) if not left.nodes[v].var]
    vars_ = [v for v in sorted(left.nodes) if left.nodes[v].var]
    tagged = set(left.tags.values())
    for image in itertools.permutations(sorted(host.nodes), len(ranked)):
        phi = dict(zip(ranked, image))
        if any(host.nodes[phi[v]] != left.nodes[v] for v in ranked):
            continue
        img = set(image)
        want = {(phi[u], i, phi[v], j) for u, i, v, j in left.edges if u in phi and v in phi}
        have = {e for e in host.edges if e[0] in img and e[2] in img}
        if want != have:
            continue
        good = True
        var_ports = {}
        for x in vars_:
            (q,) = [ll[p] for p in _ports(left, x) if p in ll]
            var_ports[q] = x
        for v in ranked:
            for p in _ports(left, v):
                hp = (phi[v], p[1], p[2])
                if p in ll or p in tagged:
                    continue
                if hp in hl:
                    good = False
        if not good:
            continue
        bindings = {}
        for q, x in var_ports.items():
            hp = (phi[q[0]], q[1], q[2])
            if hp not in hl:
                bindings[x] = (frozenset(), None)
                continue
            tie = hl[hp]
            comp = _reach(host, tie[0], img)
            crossing = [e for e in host.edges if (e[0] in comp) != (e[2] in comp) and (e[0] in img or e[2] in img)]
            if len(crossing) != 1:
                good = False
                break
            bindings[x] = (frozenset(comp), tie)
        if good:
            yield phi, bindings


def oracle_splice(left: Net, right: Net, host: Net, phi: dict, bindings: dict) -> Net:
    hl = _links(host)
    removed = set(phi.values())
    for comp, _ in bindings.values():
        removed |= comp
    nodes = {v: n for v, n in host.nodes.items() if v not in removed}
    edges = [e for e in host.edges if e[0] in nodes and e[2] in nodes]
    rid = {v: f"new:{v}" for v in right.nodes if not right.nodes[v].var}
    for v, nid in rid.items():
        nodes[nid] = right.nodes[v]
    edges += [(rid[u], i, rid[v], j) for u, i, v, j in right.edges if u in rid and v in rid]
    by_name = {left.nodes[x].letter: b for x, b in bindings.items()}
    count: dict = {}
    for x in sorted(v for v in right.nodes if right.nodes[v].var):
        comp, tie = by_name[right.nodes[x].letter]
        if not comp:
            continue
        k = count.get(x, 0)
        count[x] = k + 1
        cp = {v: (v if k == 0 else f"{v}#copy{k}") for v in comp}
        for v in comp:
            nodes[cp[v]] = host.nodes[v]
        edges += [(cp[u], i, cp[v], j) for u, i, v, j in host.edges if u in comp and v in comp]
        ((ru, rd, rk),) = [
            (e[2], IN, e[3]) if e[0] == x else (e[0], OUT, e[1]) for e in right.edges if x in (e[0], e[2])
        ]
        if rd == IN:
            edges.append((cp[tie[0]], tie[2], rid[ru], rk))
        else:
            edges.append((rid[ru], rk, cp[tie[0]], tie[2]))
    for t, lp in left.tags.items():
        if t not in right.tags:
            continue
        hp = (phi[lp[0]], lp[1], lp[2])
        ext = hl.get(hp)
        if ext is None:
            continue
        rp = right.tags[t]
        if rp[1] == IN:
            edges.append((ext[0], ext[2], rid[rp[0]], rp[2]))
        else:
            edges.append((rid[rp[0]], rp[2], ext[0], ext[2]))
    return Net(nodes, edges)


def oracle_apply(rns, host: Net) -> set:
    out = set()
    for rule in rns.rules:
        for pre in rule.preforms:
            for phi, b in oracle_matches(pre.left, host):
                out.add(oracle_splice(pre.left, pre.right, host, phi, b))
    return out or {host}


# -- truth tables -------------------------------------------------------------------------

GATES = {
    "and": lambda x, y: x & y,
    "or": lambda x, y: x | y,
    "xor": lambda x, y: x ^ y,
    "not": lambda x: 1 - x,
}


def truth_table_eval(net: Net, inputs: dict) -> dict:
    """Evaluate an acyclic gate net by naive recursion from each output port."""
    incoming = {(v, j): u for u, _, v, j in net.edges}

    def value(v: str) -> int:
        node = net.nodes[v]
        args = [value(incoming[(v, j)]) if (v, j) in incoming else inputs[(v, IN, j)] for j in range(node.n_in)]
        return GATES[node.letter](*args)

    used = {u for u, _, _, _ in net.edges}
    return {(v, OUT, 0): value(v) for v in net.nodes if v not in used}
