"""Canonical labeling of small port-graphs.

Colour refinement followed by individualisation of the first non-singleton
cell; the lexicographically least encoding over all leaves is the key.
Connected components are keyed separately and sorted, so nets made of many
identical components stay cheap.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Hashable, Iterable, Sequence

# (src, out-index, dst, in-index)
Edge = tuple[str, int, str, int]


def _refine(nodes: Sequence[str], colour: dict[str, int], adj, ports: bool) -> dict[str, int]:
    while True:
        sigs = {}
        for v in nodes:
            if ports:
                nb = tuple(sorted((d, i, colour[w], j) for d, i, w, j in adj[v]))
            else:
                nb = tuple(sorted((d, colour[w]) for d, i, w, j in adj[v]))
            sigs[v] = (colour[v], nb)
        ranks = {s: k for k, s in enumerate(sorted(set(sigs.values())))}
        new = {v: ranks[sigs[v]] for v in nodes}
        if len(ranks) == len(set(colour[v] for v in nodes)):
            return new
        colour = new


def _encode(order: Sequence[str], base: dict[str, Hashable], edges: Iterable[Edge], ports: bool):
    pos = {v: k for k, v in enumerate(order)}
    if ports:
        es = tuple(sorted((pos[u], i, pos[v], j) for u, i, v, j in edges))
    else:
        es = tuple(sorted((pos[u], pos[v]) for u, i, v, j in edges))
    return (tuple(base[v] for v in order), es)


def _component_canon(nodes, base, edges, ports):
    adj = defaultdict(list)
    for u, i, v, j in edges:
        adj[u].append((1, i, v, j))
        adj[v].append((0, j, u, i))
    init = {c: k for k, c in enumerate(sorted({base[v] for v in nodes}))}
    colour = _refine(nodes, {v: init[base[v]] for v in nodes}, adj, ports)

    best: list = [None, None]

    def search(colour):
        cells = defaultdict(list)
        for v in nodes:
            cells[colour[v]].append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = c
                break
        if target is None:
            order = sorted(nodes, key=lambda v: colour[v])
            key = _encode(order, base, edges, ports)
            if best[0] is None or key < best[0]:
                best[0], best[1] = key, order
            return
        for v in sorted(cells[target]):
            # individualise v: it keeps colour 2c, the rest of the cell gets 2c+1
            ind = {w: 2 * colour[w] + (1 if colour[w] == target and w != v else 0) for w in nodes}
            if colour[v] == target:
                ind[v] = 2 * target
            search(_refine(nodes, ind, adj, ports))

    search(colour)
    return best[0], best[1]


def components(nodes: Iterable[str], edges: Iterable[Edge]) -> list[list[str]]:
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, _, v, _ in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    groups = defaultdict(list)
    for v in parent:
        groups[find(v)].append(v)
    return [sorted(g) for g in groups.values()]


def canonical_form(base: dict[str, Hashable], edges: Iterable[Edge], ports: bool = True):
    """Return ``(key, order)`` for the graph.

    ``base`` maps node ids to comparable initial colours; ``order`` lists node
    ids in canonical position order so equal keys give an isomorphism by
    zipping orders. With ``ports=False`` port indices are forgotten.
    """
    edges = list(edges)
    comps = components(base, edges)
    by_node = {}
    for k, comp in enumerate(comps):
        for v in comp:
            by_node[v] = k
    comp_edges = defaultdict(list)
    for e in edges:
        comp_edges[by_node[e[0]]].append(e)
    keyed = []
    for k, comp in enumerate(comps):
        key, order = _component_canon(comp, base, comp_edges[k], ports)
        keyed.append((key, order))
    keyed.sort(key=lambda kv: kv[0])
    return tuple(k for k, _ in keyed), [v for _, order in keyed for v in order]
