"""Matching left sides into hosts, substitution, and single-redex splicing.

Matching is node-induced and port-index strict. Ranked pattern nodes map
injectively onto host nodes with equal letters and ranks; every pattern
edge must exist in the host and no extra host edge may join two image
nodes. A pattern port that is unoccupied and untagged demands an unoccupied
host port; a tagged one accepts either. A variable binds the whole host
component hanging off its tie once the redex is removed, or nothing when
the tied host port is free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

from .errors import (
    BoundaryMismatch,
    DirectionMismatch,
    NoFreePortOnImage,
)
from .net import IN, OUT, Net, Node, Port, opposite
from .rules import Preform, var_ties


@dataclass(frozen=True)
class Bound:
    """A variable's image: host node ids plus the host port glued to the redex."""

    nodes: frozenset
    tie: Optional[Port] = None

    @property
    def empty(self) -> bool:
        return not self.nodes


@dataclass(frozen=True)
class Match:
    rule: str
    preform_index: int
    preform: Preform = field(repr=False)
    host: Net = field(repr=False)
    node_map: Mapping[str, str]
    bindings: Mapping[str, Bound]

    @property
    def redex(self) -> frozenset:
        return frozenset(self.node_map.values())

    @property
    def boundary(self) -> dict[str, Port]:
        """Tag name -> host port at the redex."""
        return {t: (self.node_map[p[0]], p[1], p[2]) for t, p in self.preform.left.tags.items()}

    def binding_by_name(self) -> dict[str, Bound]:
        left = self.preform.left
        out = {}
        for vid in sorted(self.bindings):
            out.setdefault(left.nodes[vid].letter, self.bindings[vid])
        return out

    def describe(self) -> dict:
        return {
            "rule": self.rule,
            "preform": self.preform_index,
            "redex": sorted(self.redex),
            "binding": {
                k: {"nodes": sorted(b.nodes), "tie": list(b.tie) if b.tie else None}
                for k, b in sorted(self.binding_by_name().items())
            },
        }

    def key(self):
        return (self.rule, self.preform_index, tuple(sorted(self.node_map.items())))


# -- ranked embedding ------------------------------------------------------------

def _pattern_order(pattern: Net) -> list[str]:
    """Ranked pattern ids in BFS order per component, so most nodes are forced."""
    ranked = set(pattern.ranked_ids())
    order, seen = [], set()
    for root in sorted(ranked):
        if root in seen:
            continue
        queue = [root]
        seen.add(root)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for p in pattern.ports(v):
                q = pattern.link(p)
                if q and q[0] in ranked and q[0] not in seen:
                    seen.add(q[0])
                    queue.append(q[0])
    return order


def embeddings(pattern: Net, host: Net) -> Iterator[dict[str, str]]:
    """All induced, port-strict embeddings of the ranked part of ``pattern``."""
    order = _pattern_order(pattern)
    if not order:
        return
    ranked = set(order)
    tagged = set(pattern.tags.values())
    by_node: dict[Node, list[str]] = {}
    for h, node in host.nodes.items():
        by_node.setdefault(node, []).append(h)
    for lst in by_node.values():
        lst.sort()
    n_internal = sum(1 for u, _, v, _ in pattern.edges if u in ranked and v in ranked)

    # for each pattern node, a pre-mapped neighbour that forces its image
    forced: dict[str, tuple[Port, Port]] = {}
    placed = set()
    for v in order:
        for p in pattern.ports(v):
            q = pattern.link(p)
            if q and q[0] in placed:
                forced[v] = (q, p)  # q on a placed node links to p on v
                break
        placed.add(v)

    def ok(pv: str, hv: str, phi: dict, used: set) -> bool:
        if hv in used or host.nodes[hv] != pattern.nodes[pv]:
            return False
        for p in pattern.ports(pv):
            hp = (hv, p[1], p[2])
            q = pattern.link(p)
            hq = host.link(hp)
            if q is None:
                if hq is not None and p not in tagged:
                    return False
            elif q[0] in ranked:
                if hq is None or hq[1:] != q[1:]:
                    return False
                if q[0] in phi and phi[q[0]] != hq[0]:
                    return False
        return True

    def rec(k: int, phi: dict, used: set):
        if k == len(order):
            image = set(phi.values())
            count = sum(1 for u, _, v, _ in host.edges if u in image and v in image)
            if count == n_internal:
                yield dict(phi)
            return
        pv = order[k]
        if pv in forced:
            q, p = forced[pv]
            hq = host.link((phi[q[0]], q[1], q[2]))
            cands = [hq[0]] if hq is not None and hq[1:] == p[1:] else []
        else:
            cands = by_node.get(pattern.nodes[pv], [])
        for hv in cands:
            if ok(pv, hv, phi, used):
                phi[pv] = hv
                used.add(hv)
                yield from rec(k + 1, phi, used)
                del phi[pv]
                used.discard(hv)

    yield from rec(0, {}, set())


def _component_outside(host: Net, start: str, image: set) -> set:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in host.neighbours(v):
            if w not in image and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def binding_key(host: Net, b: Bound):
    if b.empty:
        return None
    sub = host.induced(b.nodes)
    return sub.replace(tags={"tie": b.tie}).tagged_key


def preform_matches(
    pre: Preform, host: Net, rule_name: str = "", index: int = 0
) -> Iterator[Match]:
    left = pre.left
    ties = {v: var_ties(left, v)[0] for v in left.var_ids()}
    for phi in embeddings(left, host):
        image = set(phi.values())
        bindings: dict[str, Bound] = {}
        good = True
        for vid, (lp, _vdir) in sorted(ties.items()):
            hp = (phi[lp[0]], lp[1], lp[2])
            hq = host.link(hp)
            if hq is None:
                bindings[vid] = Bound(frozenset())
                continue
            comp = _component_outside(host, hq[0], image)
            # outside loop: the bound subnet may touch the redex only via its tie
            touching = sum(
                1
                for u, _, v, _ in host.edges
                if (u in comp and v in image) or (v in comp and u in image)
            )
            if touching != 1:
                good = False
                break
            bindings[vid] = Bound(frozenset(comp), hq)
        if not good:
            continue
        # repeated variable names must bind equal subnets
        by_name: dict[str, object] = {}
        for vid, b in bindings.items():
            name = left.nodes[vid].letter
            k = binding_key(host, b)
            if name in by_name and by_name[name] != k:
                good = False
                break
            by_name[name] = k
        if good:
            yield Match(rule_name, index, pre, host, dict(phi), bindings)


# -- splicing ------------------------------------------------------------------------

def _fresh_id(base: str, used: set) -> str:
    nid = base
    k = 1
    while nid in used:
        nid = f"{base}~{k}"
        k += 1
    used.add(nid)
    return nid


def splice(m: Match) -> Net:
    """Replace the match's redex by the right side (variables re-attached)."""
    host, pre = m.host, m.preform
    left, right = pre.left, pre.right
    removed = set(m.redex)
    for b in m.bindings.values():
        removed |= b.nodes
    keep = [v for v in host.nodes if v not in removed]
    keep_set = set(keep)
    nodes = {v: host.nodes[v] for v in keep}
    edges = [e for e in host.edges if e[0] in keep_set and e[2] in keep_set]
    tags = {t: p for t, p in host.tags.items() if p[0] in keep_set}
    used = set(host.nodes)

    anchor = min(m.redex)
    rmap = {}
    for rn in right.ranked_ids():
        rmap[rn] = _fresh_id(f"{rn}@{anchor}", used)
        nodes[rmap[rn]] = right.nodes[rn]
    for u, i, v, j in right.edges:
        if u in rmap and v in rmap:
            edges.append((rmap[u], i, rmap[v], j))

    # variables, lexicographic by name then node id
    names = m.binding_by_name()
    occurrences: dict[str, int] = {}
    for rv in sorted(right.var_ids(), key=lambda v: (right.nodes[v].letter, v)):
        name = right.nodes[rv].letter
        (rp, vdir), = var_ties(right, rv)
        b = names[name]
        if b.empty:
            continue
        if b.tie[1] != vdir:
            raise DirectionMismatch(
                f"variable {name!r}: bound subnet ties by an {b.tie[1]}-port, right side needs {vdir}"
            )
        k = occurrences.get(name, 0)
        occurrences[name] = k + 1
        if k == 0:
            cmap = {v: v for v in b.nodes}
            for t, p in host.tags.items():
                if p[0] in b.nodes:
                    tags[t] = p
        else:
            cmap = {v: _fresh_id(f"{v}#{k}", used) for v in sorted(b.nodes)}
        for v in b.nodes:
            nodes[cmap[v]] = host.nodes[v]
        for u, i, v, j in host.edges:
            if u in b.nodes and v in b.nodes:
                edges.append((cmap[u], i, cmap[v], j))
        tie = (cmap[b.tie[0]], b.tie[1], b.tie[2])
        target = (rmap[rp[0]], rp[1], rp[2])
        edges.append(_edge(tie, target))

    for t, rq in right.tags.items():
        if t in left.tags:
            lp = left.tags[t]
            if lp[1] != rq[1]:
                raise BoundaryMismatch(f"tag {t!r} is an {lp[1]}-port on the left, {rq[1]} on the right")
        elif t not in pre.new_tags:
            raise BoundaryMismatch(f"right side demands tag {t!r} absent from the match")
        if rq[0] not in rmap:
            raise BoundaryMismatch(f"tag {t!r} sits on a variable node")
    for t, lp in left.tags.items():
        if t not in right.tags:
            continue  # the external edge is dropped
        rq = right.tags[t]
        hp = (m.node_map[lp[0]], lp[1], lp[2])
        target = (rmap[rq[0]], rq[1], rq[2])
        ext = host.link(hp)
        if ext is not None:
            edges.append(_edge(ext, target))
        elif hp in host.tag_at:
            tags[host.tag_at[hp]] = target
    return Net(nodes, edges, tags, name=host.name, check=False)


def _edge(a: Port, b: Port):
    if a[1] == OUT:
        return (a[0], a[2], b[0], b[2])
    return (b[0], b[2], a[0], a[2])


# -- substitution ----------------------------------------------------------------------

def apply_substitution(binding: Mapping[str, object], s: Net) -> Net:
    """Replace each variable node of ``s`` by its image.

    Images are ``None`` (delete the variable, leaving its port unoccupied),
    a Net (glued at its first unoccupied port of the needed direction), or
    ``(Net, port)`` to name the glue port. Variables without an entry stay.
    """
    nodes = dict(s.nodes)
    edges = set(s.edges)
    tags = dict(s.tags)
    for vid in s.var_ids():
        name = s.nodes[vid].letter
        if name not in binding:
            continue
        image = binding[name]
        ties = var_ties(s, vid)
        del nodes[vid]
        edges = {e for e in edges if e[0] != vid and e[2] != vid}
        if image is None or (isinstance(image, Net) and len(image) == 0):
            continue
        net, port = image if isinstance(image, tuple) else (image, None)
        if not ties:
            raise DirectionMismatch(f"variable node {vid!r} has no tie")
        (rp, vdir), = ties
        if port is None:
            free = [p for p in net.unoccupied() if p[1] == vdir]
            if not free:
                raise NoFreePortOnImage(f"image of {name!r} has no unoccupied {vdir}-port")
            port = free[0]
        port = tuple(port)
        if port[1] != vdir:
            raise DirectionMismatch(f"image port {port} of {name!r} must be an {vdir}-port")
        if net.link(port) is not None:
            raise NoFreePortOnImage(f"image port {port} of {name!r} is occupied")
        pre = f"{vid}/"
        for v, node in net.nodes.items():
            nodes[pre + v] = node
        for u, i, v, j in net.edges:
            edges.add((pre + u, i, pre + v, j))
        for t, p in net.tags.items():
            if t not in tags and p != port:
                tags[t] = (pre + p[0], p[1], p[2])
        edges.add(_edge((pre + port[0], port[1], port[2]), rp))
    return Net(nodes, edges, tags, name=s.name)


def is_instance(t: Net, s: Net, bound: int) -> Optional[dict[str, Net]]:
    """A binding (images of at most ``bound`` nodes) with ``t = f(s)``, or None."""
    pattern = s.without_tags()
    vars_ = s.var_ids()
    if not pattern.ranked_ids():
        return None
    pre = Preform(pattern, pattern)
    for m in preform_matches(pre, t):
        covered = set(m.redex)
        ok = True
        for b in m.bindings.values():
            if len(b.nodes) > bound:
                ok = False
            covered |= b.nodes
        if ok and covered == set(t.nodes):
            out = {}
            for name, b in m.binding_by_name().items():
                out[name] = t.induced(b.nodes) if not b.empty else Net({})
            if vars_ or covered:
                return out
    return None
