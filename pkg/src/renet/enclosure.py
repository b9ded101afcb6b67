"""Enclosures, covers, partitions and overlaps."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .errors import BoundTooSmall, DisconnectedBlock, NotAPartition
from .match import embeddings
from .net import Net


def connected_subsets(t: Net, max_nodes: int, within: Optional[set] = None) -> list[frozenset]:
    """All connected node sets of size <= max_nodes (optionally inside ``within``)."""
    allowed = set(t.nodes) if within is None else set(within)
    seen: set[frozenset] = set()
    frontier = [frozenset([v]) for v in sorted(allowed)]
    seen.update(frontier)
    while frontier:
        nxt = []
        for s in frontier:
            if len(s) >= max_nodes:
                continue
            for v in s:
                for w in t.neighbours(v):
                    if w in allowed and w not in s:
                        u = s | {w}
                        if u not in seen:
                            seen.add(u)
                            nxt.append(u)
        frontier = nxt
    return sorted(seen, key=lambda s: (len(s), sorted(s)))


def connected_sets_containing(t: Net, v: str, allowed: set) -> Iterator[frozenset]:
    seen = {frozenset([v])}
    frontier = list(seen)
    while frontier:
        nxt = []
        for s in frontier:
            yield s
            for x in s:
                for w in t.neighbours(x):
                    if w in allowed and w not in s:
                        u = s | {w}
                        if u not in seen:
                            seen.add(u)
                            nxt.append(u)
        frontier = nxt


def is_connected(t: Net, ids: Iterable[str]) -> bool:
    ids = set(ids)
    if not ids:
        return False
    start = min(ids)
    seen, stack = {start}, [start]
    while stack:
        v = stack.pop()
        for w in t.neighbours(v):
            if w in ids and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == ids


def enclosures(t: Net, max_nodes: int) -> frozenset:
    """Connected node-induced subnets up to ``max_nodes``, boundaries auto-tagged."""
    if max_nodes < 1:
        raise BoundTooSmall(f"bound must be >= 1, got {max_nodes}")
    return frozenset(t.induced(s, tag_boundary=True) for s in connected_subsets(t, max_nodes))


def _all_tagged(s: Net) -> Net:
    tags = {f"_{k}": p for k, p in enumerate(s.unoccupied(include_vars=True))}
    return Net(s.nodes, s.edges, tags, check=False)


def enclosure_embeddings(s: Net, t: Net) -> Iterator[dict]:
    """Induced embeddings of ``s`` into ``t`` (unoccupied ports of ``s`` are free)."""
    pat = _all_tagged(s)
    # variable nodes are ordinary nodes here
    as_ranked = Net(
        {v: n.__class__(n.letter, n.n_in, n.n_out, False) if n.var else n for v, n in pat.nodes.items()},
        pat.edges, pat.tags, check=False,
    )
    host = Net(
        {v: n.__class__(n.letter, n.n_in, n.n_out, False) if n.var else n for v, n in t.nodes.items()},
        t.edges, t.tags, check=False,
    )
    yield from embeddings(as_ranked, host)


def is_enclosure(s: Net, t: Net) -> bool:
    if len(s) == 0:
        return True
    return next(enclosure_embeddings(s, t), None) is not None


# -- covers and partitions ------------------------------------------------------------

@dataclass(frozen=True)
class PartitionSpec:
    blocks: tuple  # tuple of frozensets, sorted

    @staticmethod
    def of(blocks: Iterable[Iterable[str]]) -> "PartitionSpec":
        bs = [frozenset(b) for b in blocks]
        return PartitionSpec(tuple(sorted(bs, key=lambda b: sorted(b))))

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)

    def block_of(self) -> dict[str, int]:
        return {v: k for k, b in enumerate(self.blocks) for v in b}

    def to_text(self) -> str:
        return "|".join(",".join(sorted(b)) for b in self.blocks)

    @staticmethod
    def parse(text: str) -> "PartitionSpec":
        return PartitionSpec.of([x.strip() for x in blk.split(",") if x.strip()] for blk in text.split("|"))


def check_partition(t: Net, blocks: Iterable[Iterable[str]]) -> PartitionSpec:
    """Validate blocks as a partition of ``t`` into connected subnets."""
    bs = [frozenset(b) for b in blocks]
    seen: set = set()
    for b in bs:
        if not b:
            raise NotAPartition("empty block")
        if b & seen:
            raise NotAPartition(f"blocks overlap on {sorted(b & seen)}")
        unknown = b - set(t.nodes)
        if unknown:
            raise NotAPartition(f"unknown nodes {sorted(unknown)}")
        seen |= b
    if seen != set(t.nodes):
        raise NotAPartition(f"uncovered nodes {sorted(set(t.nodes) - seen)}")
    for b in bs:
        if not is_connected(t, b):
            raise DisconnectedBlock(f"block {sorted(b)} is not connected")
    return PartitionSpec.of(bs)


def element_occurrences(t: Net, e: Net) -> list[frozenset]:
    """Node sets of ``t`` occupied by cover element ``e``.

    An element whose node ids all lie in ``t`` is taken at those ids;
    otherwise every induced embedding counts.
    """
    if set(e.nodes) <= set(t.nodes):
        return [frozenset(e.nodes)]
    return sorted({frozenset(phi.values()) for phi in enclosure_embeddings(e, t)}, key=sorted)


def _embeds_at(t: Net, e: Net, ids: frozenset) -> bool:
    if set(e.nodes) == set(ids):
        sub = t.induced(ids)
        return all(sub.nodes[v] == e.nodes[v] for v in ids) and set(sub.edges) == set(e.edges)
    return True


def pi_refinement(t: Net, sets: Sequence[frozenset]) -> PartitionSpec:
    """Common refinement of overlapping node sets, split into connected cells.

    Nodes are grouped by the exact family of sets containing them; nodes
    in no set are left out.
    """
    sig: dict[str, frozenset] = {}
    for v in t.nodes:
        fam = frozenset(k for k, s in enumerate(sets) if v in s)
        if fam:
            sig[v] = fam
    classes: dict[frozenset, set] = {}
    for v, f in sig.items():
        classes.setdefault(f, set()).add(v)
    cells = []
    for members in classes.values():
        sub = t.induced(members)
        cells.extend(frozenset(c) for c in sub.components())
    return PartitionSpec.of(cells)


@dataclass(frozen=True)
class PartitionReport:
    is_cover: bool
    is_saturating: bool
    is_partition: bool
    induced: PartitionSpec

    @property
    def induced_is_partition(self) -> bool:
        nodes = set()
        for b in self.induced:
            if nodes & b:
                return False
            nodes |= b
        return True


def partition_ops(t: Net, A: Iterable[Net]) -> PartitionReport:
    A = list(A)
    occ = [(e, o) for e in A for o in element_occurrences(t, e)]
    sets = [o for _, o in occ]
    covered = set().union(*sets) if sets else set()
    is_cover = covered == set(t.nodes)
    is_sat = is_cover and all(_embeds_at(t, e, o) for e, o in occ) and all(
        element_occurrences(t, e) for e in A
    )
    disjoint = sum(len(s) for s in sets) == len(covered)
    is_part = is_cover and disjoint and all(is_connected(t, s) for s in sets)
    return PartitionReport(is_cover, is_sat, is_part, pi_refinement(t, sets))


def induced_covers_t(t: Net, report: PartitionReport) -> bool:
    """PI(A) restricted to t is a partition of t."""
    got = set()
    for b in report.induced:
        got |= b
    return report.induced_is_partition and got == set(t.nodes)


def all_connected_partitions(t: Net, limit: Optional[int] = None) -> Iterator[PartitionSpec]:
    """Every partition of ``t`` into connected blocks."""
    nodes = set(t.nodes)
    count = [0]

    def rec(remaining: set, acc: list):
        if limit is not None and count[0] >= limit:
            return
        if not remaining:
            count[0] += 1
            yield PartitionSpec.of(acc)
            return
        v = min(remaining)
        for s in connected_sets_containing(t, v, remaining):
            yield from rec(remaining - s, acc + [s])

    yield from rec(nodes, [])


def random_partition(t: Net, rng: random.Random, merge_p: float = 0.5) -> PartitionSpec:
    """A random connected partition: grow blocks by absorbing neighbours."""
    remaining = set(t.nodes)
    blocks = []
    while remaining:
        v = rng.choice(sorted(remaining))
        block = {v}
        remaining.discard(v)
        while True:
            nb = sorted(w for x in block for w in t.neighbours(x) if w in remaining)
            if not nb or rng.random() > merge_p:
                break
            w = rng.choice(nb)
            block.add(w)
            remaining.discard(w)
        blocks.append(frozenset(block))
    return PartitionSpec.of(blocks)


# -- overlaps ------------------------------------------------------------------------

@dataclass(frozen=True)
class Overlap:
    overlap: bool
    shared: Optional[Net]
    truncated: bool = False


def overlaps(p: Net, q: Net, bound: int) -> Overlap:
    """Largest common enclosure of ``p`` and ``q`` up to ``bound`` nodes.

    A negative answer is always exact (any common enclosure contains a common
    single node); ``truncated`` marks a positive answer that hit the bound.
    """
    if bound < 1:
        raise BoundTooSmall(f"bound must be >= 1, got {bound}")
    best = None
    for s in sorted(connected_subsets(p, bound), key=lambda s: (-len(s), sorted(s))):
        sub = p.induced(s, tag_boundary=True)
        if is_enclosure(sub, q):
            best = sub
            break
    if best is None:
        return Overlap(False, None)
    truncated = len(best) == bound and bound < min(len(p), len(q))
    return Overlap(True, best, truncated)
