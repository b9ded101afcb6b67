"""Partition rewriting systems, concepts, and the abstraction relation.

A partition RNS (PRNS) contracts each block of a partition into a single
node carrying a letter outside the substance; every block boundary port
becomes a tag, so each rule is arity- and manoeuvre-mightiness saving by
construction. Two nets are abstract sisters when some common origin
contracts onto both.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .canon import canonical_form
from .enclosure import (
    PartitionSpec,
    check_partition,
    connected_sets_containing,
    is_enclosure,
    overlaps,
)
from .errors import (
    BudgetExhausted,
    InputError,
    NonTerminatingColouring,
    NotSisters,
    SearchExhausted,
)
from .net import IN, OUT, FreshLetters as LetterSource, Net, Node, Port, delta_d
from .rewrite import as_jungle, normal_forms, ordered
from .rules import FreshLetters, Preform, Rns, Rule, as_rns, invert_rns
from .typology import arity_mightiness_saving, fron, manoeuvre_mightiness_saving


# -- block patterns and contraction -------------------------------------------------------

def block_pattern(t: Net, block: Iterable[str]) -> tuple[Net, dict[Port, str]]:
    """Induced subnet of ``block`` with every unoccupied ranked port tagged.

    Tag names follow the block's canonical node order (``i<k>.<j>`` for in
    port j of the k-th node, ``o<k>.<j>`` for out ports), so isomorphic
    blocks receive identical tag layouts. Returns the pattern and a map from
    ``t``'s ports to tag names.
    """
    sub = t.induced(block)
    pos = {v: k for k, v in enumerate(sub.canonical_order)}
    names: dict[Port, str] = {}
    for p in sub.unoccupied():
        names[p] = f"{'i' if p[1] == IN else 'o'}{pos[p[0]]}.{p[2]}"
    pattern = Net(sub.nodes, sub.edges, {n: p for p, n in names.items()}, check=False)
    return pattern, names


def _tag_order(name: str) -> tuple[int, int]:
    k, j = name[1:].split(".")
    return (int(k), int(j))


def fresh_node_side(pattern: Net, letter: str, nid: str = "w") -> Net:
    """Single node whose ports are exactly the pattern's tags, sorted per direction."""
    ins = sorted((t for t, p in pattern.tags.items() if p[1] == IN), key=_tag_order)
    outs = sorted((t for t, p in pattern.tags.items() if p[1] == OUT), key=_tag_order)
    tags = {t: (nid, IN, k) for k, t in enumerate(ins)}
    tags.update({t: (nid, OUT, k) for k, t in enumerate(outs)})
    return Net({nid: Node(letter, len(ins), len(outs))}, (), tags, check=False)


@dataclass(frozen=True)
class Contraction:
    net: Net
    block_node: tuple  # concept node id per block index
    port_map: dict  # substance port -> concept port
    letters: tuple  # letter per block index


def contract(t: Net, blocks: Sequence[Iterable[str]], letter_of_block: Sequence[str]) -> Contraction:
    """Contract each block to one node (ids ``b0``, ``b1``, ...) directly."""
    nodes, edges, tags, port_map = {}, [], {}, {}
    ids = []
    for k, (b, letter) in enumerate(zip(blocks, letter_of_block)):
        pattern, names = block_pattern(t, b)
        side = fresh_node_side(pattern, letter, f"b{k}")
        nid = f"b{k}"
        ids.append(nid)
        nodes[nid] = side.nodes[nid]
        for p, name in names.items():
            port_map[p] = side.tags[name]
    for u, i, v, j in t.edges:
        a, c = port_map.get((u, OUT, i)), port_map.get((v, IN, j))
        if a is not None and c is not None:
            edges.append((a[0], a[2], c[0], c[2]))
    for name, p in t.tags.items():
        if p in port_map:
            tags[name] = port_map[p]
    return Contraction(Net(nodes, edges, tags, name=t.name), tuple(ids), port_map, tuple(letter_of_block))


@dataclass(frozen=True)
class Prns:
    """A validated partition RNS plus the blocks it was synthesized from."""

    rns: Rns
    block_map: dict = field(default_factory=dict)  # rule name -> (pattern, letter)
    partition: Optional[PartitionSpec] = None
    block_rule: tuple = ()  # rule name per partition block

    @property
    def name(self) -> str:
        return self.rns.name

    def letters(self) -> frozenset:
        return frozenset(letter for _, letter in self.block_map.values())

    def inverse(self) -> Rns:
        return invert_rns(self.rns)


def synthesize_prns(
    c: Net,
    blocks,
    fresh: Optional[LetterSource] = None,
    name: str = "W",
) -> Prns:
    """One contraction rule per isomorphism class of blocks."""
    spec = check_partition(c, blocks)
    fresh = fresh or LetterSource()
    avoid = set(c.letters())
    rules, block_map, per_block = [], {}, []
    by_key: dict = {}
    for b in spec:
        pattern, _ = block_pattern(c, b)
        key = pattern.tagged_key
        if key not in by_key:
            letter = fresh.mint(avoid)
            avoid.add(letter)
            rname = f"{name}.{len(by_key)}"
            by_key[key] = rname
            block_map[rname] = (pattern, letter)
            rules.append(Rule(rname, (Preform(pattern, fresh_node_side(pattern, letter)),)))
        per_block.append(by_key[key])
    rns = Rns(name, tuple(rules), (FreshLetters(),))
    return Prns(rns, block_map, spec, tuple(per_block))


def prns_contraction(c: Net, w: Prns) -> Contraction:
    letters = [w.block_map[r][1] for r in w.block_rule]
    return contract(c, list(w.partition), letters)


# -- concepts -------------------------------------------------------------------------------

def _rns(w) -> Rns:
    return w.rns if isinstance(w, Prns) else as_rns(w)


def concept_budget(w, c) -> int:
    n = max((len(x) for x in as_jungle(c)), default=0)
    return max(1, len(_rns(w).rules) * max(n, 1))


def concept(c, w, budget: Optional[int] = None) -> frozenset:
    j = as_jungle(c)
    if not j:
        return frozenset()
    return normal_forms(_rns(w), j, budget if budget is not None else concept_budget(w, j))


def roundtrip(c, w, budget: Optional[int] = None) -> frozenset:
    mid = concept(c, w, budget)
    if not mid:
        return frozenset()
    inv = invert_rns(_rns(w))
    b = budget if budget is not None else max(1, len(inv.rules) * max(len(x) for x in as_jungle(c)))
    return normal_forms(inv, mid, b)


# -- validation ---------------------------------------------------------------------------------

KINDS = ("PRNS", "GPRNS", "CRNS", "GCRNS", "GCdRNS")


@dataclass
class ValidationReport:
    kind: str
    checks: dict = field(default_factory=dict)  # condition -> list of failing rule names

    def fail(self, cond: str, who: str) -> None:
        self.checks.setdefault(cond, [])
        if who not in self.checks[cond]:
            self.checks[cond].append(who)

    def pass_(self, cond: str) -> None:
        self.checks.setdefault(cond, [])

    @property
    def ok(self) -> bool:
        return all(not v for v in self.checks.values())

    def failing(self) -> dict:
        return {k: v for k, v in self.checks.items() if v}


def validate_rns_type(
    r,
    kind: str,
    subject,
    search_bound: int = 8,
    witness_host: Optional[Net] = None,
) -> ValidationReport:
    """Check the defining conditions of a PRNS / CRNS family member."""
    if kind not in KINDS:
        raise InputError(f"unknown kind {kind!r}; expected one of {KINDS}")
    rns = _rns(r)
    subject = as_jungle(subject)
    sub_letters = frozenset().union(*(s.letters() for s in subject)) if subject else frozenset()
    general = kind in ("GPRNS", "GCRNS", "GCdRNS")
    partition_like = kind in ("PRNS", "GPRNS")
    rep = ValidationReport(kind)
    for cond in ("i", "ii", "iii", "iv", "v") if not partition_like else ("i", "ii", "iii"):
        rep.pass_(cond)
    seen_left: dict = {}
    rights: dict = {}
    for rule_, k, p in rns.preforms():
        who = f"{rule_.name}#{k}"
        # (i) mightiness conditions
        if general:
            if fron(p.left) - fron(p.right):
                rep.fail("i", who)
        elif not manoeuvre_mightiness_saving(p):
            rep.fail("i", who)
        if not arity_mightiness_saving(p):
            rep.fail("i", who)
        right_letters = p.right.letters()
        if partition_like:
            # (ii) exactly one non-arity letter on the right, outside the substance
            if len(right_letters) != 1 or right_letters & sub_letters:
                rep.fail("ii", who)
            if not general and len(p.right.components()) > 1:
                rep.fail("ii", who)
        else:
            if right_letters & sub_letters:
                rep.fail("ii", who)
            if not general and len(p.right.components()) != 1:
                rep.fail("v", who)
        # injectivity, read as: equal left sides have equal right sides
        lk = p.left.tagged_key
        if lk in seen_left and seen_left[lk] != p.right.tagged_key:
            rep.fail("ii" if partition_like else "iv", who)
        seen_left.setdefault(lk, p.right.tagged_key)
        rights.setdefault(p.right.tagged_key, []).append(who)
    if not rns.has(FreshLetters):
        rep.fail("iii", "conditions")
    if not partition_like:
        host = witness_host
        if host is None:
            host = _search_witness_host(rns, subject, search_bound)
        if host is None:
            rep.fail("iii", "witness-host")
        else:
            from .rewrite import find_matches

            if not all(is_enclosure(s, host) for s in subject):
                rep.fail("iii", "witness-host")
            for rule_, k, p in rns.preforms():
                single = Rns("probe", (Rule(rule_.name, (p,)),))
                if not find_matches(single, [host]):
                    rep.fail("iii", f"{rule_.name}#{k}")
    if kind == "GCdRNS":
        rep.pass_("distinct-right")
        for key, whos in rights.items():
            if len(whos) > 1:
                for w in whos:
                    rep.fail("distinct-right", w)
    return rep


def _search_witness_host(rns: Rns, subject: frozenset, bound: int) -> Optional[Net]:
    """A host containing the subject in which every preform has a redex."""
    from .net import disjoint_union
    from .rewrite import find_matches

    candidates = list(ordered(subject))
    lefts = [p.left for _, _, p in rns.preforms()]
    candidates.append(disjoint_union(list(ordered(subject)) + [_ground_left(l) for l in lefts]))
    for host in candidates:
        if len(host) > max(bound, max((len(s) for s in subject), default=0)) and host is not candidates[0]:
            continue
        if all(
            find_matches(Rns("probe", (Rule(r.name, (p,)),)), [host]) for r, _, p in rns.preforms()
        ):
            return host
    return None


def _ground_left(left: Net) -> Net:
    """A left side with its variables dropped (their ports left free)."""
    keep = left.ranked_ids()
    return left.induced(keep)


# -- characterization --------------------------------------------------------------------------

def _port_counts(net: Net, nid: str, split: bool):
    node = net.nodes[nid]
    loops = sum(1 for u, _, v, _ in net.edges if u == nid and v == nid)
    n_in, n_out = node.n_in - loops, node.n_out - loops
    return (n_in, n_out) if split else n_in + n_out


def _block_count(t: Net, block: frozenset, split: bool):
    n_in = n_out = 0
    for v in block:
        if t.nodes[v].var:
            continue
        for p in t.ports(v):
            q = t.link(p)
            if q is None or q[0] not in block:
                if p[1] == IN:
                    n_in += 1
                else:
                    n_out += 1
    return (n_in, n_out) if split else n_in + n_out


def count_matching_partitions(
    a: Net, b: Net, split: bool = False, max_nodes: int = 12
) -> Iterator[PartitionSpec]:
    """Connected partitions of ``a`` whose block boundary counts match ``b``'s node port counts."""
    if len(a) > max_nodes:
        raise SearchExhausted(f"net has {len(a)} nodes; exhaustive partition bound is {max_nodes}")
    target = Counter(_port_counts(b, v, split) for v in b.nodes)
    if sum(target.values()) == 0:
        return

    def rec(remaining: set, need: Counter, acc: list):
        if not remaining:
            if not +need:
                yield PartitionSpec.of(acc)
            return
        if sum(need.values()) == 0:
            return
        v = min(remaining)
        for s in connected_sets_containing(a, v, remaining):
            c = _block_count(a, s, split)
            if need[c] > 0:
                need[c] -= 1
                yield from rec(remaining - s, need, acc + [s])
                need[c] += 1

    yield from rec(set(a.nodes), Counter(target), [])


@dataclass(frozen=True)
class Characterization:
    holds: bool
    partition: Optional[PartitionSpec] = None
    reason: str = ""

    def __bool__(self):
        return self.holds


def characterization_check(a: Net, b: Net, split: bool = False, max_nodes: int = 12) -> Characterization:
    shared = a.letters() & b.letters()
    if shared:
        return Characterization(False, None, f"shared letters {sorted(shared)}")
    for p in count_matching_partitions(a, b, split, max_nodes):
        return Characterization(True, p, "count-matching partition found")
    return Characterization(False, None, "no block arrangement matches the port counts")


def abstract_sisters(a, b, mode: str = "total") -> bool:
    da, db = delta_d(as_jungle(a)), delta_d(as_jungle(b))
    if mode == "total":
        return da.total == db.total
    if mode == "split":
        return (da.n_in, da.n_out) == (db.n_in, db.n_out)
    raise InputError(f"unknown sister mode {mode!r}")


# -- concept search between a substance and a target ---------------------------------------------

def _quotient_graph(t: Net, blocks: Sequence[frozenset]):
    """Block-level multigraph: base = boundary (in, out) counts; crossing edges."""
    owner = {v: k for k, b in enumerate(blocks) for v in b}
    base = {f"q{k}": _block_count(t, b, True) for k, b in enumerate(blocks)}
    edges = [(f"q{owner[u]}", i, f"q{owner[v]}", j) for u, i, v, j in t.edges if owner[u] != owner[v]]
    return base, edges


def _loopless_graph(x: Net):
    base = {v: _port_counts(x, v, True) for v in x.nodes}
    edges = [e for e in x.edges if e[0] != e[2]]
    return base, edges


def _multigraph_isos(base_a, edges_a, base_b, edges_b, limit: int = 64) -> Iterator[dict]:
    if len(base_a) != len(base_b) or len(edges_a) != len(edges_b):
        return
    if sorted(base_a.values()) != sorted(base_b.values()):
        return
    ka = canonical_form(base_a, edges_a, ports=False)[0]
    kb = canonical_form(base_b, edges_b, ports=False)[0]
    if ka != kb:
        return
    mult_a = Counter((u, v) for u, _, v, _ in edges_a)
    mult_b = Counter((u, v) for u, _, v, _ in edges_b)
    na = sorted(base_a)
    count = [0]

    def rec(k, phi, used):
        if count[0] >= limit:
            return
        if k == len(na):
            count[0] += 1
            yield dict(phi)
            return
        u = na[k]
        for w in sorted(base_b):
            if w in used or base_b[w] != base_a[u]:
                continue
            good = True
            for x, y in list(phi.items()) + [(u, w)]:
                if mult_a[(u, x)] != mult_b[(w, y)] or mult_a[(x, u)] != mult_b[(y, w)]:
                    good = False
                    break
            if good:
                phi[u] = w
                used.add(w)
                yield from rec(k + 1, phi, used)
                del phi[u]
                used.discard(w)

    yield from rec(0, {}, set())


def _rules_for_iso(c: Net, blocks: Sequence[frozenset], x: Net, iso: dict, name: str) -> Optional[Rns]:
    """Contraction rules block -> node of x, pairing ports along the isomorphism."""
    owner = {v: k for k, b in enumerate(blocks) for v in b}
    pats = [block_pattern(c, b) for b in blocks]
    # external ports of each block, grouped by the block on the other side
    pairing: dict[Port, Port] = {}
    groups_c: dict = {}
    for u, i, v, j in sorted(c.edges):
        ku, kv = owner[u], owner[v]
        if ku != kv:
            groups_c.setdefault((ku, kv), []).append(((u, OUT, i), (v, IN, j)))
    groups_x: dict = {}
    for u, i, v, j in sorted(x.edges):
        if u != v:
            groups_x.setdefault((u, v), []).append(((u, OUT, i), (v, IN, j)))
    for (ku, kv), lst in groups_c.items():
        xs = groups_x.get((iso[f"q{ku}"], iso[f"q{kv}"]), [])
        if len(xs) != len(lst):
            return None
        for (pa, pb), (xa, xb) in zip(lst, xs):
            pairing[pa] = xa
            pairing[pb] = xb
    for k, b in enumerate(blocks):
        y = iso[f"q{k}"]
        free_c = sorted(p for p in pats[k][1] if c.link(p) is None)
        free_x = [p for p in x.ports(y) if x.link(p) is None]
        for d in (IN, OUT):
            fc = [p for p in free_c if p[1] == d]
            fx = [p for p in free_x if p[1] == d]
            if len(fc) != len(fx):
                return None
            pairing.update(zip(fc, fx))
    rules, seen = [], {}
    for k, b in enumerate(blocks):
        y = iso[f"q{k}"]
        pattern, names = pats[k]
        right_tags = {}
        for p, tname in names.items():
            xp = pairing[p]
            right_tags[tname] = ("y", xp[1], xp[2])
        loops = [(u, i, v, j) for u, i, v, j in x.edges if u == y and v == y]
        right = Net({"y": x.nodes[y]}, [("y", i, "y", j) for _, i, _, j in loops], right_tags, check=False)
        key = pattern.tagged_key
        if key in seen:
            if seen[key] != right.tagged_key:
                return None
            continue
        seen[key] = right.tagged_key
        rules.append(Rule(f"{name}.{len(rules)}", (Preform(pattern, right),)))
    return Rns(name, tuple(rules), (FreshLetters(),))


@dataclass(frozen=True)
class ConceptWitness:
    partition: PartitionSpec
    rns: Rns


def concept_witnesses(
    c: Net, x: Net, name: str = "W", max_partitions: int = 5000, verify: bool = True
) -> Iterator[ConceptWitness]:
    """PRNSes of ``c`` whose concept is exactly ``{x}``."""
    if c.letters() & x.letters():
        return
    xb, xe = _loopless_graph(x)
    tried = 0
    for P in count_matching_partitions(c, x, split=True):
        tried += 1
        if tried > max_partitions:
            raise SearchExhausted(f"more than {max_partitions} candidate partitions")
        qb, qe = _quotient_graph(c, list(P))
        for iso in _multigraph_isos(qb, qe, xb, xe):
            rns = _rules_for_iso(c, list(P), x, iso, name)
            if rns is None:
                continue
            if verify:
                try:
                    got = concept(c, rns)
                except BudgetExhausted:
                    continue
                if got != frozenset([x]):
                    continue
            yield ConceptWitness(P, rns)
            break


def is_concept_of(c: Net, x: Net, name: str = "W") -> Optional[ConceptWitness]:
    return next(concept_witnesses(c, x, name), None)


# -- common origins ------------------------------------------------------------------------------

@dataclass(frozen=True)
class OriginWitness:
    origin: Net
    w_a: Rns
    w_b: Rns
    partition_a: PartitionSpec
    partition_b: PartitionSpec

    def summary(self) -> dict:
        d = delta_d(self.origin)
        return {
            "origin_nodes": len(self.origin),
            "delta_d": d.total,
            "split": [d.n_in, d.n_out],
            "partition_a": self.partition_a.to_text(),
            "partition_b": self.partition_b.to_text(),
        }


@dataclass(frozen=True)
class Exhausted:
    """The bounded origin search ended without a witness. Not a refutation."""

    reason: str
    candidates: int = 0

    def __bool__(self):
        return False


def relabel_fresh(t: Net, prefix: str = "$o") -> Net:
    """Same structure, every ranked node gets its own fresh letter."""
    nodes = {}
    for k, v in enumerate(t.canonical_order):
        n = t.nodes[v]
        nodes[v] = n if n.var else Node(f"{prefix}{k}", n.n_in, n.n_out)
    return Net(nodes, t.edges, t.tags, name=t.name, check=False)


def _structure_key(t: Net):
    base = {v: (n.n_in, n.n_out) for v, n in t.nodes.items()}
    return canonical_form(base, t.edges, ports=False)[0]


def node_splits(t: Net) -> Iterator[Net]:
    """Refinements of ``t`` by splitting one node in two joined by a new edge.

    The halves share the original ports between them (each keeps at least
    one port besides the new edge) and the new edge runs from the first half
    to the second.
    """
    for v in sorted(t.nodes):
        node = t.nodes[v]
        if node.var:
            continue
        ports = list(t.ports(v))
        for mask in range(1, 2 ** len(ports) - 1):
            first = [p for k, p in enumerate(ports) if mask >> k & 1]
            second = [p for k, p in enumerate(ports) if not mask >> k & 1]
            v1, v2 = f"{v}a", f"{v}b"
            remap: dict[Port, Port] = {}
            counts = {v1: {IN: 0, OUT: 0}, v2: {IN: 0, OUT: 0}}
            for half, lst in ((v1, first), (v2, second)):
                for p in lst:
                    remap[p] = (half, p[1], counts[half][p[1]])
                    counts[half][p[1]] += 1
            # the joining edge
            link_out = (v1, OUT, counts[v1][OUT])
            counts[v1][OUT] += 1
            link_in = (v2, IN, counts[v2][IN])
            counts[v2][IN] += 1
            nodes = {w: n for w, n in t.nodes.items() if w != v}
            nodes[v1] = Node("$s", counts[v1][IN], counts[v1][OUT])
            nodes[v2] = Node("$s", counts[v2][IN], counts[v2][OUT])

            def mp(p):
                return remap.get(p, p)

            edges = []
            for u, i, w, j in t.edges:
                a, b = mp((u, OUT, i)), mp((w, IN, j))
                edges.append((a[0], a[2], b[0], b[2]))
            edges.append((link_out[0], link_out[2], link_in[0], link_in[2]))
            tags = {name: mp(p) for name, p in t.tags.items()}
            yield Net(nodes, edges, tags, check=False)


def refinement_universe(t: Net, max_nodes: int, cap: Optional[int] = None) -> list[Net]:
    """Fresh-lettered nets that contract onto ``t`` by node splits, up to ``max_nodes``."""
    start = relabel_fresh(t)
    seen = {_structure_key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for n in frontier:
            if len(n) >= max_nodes:
                continue
            for m in node_splits(n):
                k = _structure_key(m)
                if k not in seen:
                    seen[k] = m
                    nxt.append(m)
                    if cap is not None and len(seen) > cap:
                        raise SearchExhausted(f"refinement universe exceeds {cap} nets", list(seen.values()))
        frontier = nxt
    return sorted((relabel_fresh(n) for n in seen.values()), key=_origin_order)


def _origin_order(n: Net):
    return (len(n), len(n.edges), _structure_key(n))


def search_common_origin(
    a: Net, b: Net, max_origin_nodes: int = 4, cap: int = 4000
) -> OriginWitness | Exhausted:
    """Bounded search for a common origin of ``a`` and ``b``.

    Requires equal unoccupied-port splits (else NotSisters). Two single
    nodes get the closed form: one fresh node carrying the shared split.
    Otherwise candidates are fresh-lettered refinements of either side,
    tried in order of node count, edge count, then canonical key.
    """
    if not abstract_sisters(a, b, "split"):
        da, db = delta_d(a), delta_d(b)
        raise NotSisters(f"unoccupied ports differ: {tuple(da)} vs {tuple(db)}")
    if len(a) == 1 and len(b) == 1:
        d = delta_d(a)
        origin = Net({"c": Node("$o0", d.n_in, d.n_out)}, name="origin")
        wa, wb = is_concept_of(origin, a, "Wa"), is_concept_of(origin, b, "Wb")
        if wa and wb:
            return OriginWitness(origin, wa.rns, wb.rns, wa.partition, wb.partition)
        return Exhausted("closed form did not verify", 1)
    pool: dict = {}
    try:
        for side in (a, b):
            for n in refinement_universe(side, max_origin_nodes, cap):
                if len(n) <= max_origin_nodes:
                    pool.setdefault(_structure_key(n), n)
    except SearchExhausted as e:
        return Exhausted(str(e), len(pool))
    tried = 0
    for c in sorted(pool.values(), key=_origin_order):
        tried += 1
        if tried > cap:
            return Exhausted(f"candidate cap {cap} reached", tried)
        try:
            wa = is_concept_of(c, a, "Wa")
            if wa is None:
                continue
            wb = is_concept_of(c, b, "Wb")
        except SearchExhausted:
            continue
        if wb is not None:
            return OriginWitness(c, wa.rns, wb.rns, wa.partition, wb.partition)
    return Exhausted(f"no witness among {tried} origins up to {max_origin_nodes} nodes", tried)


def verify_origin(w: OriginWitness, a: Net, b: Net) -> bool:
    for rns in (w.w_a, w.w_b):
        if not validate_rns_type(rns, "PRNS", [w.origin]).ok:
            return False
    try:
        return concept(w.origin, w.w_a) == frozenset([a]) and concept(w.origin, w.w_b) == frozenset([b])
    except BudgetExhausted:
        return False


# -- cover RNS conversion ----------------------------------------------------------------------

@dataclass(frozen=True)
class NotConvertible:
    reason: str
    preform: Optional[str] = None

    def __bool__(self):
        return False


def crns_to_prns(r, t) -> Prns | NotConvertible:
    """Rewrite a left-right distinct cover RNS as an equivalent PRNS, if one exists."""
    rns = _rns(r)
    t = as_jungle(t)
    rules = []
    block_map = {}
    for rule_, k, p in rns.preforms():
        who = f"{rule_.name}#{k}"
        if p.left.letters() & p.right.letters():
            return NotConvertible("left and right sides share letters (not left-right distinct)", who)
        if p.left.var_ids() or p.right.var_ids():
            return NotConvertible("variables are not supported in conversion", who)
        if len(p.right.components()) != 1:
            return NotConvertible("right side is not a single net", who)
        host = _with_tags_as_boundary(p.left)
        found = None
        for cw in concept_witnesses(host, _with_tags_as_boundary(p.right), f"{rule_.name}.{k}", verify=False):
            found = cw
            break
        if found is None:
            return NotConvertible("no block arrangement of the left side matches the right side", who)
        for sub in found.rns.rules:
            rules.append(sub)
            pre = sub.preforms[0]
            block_map[sub.name] = (pre.left, next(iter(pre.right.letters())))
    # equal left blocks must agree on their right sides
    seen = {}
    uniq = []
    for rl in rules:
        pre = rl.preforms[0]
        key = pre.left.tagged_key
        if key in seen:
            if seen[key] != pre.right.tagged_key:
                return NotConvertible("two blocks with equal patterns need different right sides", rl.name)
            continue
        seen[key] = pre.right.tagged_key
        uniq.append(rl)
    w = Rns(rns.name + ".prns", tuple(uniq), (FreshLetters(),))
    try:
        lhs = normal_forms(w, t, concept_budget(w, t))
        rhs = normal_forms(rns, t, concept_budget(rns, t))
    except BudgetExhausted:
        return NotConvertible("normal forms exceeded the derived budget")
    if lhs != rhs:
        return NotConvertible("normal forms differ from the cover RNS")
    return Prns(w, {k: v for k, v in block_map.items() if k in {r.name for r in uniq}})


def _with_tags_as_boundary(n: Net) -> Net:
    return n.without_tags()


# -- colouring overlaps --------------------------------------------------------------------------

def colouring_overlaps(
    w, r: Net, colourings: dict, max_depth: int = 8, bound: int = 6
) -> dict:
    """Coloured jungles OL_r per preform name.

    Base: the largest common enclosure of each left side with ``r``,
    coloured by that preform's colouring RNS. Step: the overlap of another
    left side with a coloured net, coloured again. A chain that revisits a
    coloured jungle raises NonTerminatingColouring.
    """
    rns = _rns(w)
    pre = {f"{rl.name}#{k}": p for rl, k, p in rns.preforms()}
    out: dict[str, set] = {}

    def colour(name: str, shared: Net) -> frozenset:
        col = colourings.get(name) or colourings.get(name.split("#")[0])
        if col is None:
            raise InputError(f"no colouring RNS for {name!r}")
        return normal_forms(_rns(col), [shared], concept_budget(col, [shared]))

    def visit(name: str, jungle: frozenset, path: tuple):
        key = (name, frozenset(n.tagged_key for n in jungle))
        if key in path:
            raise NonTerminatingColouring(f"colouring revisits {name!r}", [k[0] for k in path] + [name])
        if len(path) >= max_depth:
            return
        out.setdefault(name, set()).update(jungle)
        for other, p in sorted(pre.items()):
            for net in ordered(jungle):
                ov = overlaps(_plain(p.left), net, bound)
                if ov.overlap and other != name:
                    visit(other, colour(other, ov.shared), path + (key,))

    for name, p in sorted(pre.items()):
        ov = overlaps(_plain(p.left), r, bound)
        if ov.overlap:
            visit(name, colour(name, ov.shared), ())
    return {k: frozenset(v) for k, v in out.items()}


def _plain(n: Net) -> Net:
    return n.induced(n.ranked_ids())


def is_cross_colouring(w, r: Net, colourings: dict, **kw) -> bool:
    rns = _rns(w)
    pre = {f"{rl.name}#{k}": p for rl, k, p in rns.preforms()}
    ol = colouring_overlaps(w, r, colourings, **kw)
    for name, jungle in ol.items():
        right = _plain(pre[name].right)
        if not all(is_enclosure(_plain(n), right) for n in jungle):
            return False
    return True
