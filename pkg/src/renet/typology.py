"""Rule typology and net homomorphisms.

Tags play the part of arity letters: the arity set of a side is its set of
(tag name, direction) pairs, and unoccupied ports of variable nodes are
wildcards that are never counted.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .errors import HeightUndefined, InputError, PlaceholderArityMismatch
from .match import _edge
from .net import IN, OUT, Net, Node, Port, height
from .rules import Preform, Rule, as_rns


# -- per-side measurements ------------------------------------------------------------

def fron(net: Net) -> frozenset:
    return net.variables()


def var_counts(net: Net) -> Counter:
    return Counter(n.letter for n in net.nodes.values() if n.var)


def arity_set(net: Net) -> frozenset:
    return frozenset((t, p[1]) for t, p in net.tags.items() if not net.nodes[p[0]].var)


def untagged_free(net: Net) -> Counter:
    c = Counter()
    for p in net.unoccupied():
        if p not in net.tag_at:
            c[p[1]] += 1
    return c


def arity_mightiness_saving(p: Preform) -> bool:
    """Same tag names with the same directions, and equal untagged free-port counts."""
    return arity_set(p.left) == arity_set(p.right) and untagged_free(p.left) == untagged_free(p.right)


def manoeuvre_mightiness_saving(p: Preform) -> bool:
    return var_counts(p.left) == var_counts(p.right)


def _cmp_sets(a: frozenset, b: frozenset) -> str:
    if a == b:
        return "saving"
    if a < b:
        return "increasing"
    if a > b:
        return "deleting"
    return "changing"


def classify_preform(p: Preform, heights: Optional[bool] = None) -> set[str]:
    labels = set()
    labels.add("manoeuvre-" + _cmp_sets(fron(p.left), fron(p.right)))
    if manoeuvre_mightiness_saving(p):
        labels.add("manoeuvre-mightiness-saving")
    ar = _cmp_sets(arity_set(p.left), arity_set(p.right))
    if ar != "changing":
        labels.add("arity-" + ar)
    if arity_mightiness_saving(p):
        labels.add("arity-mightiness-saving")
    lt = _cmp_sets(p.left.letters(), p.right.letters())
    if lt != "changing":
        labels.add("letter-" + lt)
    if len(p.left) < len(p.right):
        labels.add("letter-mightiness-increasing")
    elif len(p.left) == len(p.right):
        labels.add("letter-count-preserving")
    xl = _cmp_sets(fron(p.left), fron(p.right))
    labels.add("x-manoeuvre-letter-" + {"deleting": "decreasing"}.get(xl, xl))
    lc, rc = var_counts(p.left), var_counts(p.right)
    xs = set(lc) | set(rc)
    if all(lc[x] == rc[x] for x in xs):
        labels.add("x-manoeuvre-mightiness-saving")
    if xs and all(lc[x] < rc[x] for x in xs):
        labels.add("x-manoeuvre-mightiness-increasing")
    if xs and all(lc[x] > rc[x] for x in xs):
        labels.add("x-manoeuvre-mightiness-decreasing")
    if all(v == 1 for v in lc.values()):
        labels.add("left-linear")
    if all(v == 1 for v in rc.values()):
        labels.add("right-linear")
    if p.is_identity():
        labels.add("identity")
    if heights is not False:
        hl, hr = height(p.left), height(p.right)
        if hl is None or hr is None:
            if heights:
                raise HeightUndefined("a rule side contains a directed loop")
        else:
            labels.add(
                "height-diminishing" if hl > hr else "height-increasing" if hl < hr else "height-saving"
            )
    return labels


# labels that hold for a rule iff they hold for every preform
_FOR_EACH = {
    "manoeuvre-increasing", "manoeuvre-deleting", "manoeuvre-saving",
    "manoeuvre-mightiness-saving", "arity-increasing", "arity-deleting", "arity-saving",
    "arity-mightiness-saving", "letter-increasing", "letter-deleting", "letter-saving",
    "letter-count-preserving", "x-manoeuvre-letter-increasing", "x-manoeuvre-letter-decreasing",
    "x-manoeuvre-letter-saving", "x-manoeuvre-mightiness-saving",
    "x-manoeuvre-mightiness-increasing", "x-manoeuvre-mightiness-decreasing",
    "left-linear", "right-linear", "identity",
    "height-diminishing", "height-increasing", "height-saving",
}
# labels that hold iff some preform has them
_SOME = {"manoeuvre-changing", "letter-mightiness-increasing"}


def classify_rule(r, heights: Optional[bool] = None, monadic_bound: int = 6) -> set[str]:
    """Typology labels of a rule (or of every rule of an RNS, when all agree).

    ``heights=True`` raises HeightUndefined on cyclic sides; ``None`` just
    omits height labels there. ``monadic`` is reported three-valued as one
    of ``monadic``, ``not-monadic`` or ``monadic-unknown``.
    """
    if isinstance(r, Preform):
        preforms = [r]
    elif isinstance(r, Rule):
        preforms = list(r.preforms)
    else:
        preforms = [p for _, _, p in as_rns(r).preforms()]
    per = [classify_preform(p, heights) for p in preforms]
    labels = set()
    for lab in _FOR_EACH:
        if per and all(lab in s for s in per):
            labels.add(lab)
    for lab in _SOME:
        if any(lab in s for s in per):
            labels.add(lab)
    if "left-linear" in labels and "right-linear" in labels:
        labels.add("totally-linear")
    labels.add("simultaneous" if len(preforms) > 1 else "single")
    verdicts = [monadic(p, monadic_bound) for p in preforms]
    if all(v is True for v in verdicts):
        labels.add("monadic")
    elif any(v is False for v in verdicts):
        labels.add("not-monadic")
    else:
        labels.add("monadic-unknown")
    return labels


# -- net homomorphisms -------------------------------------------------------------------

@dataclass(frozen=True)
class HomImage:
    """Image of a ranked letter: a net plus placeholder ports.

    ``placeholders`` maps a source port ``(direction, index)`` to an image
    port, or to a tuple of image ports when the placeholder is repeated.
    """

    net: Net
    placeholders: Mapping = field(default_factory=dict)

    def ports_for(self, d: str, k: int) -> tuple:
        v = self.placeholders.get((d, k))
        if v is None:
            return ()
        if isinstance(v[0], str) and len(v) == 3 and v[1] in (IN, OUT):
            return (tuple(v),)
        return tuple(tuple(x) for x in v)


Image = Union[HomImage, str]


def apply_net_homomorphism(h: Mapping[str, Image], t: Net, preserving: bool = False) -> Net:
    """Replace each node by its image and re-route edges through placeholders.

    A string image relabels the node (allowed for any letter whose ranks
    stay put). Letters missing from ``h`` map to themselves.
    """
    nodes, edges, tags = {}, [], {}
    port_of: dict[Port, Optional[Port]] = {}
    for vid in sorted(t.nodes):
        node = t.nodes[vid]
        img = h.get(node.letter)
        if img is None or isinstance(img, str):
            letter = node.letter if img is None else img
            nodes[vid] = Node(letter, node.n_in, node.n_out, node.var)
            for p in t.ports(vid):
                port_of[p] = p
            continue
        pre = f"{vid}/"
        for w, n in img.net.nodes.items():
            nodes[pre + w] = n
        for u, i, w, j in img.net.edges:
            edges.append((pre + u, i, pre + w, j))
        for p in t.ports(vid):
            ports = img.ports_for(p[1], p[2])
            occupied = t.link(p) is not None
            if len(ports) > 1 and occupied:
                raise PlaceholderArityMismatch(
                    f"placeholder {p[1]}{p[2]} of {node.letter!r} is repeated; an edge cannot be split"
                )
            if not ports:
                if occupied and preserving:
                    raise PlaceholderArityMismatch(
                        f"image of {node.letter!r} omits placeholder {p[1]}{p[2]}"
                    )
                port_of[p] = None
                continue
            q = ports[0]
            if q[1] != p[1]:
                raise PlaceholderArityMismatch(f"placeholder {p[1]}{p[2]} of {node.letter!r} points at an {q[1]}-port")
            port_of[p] = (pre + q[0], q[1], q[2])
    for u, i, v, j in t.edges:
        a, b = port_of[(u, OUT, i)], port_of[(v, IN, j)]
        if a is not None and b is not None:
            edges.append(_edge(a, b))
    for tname, p in t.tags.items():
        if port_of.get(p) is not None:
            tags[tname] = port_of[p]
    return Net(nodes, edges, tags, name=t.name)


def classify_homomorphism(h: Mapping[str, Image], alphabet: Mapping[str, tuple[int, int]]) -> set[str]:
    """Down/up linear, preserving/deleting and down-alphabetic labels.

    ``alphabet`` gives the source ranks of every ranked letter in scope.
    """
    down_lin = up_lin = down_pres = up_pres = True
    alphabetic = True
    for letter, (n_in, n_out) in alphabet.items():
        img = h.get(letter)
        if img is None or isinstance(img, str):
            continue
        counts = {IN: 0, OUT: 0}
        for (d, k), v in img.placeholders.items():
            ports = img.ports_for(d, k)
            counts[d] += 1 if ports else 0
            if len(ports) > 1:
                if d == IN:
                    down_lin = False
                else:
                    up_lin = False
        if counts[IN] != n_in:
            down_pres = False
        if counts[OUT] != n_out:
            up_pres = False
        single = len(img.net) == 1 and not next(iter(img.net.nodes.values())).var
        if not single or any(
            len(img.ports_for(d, k)) != 1 or img.ports_for(d, k)[0][1:] != (d, k)
            for d, r in ((IN, n_in), (OUT, n_out)) for k in range(r)
        ):
            alphabetic = False
    labels = {
        "down-linear" if down_lin else "down-nonlinear",
        "up-linear" if up_lin else "up-nonlinear",
        "down-preserving" if down_pres else "down-deleting",
        "up-preserving" if up_pres else "up-deleting",
    }
    if alphabetic:
        labels.add("down-alphabetic")
    return labels


# -- monadic search -------------------------------------------------------------------

def _connected(net: Net, ids: set) -> bool:
    if not ids:
        return False
    start = next(iter(ids))
    seen, stack = {start}, [start]
    while stack:
        v = stack.pop()
        for w in net.neighbours(v):
            if w in ids and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == ids


def monadic(p: Preform, bound: int = 6, cap: int = 20000) -> Optional[bool]:
    """Is there a net homomorphism taking the left side onto the right side?

    Searches homomorphisms whose images partition the right side into
    connected blocks, one per left node (variables map to variables).
    ``None`` means the bound or candidate cap stopped the search.
    """
    left, right = p.left.without_tags(), p.right.without_tags()
    if left == right:
        return True
    lids, rids = sorted(left.nodes), sorted(right.nodes)
    if len(rids) > bound or len(lids) > bound:
        return None
    if len(rids) < len(lids):
        return False
    tried = 0
    for assign in itertools.product(range(len(lids)), repeat=len(rids)):
        tried += 1
        if tried > cap:
            return None
        blocks = {u: set() for u in lids}
        for r, k in zip(rids, assign):
            blocks[lids[k]].add(r)
        if not all(blocks.values()) or not all(_connected(right, b) for b in blocks.values()):
            continue
        if any(left.nodes[u].var != any(right.nodes[w].var for w in blocks[u]) for u in lids):
            continue
        if any(left.nodes[u].var and len(blocks[u]) != 1 for u in lids):
            continue
        h = _hom_from_blocks(left, right, blocks)
        if h is None:
            continue
        for table in h:
            try:
                img = apply_net_homomorphism(table, left)
            except PlaceholderArityMismatch:
                continue
            if img == right:
                return True
    return False


def _hom_from_blocks(left: Net, right: Net, blocks: dict):
    """Candidate homomorphism tables consistent with a block assignment."""
    owner = {w: u for u, b in blocks.items() for w in b}
    placeholders: dict[str, dict] = {u: {} for u in blocks}
    for u, i, v, j in left.edges:
        if u == v:
            return None
        crossing = [e for e in right.edges if owner[e[0]] == u and owner[e[2]] == v]
        if not crossing:
            return None
        e = sorted(crossing)[0] if len(crossing) == 1 else None
        if e is None:
            # several parallel edges: pair them by port index order
            lpar = sorted(x for x in left.edges if x[0] == u and x[2] == v)
            rpar = sorted(crossing)
            if len(lpar) != len(rpar):
                return None
            e = rpar[lpar.index((u, i, v, j))]
        placeholders[u][(OUT, i)] = (e[0], OUT, e[1])
        placeholders[v][(IN, j)] = (e[2], IN, e[3])
    # one table per letter; nodes sharing a letter must agree up to isomorphism
    tables = {}
    for u in sorted(blocks):
        node = left.nodes[u]
        if node.var:
            (w,) = blocks[u]
            target = right.nodes[w].letter
            if tables.get(node.letter, target) != target:
                return None
            tables[node.letter] = target
            continue
        sub = right.induced(blocks[u])
        ph = placeholders[u]
        img = HomImage(sub, dict(ph))
        if node.letter in tables:
            prev = tables[node.letter]
            a = prev.net.replace(tags={f"{d}{k}": v for (d, k), v in prev.placeholders.items()})
            b = sub.replace(tags={f"{d}{k}": v for (d, k), v in ph.items()})
            if a.tagged_key != b.tagged_key:
                return None
            continue
        tables[node.letter] = img
    # placeholders of unoccupied left ports stay open: try leaving them out
    return [tables]
