"""Macro/micro systems over a PRNS, parallel transducers, and class algebras."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .abstraction import (
    OriginWitness,
    Prns,
    abstract_sisters,
    concept,
    block_pattern,
    contract,
    fresh_node_side,
    prns_contraction,
)
from .enclosure import overlaps
from .errors import (
    BudgetExhausted,
    ClosureViolation,
    ConstructionUnsupported,
    InputError,
    NotInConceptAlphabet,
    RedexStraddlesUnsupported,
)
from .net import IN, OUT, Delta, FreshLetters as LetterSource, Net, Node, delta_d, port_name
from .rewrite import (
    Stage,
    Transducer,
    apply_transducer,
    as_jungle,
    normal_forms,
    ordered,
)
from .rules import FreshLetters, Preform, Rns, Rule, as_rns, invert_rns
from .typology import arity_mightiness_saving


def _rns(x) -> Rns:
    return x.rns if isinstance(x, Prns) else as_rns(x)


# -- macro construction ------------------------------------------------------------------------

@dataclass(frozen=True)
class MacroResult:
    macro: Rns
    post_prns: Prns
    provenance: dict = field(default_factory=dict)  # macro rule -> (micro rules, blocks consumed)


def _changed_nodes(t: Net, n: Net) -> set:
    """Nodes of ``t`` that a derivation ``t -> n`` removed, relabelled or rewired."""
    out = set()
    for v, node in t.nodes.items():
        if n.nodes.get(v) != node:
            out.add(v)
    for u, i, v, j in t.edges:
        if u in n.nodes and v in n.nodes and (u, i, v, j) not in n.edges:
            if n.nodes.get(u) == t.nodes[u] and n.nodes.get(v) == t.nodes[v]:
                out.update((u, v))
    for u, i, v, j in n.edges:
        if u in t.nodes and v in t.nodes and (u, i, v, j) not in t.edges:
            out.update((u, v))
    # a port free in t that got occupied by new material
    for p in t.unoccupied():
        q = n.link(p) if p[0] in n.nodes and n.nodes.get(p[0]) == t.nodes[p[0]] else None
        if q is not None:
            out.add(p[0])
    return out


def _boundary_tags(net: Net, ids: set) -> dict:
    """Tags naming the outside endpoint of each crossing edge, plus host tags."""
    tags = {}
    for v in sorted(ids):
        for p in net.ports(v):
            q = net.link(p)
            if q is not None and q[0] not in ids:
                tags["x:" + port_name(q)] = p
    for name, p in net.tags.items():
        if p[0] in ids:
            tags["h:" + name] = p
    return tags


def build_macro(r, w: Prns, t: Net, budget: int = 16, check: bool = True) -> MacroResult:
    """Macro RNS acting on the concept of ``t`` that mirrors ``r``'s normal forms on ``t``.

    The macro rule's left side is the concept image of every block the
    micro derivation touches; its right side is the contraction of the
    rewritten region (fresh letters, collected into the post PRNS w0).
    """
    micro = _rns(r)
    if micro.conditions:
        raise ConstructionUnsupported(f"{micro.name}: conditional micro systems are not supported")
    if w.partition is None:
        raise ConstructionUnsupported("the PRNS carries no partition of t")
    con = prns_contraction(t, w)
    blocks = list(w.partition)
    owner = {v: k for k, b in enumerate(blocks) for v in b}
    results = normal_forms(micro, t, budget)
    if not results:
        raise RedexStraddlesUnsupported(f"{micro.name} has no normal form on {t!r}")
    touched: set = set()
    for n in ordered(results):
        touched |= {owner[v] for v in _changed_nodes(t, n) if v in owner}
    if not touched:
        return MacroResult(Rns(micro.name + "_W"), w, {})
    region = set().union(*(blocks[k] for k in touched))
    outside = set(t.nodes) - region
    outside_blocks = [k for k in range(len(blocks)) if k not in touched]
    for n in results:
        kept = all(n.nodes.get(v) == t.nodes[v] for v in outside)
        inner = {e for e in t.edges if e[0] in outside and e[2] in outside}
        if not kept or inner != {e for e in n.edges if e[0] in outside and e[2] in outside}:
            raise RedexStraddlesUnsupported(
                "the derivation rewrites material outside the touched blocks; refinement needed"
            )
    region_concept = {con.block_node[k] for k in touched}
    left_plain = con.net.induced(region_concept)
    left = Net(left_plain.nodes, left_plain.edges, _boundary_tags(con.net, region_concept), check=False)

    fresh = LetterSource("$", start=len(w.block_map))
    avoid = set(t.letters()) | set(w.letters())
    for n in results:
        avoid |= n.letters()
    new_rules, block_map = [], dict(w.block_map)
    macro_rules, provenance = [], {}
    w_letters = [w.block_map[rn][1] for rn in w.block_rule]
    for j, n in enumerate(ordered(results)):
        material = [v for v in n.nodes if v not in outside]
        comps = [frozenset(c) for c in n.induced(material).components()] if material else []
        comps.sort(key=sorted)
        letters = []
        for i, comp in enumerate(comps):
            pattern, _ = block_pattern(n, comp)
            letter = fresh.mint(avoid)
            avoid.add(letter)
            letters.append(letter)
            rname = f"{w.name}0.{j}.{i}"
            block_map[rname] = (pattern, letter)
            new_rules.append(Rule(rname, (Preform(pattern, fresh_node_side(pattern, letter)),)))
        cn = contract(
            n,
            [blocks[k] for k in outside_blocks] + comps,
            [w_letters[k] for k in outside_blocks] + letters,
        )
        ids = {f"b{x}": con.block_node[k] for x, k in enumerate(outside_blocks)}
        ids.update({f"b{len(outside_blocks) + i}": f"m{j}.{i}" for i in range(len(comps))})
        cnet = cn.net.rename(ids)
        new_ids = {f"m{j}.{i}" for i in range(len(comps))}
        right_plain = cnet.induced(new_ids)
        right_tags = _boundary_tags(cnet, new_ids)
        extra = frozenset(right_tags) - frozenset(left.tags)
        if extra:
            raise RedexStraddlesUnsupported(f"rewritten region connects to new outside ports {sorted(extra)}")
        right = Net(right_plain.nodes, right_plain.edges, right_tags, check=False)
        mname = f"M{j}"
        macro_rules.append(Rule(mname, (Preform(left, right),)))
        provenance[mname] = (tuple(r_.name for r_ in micro.rules), tuple(sorted(touched)))
    macro = Rns(micro.name + "_W", tuple(macro_rules))
    w0 = Prns(Rns(w.name + "0", w.rns.rules + tuple(new_rules), (FreshLetters(),)), block_map)
    result = MacroResult(macro, w0, provenance)
    if check:
        verdict = verify_macro_equation(w, macro, w0, micro, t, budget=max(budget, 4 * len(t) + 4))
        if not verdict.holds:
            raise RedexStraddlesUnsupported(
                "the concept image of the touched blocks also matches elsewhere in the concept"
            )
    return result


# -- micro solving and verification -----------------------------------------------------------

def expand(net: Net, w, budget: Optional[int] = None) -> frozenset:
    """Substance images of ``net`` under the inverse of ``w``."""
    inv = invert_rns(_rns(w))
    b = budget if budget is not None else max(1, len(inv.rules) * max(1, len(net)))
    return normal_forms(inv, [net], b)


def solve_micro(macro, w: Prns, w0: Prns, budget: Optional[int] = None) -> Rns:
    macro = _rns(macro)
    c_letters, c0_letters = w.letters(), w0.letters()
    preforms = []
    for rl, k, p in macro.preforms():
        bad = p.left.letters() - c_letters
        if bad:
            raise NotInConceptAlphabet(f"{rl.name}: left letters {sorted(bad)} are not concept letters of w")
        bad = p.right.letters() - c0_letters
        if bad:
            raise NotInConceptAlphabet(f"{rl.name}: right letters {sorted(bad)} are not concept letters of w0")
        lefts = expand(p.left, w, budget) if p.left.letters() else frozenset([p.left])
        rights = expand(p.right, w0, budget) if p.right.letters() else frozenset([p.right])
        for a in ordered(lefts):
            for b in ordered(rights):
                preforms.append((rl.name, Preform(a, b, p.new_tags)))
    rules = [Rule(f"{name}.{i}", (pre,)) for i, (name, pre) in enumerate(preforms)]
    return Rns(macro.name + "_micro", tuple(rules))


@dataclass(frozen=True)
class MacroVerdict:
    holds: bool
    left: frozenset
    right: frozenset

    def __bool__(self):
        return self.holds


def verify_macro_equation(w, macro, w0, micro, t, budget: int = 32) -> MacroVerdict:
    """Compare t W^ R0^ (W0^-1)^ against t R^ exactly."""
    t = as_jungle(t)
    concept_ = normal_forms(_rns(w), t, budget)
    moved = normal_forms(_rns(macro), concept_, budget)
    left = normal_forms(invert_rns(_rns(w0)), moved, budget)
    right = normal_forms(_rns(micro), t, budget)
    return MacroVerdict(left == right, left, right)


# -- parallel transducers -------------------------------------------------------------------------

@dataclass(frozen=True)
class ParallelPair:
    micro: Transducer
    parallel: Transducer
    witness: OriginWitness
    lifted: Transducer  # the micro transducer lifted onto the origin


def _relabel_rules(r: Rns, known: frozenset, avoid: set) -> list[Rule]:
    """Single-node substance rules for right-side letters outside the concept alphabet."""
    fresh = LetterSource("$p")
    rules = []
    seen = set()
    for _, _, p in r.preforms():
        for v, node in sorted(p.right.nodes.items()):
            if node.var or node.letter in known or node.letter in seen:
                continue
            seen.add(node.letter)
            sub = fresh.mint(avoid)
            avoid.add(sub)
            tags = {f"{d}{k}": ("v", d, k) for d in (IN, OUT) for k in range(node.rank(d))}
            left = Net({"v": Node(sub, node.n_in, node.n_out)}, (), tags, check=False)
            right = Net({"v": node}, (), tags, check=False)
            rules.append(Rule(f"relabel.{node.letter}", (Preform(left, right),)))
    return rules


def lift_rns(r, w_a: Rns, origin: Net, budget: int = 16) -> tuple[Rns, list[Rule]]:
    """Move a system acting on a concept down onto its substance.

    Right-side letters outside the concept alphabet get a single fresh
    substance node each; those relabel rules are returned alongside.
    Left sides lift to all their preimages, right sides to the first one.
    """
    r = _rns(r)
    known = frozenset(w_a.right_letters())
    avoid = set(origin.letters()) | set(known) | set(r.left_letters()) | set(r.right_letters())
    extra = _relabel_rules(r, known, avoid)
    left_w = invert_rns(w_a)
    right_w = invert_rns(Rns(w_a.name + "+", w_a.rules + tuple(extra), (FreshLetters(),)))
    rules = []
    for rl, k, p in r.preforms():
        lefts = normal_forms(left_w, [p.left], budget) if p.left.letters() else frozenset([p.left])
        rights = normal_forms(right_w, [p.right], budget) if p.right.letters() else frozenset([p.right])
        # every preimage of the left is a redex; one canonical preimage of the right suffices
        rights = ordered(rights)[:1]
        i = 0
        for a in ordered(lefts):
            for b in ordered(rights):
                rules.append(Rule(f"{rl.name}.{k}.{i}", (Preform(a, b, p.new_tags),)))
                i += 1
    return Rns(r.name + "_lift", tuple(rules)), extra


def _as_td(r) -> Transducer:
    if isinstance(r, Transducer):
        return r
    return Transducer((Stage("s0", (_rns(r),), 1, "steps"),), _rns(r).name)


def _block_letter(w_b: Rns, pattern: Net) -> Optional[str]:
    for _, _, pre in w_b.preforms():
        if pre.left.tagged_key == pattern.tagged_key:
            (letter,) = pre.right.letters()
            return letter
    return None


def _post_rules(c: Net, results: frozenset, w_b: Rns, partition, relabel: list[Rule]) -> list[Rule]:
    """Contraction of each rewritten origin back into b's world, one whole-net rule each.

    Untouched blocks keep their w_b letters; a lone relabel-substance node
    returns to its original letter; remaining material components get one
    fresh letter per isomorphism class.
    """
    restore = {}
    for r_ in relabel:
        pre = r_.preforms[0]
        (sub,), (orig,) = pre.left.letters(), pre.right.letters()
        restore[sub] = orig
    fresh = LetterSource("$q")
    avoid = set(c.letters()) | set(w_b.right_letters()) | set(restore) | set(restore.values())
    for n in results:
        avoid |= n.letters()
    by_pattern: dict = {}
    blocks = list(partition)
    rules = []
    for n in ordered(results):
        changed = _changed_nodes(c, n)
        parts, letters = [], []
        untouched: set = set()
        for blk in blocks:
            if blk & changed:
                continue
            letter = _block_letter(w_b, block_pattern(n, blk)[0])
            if letter is None:
                continue
            parts.append(blk)
            letters.append(letter)
            untouched |= blk
        material = [v for v in n.nodes if v not in untouched]
        comps = sorted((frozenset(x) for x in n.induced(material).components()), key=sorted) if material else []
        for comp in comps:
            parts.append(comp)
            if len(comp) == 1 and n.nodes[next(iter(comp))].letter in restore:
                letters.append(restore[n.nodes[next(iter(comp))].letter])
                continue
            key = block_pattern(n, comp)[0].tagged_key
            if key not in by_pattern:
                by_pattern[key] = fresh.mint(avoid)
                avoid.add(by_pattern[key])
            letters.append(by_pattern[key])
        target = contract(n, parts, letters).net
        rules.append(Rule(f"post.{len(rules)}", (Preform(n.without_tags(), target.without_tags()),)))
    return rules


def parallel_td(r, witness: OriginWitness, budget: int = 16) -> ParallelPair:
    """Transducer on b that parallels ``r`` on a through the common origin.

    Stages: expand b to the witnessed origin, run ``r`` lifted through
    w_a, contract the result again. The expansion is the inverse of w_b
    restricted to the witness: when b has isomorphic blocks the full
    inverse also reaches other refinements the lift was not built for.
    """
    td = _as_td(r)
    if td.trivial:
        return ParallelPair(td, Transducer((), td.name + "_par"), witness, td)
    c = witness.origin
    stages, relabel = [], []
    for s in td.stages:
        lifted = []
        for x in s.systems:
            rns, extra = lift_rns(x, witness.w_a, c, budget)
            lifted.append(rns)
            relabel += [e for e in extra if e.name not in {q.name for q in relabel}]
        stages.append(Stage(s.name, tuple(lifted), s.budget, s.mode, s.after))
    lifted_td = Transducer(tuple(stages), td.name + "_lift")
    results = apply_transducer(lifted_td, c)
    post = Rns("post", tuple(_post_rules(c, results, witness.w_b, witness.partition_b, relabel)))
    (b,) = concept(c, witness.w_b)
    expand_b = Rns("expand", (Rule("expand", (Preform(b.without_tags(), c.without_tags()),)),))
    n_max = max([len(c)] + [len(n) for n in results])
    first = Stage("expand", (expand_b,), max(1, len(expand_b.rules) * n_max), "normal", ())
    mid = []
    for s in lifted_td.stages:
        after = ("expand",) if s.after in (None, ()) and not mid else s.after
        mid.append(Stage(s.name, s.systems, s.budget, s.mode, after))
    last = Stage("contract", (post,), max(1, len(post.rules) * n_max), "normal", tuple(lifted_td.sinks()))
    parallel = Transducer((first, *mid, last), td.name + "_par")
    return ParallelPair(td, parallel, witness, lifted_td)


@dataclass(frozen=True)
class ParallelReport:
    condition_1: bool  # r(a) and parallel(b) are sisters
    condition_2: bool  # the lifted origin result is a sister of both
    arity_saving: bool  # every micro preform is arity mightiness saving
    a_result: frozenset
    b_result: frozenset

    @property
    def ok(self) -> bool:
        return self.condition_1 and self.condition_2 and self.arity_saving

    def __bool__(self):
        return self.ok


def verify_parallel(pair: ParallelPair, a: Net, b: Net, budget: int = 16) -> ParallelReport:
    ra = apply_transducer(pair.micro, a)
    rb = apply_transducer(pair.parallel, b) if not pair.parallel.trivial else frozenset([b])
    rc = apply_transducer(pair.lifted, pair.witness.origin)
    cond1 = bool(ra) and bool(rb) and abstract_sisters(ra, rb, "split")
    cond2 = bool(rc) and abstract_sisters(rc, ra, "split") and abstract_sisters(rc, rb, "split")
    saving = all(
        arity_mightiness_saving(p) for s in pair.micro.stages for x in s.systems for _, _, p in x.preforms()
    )
    return ParallelReport(cond1, cond2, saving, ra, rb)


# -- class algebra -------------------------------------------------------------------------------

def class_key(j) -> tuple:
    d = delta_d(as_jungle(j))
    return (d.total, d.n_in, d.n_out)


@dataclass
class ClassAlgebra:
    """Net classes keyed by unoccupied-port signature, with macro-transducer bundles."""

    classes: dict = field(default_factory=dict)  # key -> frozenset of representatives
    operations: dict = field(default_factory=dict)  # name -> tuple of transducers
    centres: dict = field(default_factory=dict)

    def __post_init__(self):
        self.operations.setdefault("identity", ())

    @classmethod
    def from_nets(cls, nets: Iterable[Net], operations: Optional[Mapping] = None) -> "ClassAlgebra":
        classes: dict = {}
        for n in nets:
            classes.setdefault(class_key(n), set()).add(n)
        alg = cls({k: frozenset(v) for k, v in classes.items()}, dict(operations or {}))
        for k, v in alg.classes.items():
            alg.centres[k] = ordered(v)[0]
        return alg

    def register(self, name: str, bundle: Iterable) -> None:
        self.operations[name] = tuple(_as_td(x) for x in bundle)

    def centre(self, key) -> Net:
        return self.centres.get(key) or ordered(self.classes[key])[0]


def _op_results(alg: ClassAlgebra, nets: Iterable[Net], op: str) -> frozenset:
    if op not in alg.operations:
        raise InputError(f"unknown operation {op!r}")
    bundle = alg.operations[op]
    out = set()
    for n in nets:
        if not bundle:
            out.add(n)
        for td in bundle:
            out |= apply_transducer(_as_td(td), n)
    return frozenset(out)


def class_apply(alg: ClassAlgebra, key, op: str) -> tuple:
    key = tuple(key)
    if key not in alg.classes:
        raise InputError(f"no class {key}")
    results = _op_results(alg, ordered(alg.classes[key]), op)
    sigs = sorted({class_key(n) for n in results})
    if len(sigs) != 1:
        raise ClosureViolation(f"operation {op!r} maps class {key} into {sigs}")
    if sigs[0] != key and not _bundle_saving(alg.operations[op]):
        raise ClosureViolation(f"operation {op!r} changes unoccupied ports: {key} -> {sigs[0]}")
    return sigs[0]


def _bundle_saving(bundle) -> bool:
    return all(
        arity_mightiness_saving(p)
        for td in bundle
        for s in _as_td(td).stages
        for x in s.systems
        for _, _, p in x.preforms()
    )


@dataclass
class ClosureReport:
    results: dict = field(default_factory=dict)  # (key, op) -> key or "violation: ..."
    lemma: dict = field(default_factory=dict)  # (key, op) -> bool
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(not str(v).startswith("violation") for v in self.results.values()) and all(
            self.lemma.values()
        )


def is_distinctive(nets: Iterable[Net], bound: int = 3) -> bool:
    """No two representatives share a connected piece of two or more nodes."""
    nets = ordered(nets)
    for i, p in enumerate(nets):
        for q in nets[i + 1:]:
            ov = overlaps(p, q, bound)
            if ov.overlap and len(ov.shared) >= 2:
                return False
    return True


def check_closure(alg: ClassAlgebra, samples: Optional[Iterable] = None) -> ClosureReport:
    """Closure of every class under every operation, plus the centre lemma on distinctive classes."""
    report = ClosureReport()
    keys = sorted(alg.classes) if samples is None else [tuple(k) for k in samples]
    for key in keys:
        for op in sorted(alg.operations):
            try:
                report.results[(key, op)] = class_apply(alg, key, op)
            except ClosureViolation as e:
                report.results[(key, op)] = f"violation: {e}"
                continue
            reps = alg.classes[key]
            if not is_distinctive(reps):
                report.notes.append(f"class {key}: representatives overlap; lemma check skipped")
                continue
            union = {class_key(n) for n in _op_results(alg, reps, op) | reps}
            centre = alg.centre(key)
            image = {class_key(n) for n in _op_results(alg, [centre], op) | {centre}}
            report.lemma[(key, op)] = union == image
    return report
