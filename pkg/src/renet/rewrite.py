"""RNS application, derivations, normal forms and transducer pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import BudgetExhausted, ConditionViolated, InputError, StageBudgetExhausted
from .match import Match, preform_matches, splice
from .net import Net
from .rules import (
    ApplyOrder,
    FreshLetters,
    LettersOutside,
    RedexDisjoint,
    RedexRestriction,
    Rns,
    as_rns,
)


def as_jungle(j) -> frozenset:
    if isinstance(j, Net):
        return frozenset([j])
    return frozenset(j)


def ordered(j: Iterable[Net]) -> list[Net]:
    """Deterministic iteration order for jungles."""
    return sorted(j, key=lambda n: (n.key, n.tagged_key))


# -- matching under conditions ----------------------------------------------------

def net_matches(rns: Rns, net: Net) -> list[Match]:
    produced = rns.right_letters() - rns.left_letters() if rns.has(RedexDisjoint) else frozenset()
    restrictions = [c for c in rns.conditions if isinstance(c, RedexRestriction)]
    out: list[tuple[int, Match]] = []
    order = rns.condition(ApplyOrder)
    rank = {n: k for k, n in enumerate(order.names)} if order else {}
    for rule, k, pre in rns.preforms():
        for m in preform_matches(pre, net, rule.name, k):
            if produced and any(net.nodes[v].letter in produced for v in m.redex):
                continue
            if not all(c.predicate(net, m) for c in restrictions):
                continue
            out.append((rank.get(rule.name, len(rank)), m))
    if order and out:
        best = min(r for r, _ in out)
        out = [(r, m) for r, m in out if r == best]
    return [m for _, m in out]


def find_matches(r, host) -> list[Match]:
    rns = as_rns(r)
    result = []
    for net in ordered(as_jungle(host)):
        result.extend(net_matches(rns, net))
    return result


def _check_results(rns: Rns, results: Iterable[Net]) -> None:
    cond = rns.condition(LettersOutside)
    if cond is None:
        return
    for n in results:
        bad = n.letters() & cond.letters
        if bad:
            raise ConditionViolated(f"{rns.name}: result contains forbidden letters {sorted(bad)}")


def successors(systems: Sequence[Rns], net: Net) -> list[Net]:
    """One-step rewrites of ``net`` (empty when nothing matches)."""
    seen: dict = {}
    for rns in systems:
        res = [splice(m) for m in net_matches(rns, net)]
        _check_results(rns, res)
        for n in res:
            seen.setdefault(n, n)
    return list(seen.values())


def apply(r, host) -> frozenset:
    """All one-step results; nets without a match pass through unchanged."""
    systems = _systems(r)
    out: dict = {}
    for net in ordered(as_jungle(host)):
        succ = successors(systems, net)
        for n in succ or [net]:
            out.setdefault(n, n)
    return frozenset(out.values())


def is_irreducible(r, net: Net) -> bool:
    succ = successors(_systems(r), net)
    return not succ or succ == [net]


def _systems(r) -> list[Rns]:
    if isinstance(r, (list, tuple, frozenset, set)):
        return [as_rns(x) for x in r]
    return [as_rns(r)]


# -- derivations -------------------------------------------------------------------

@dataclass
class Derivation:
    reached: dict  # net -> first step it was reached at
    budget_exhausted: bool = False
    cycle: bool = False

    @property
    def nets(self) -> frozenset:
        return frozenset(self.reached)


def derive(systems, start, max_steps: int) -> Derivation:
    """Breadth-first closure of one-step application, start included."""
    if max_steps < 0:
        raise InputError("max_steps must be >= 0")
    systems = _systems(systems) if systems else []
    reached: dict = {}
    for n in ordered(as_jungle(start)):
        reached.setdefault(n, 0)
    frontier = list(reached)
    cycle = False
    for step in range(1, max_steps + 1):
        nxt = []
        for net in frontier:
            for n in successors(systems, net):
                if n in reached:
                    cycle = True
                else:
                    reached[n] = step
                    nxt.append(n)
        frontier = nxt
        if not frontier:
            break
    growing = any(n not in reached for net in frontier for n in successors(systems, net))
    return Derivation(reached, growing, cycle)


def normal_forms(r, start, budget: int, max_nets: Optional[int] = None) -> frozenset:
    """Reachable irreducible nets within ``budget`` steps.

    Raises BudgetExhausted (``partial`` = normal forms found so far) when
    reducible nets remain unexpanded at the cutoff.
    """
    if budget < 0:
        raise InputError("budget must be >= 0")
    systems = _systems(r)
    fresh = any(s.has(FreshLetters) for s in systems)
    found: dict = {}
    for s in ordered(as_jungle(start)):
        forbidden = s.letters() if fresh else frozenset()
        seen = {s}
        frontier = [s]
        depth = 0
        while frontier:
            if depth > budget:
                raise BudgetExhausted(
                    f"normal forms not reached within {budget} steps", frozenset(found.values())
                )
            nxt = []
            for net in frontier:
                succ = successors(systems, net)
                if not succ or succ == [net]:
                    if not (net.letters() & forbidden):
                        found.setdefault(net, net)
                    continue
                for n in succ:
                    if n not in seen:
                        seen.add(n)
                        nxt.append(n)
                if max_nets is not None and len(seen) > max_nets:
                    raise BudgetExhausted(
                        f"more than {max_nets} intermediate nets", frozenset(found.values())
                    )
            frontier = nxt
            depth += 1
    return frozenset(found.values())


# -- transducers -----------------------------------------------------------------

@dataclass(frozen=True)
class Stage:
    name: str
    systems: tuple
    budget: int = 1
    mode: str = "steps"  # "steps" | "normal"
    after: Optional[tuple] = None  # None = the previous stage; () = the TD input

    def __post_init__(self):
        object.__setattr__(self, "systems", tuple(as_rns(s) for s in self.systems))
        if self.budget < 0:
            raise InputError(f"stage {self.name!r}: negative budget")
        if self.mode not in ("steps", "normal"):
            raise InputError(f"stage {self.name!r}: unknown mode {self.mode!r}")
        if self.after is not None:
            object.__setattr__(self, "after", tuple(self.after))


@dataclass(frozen=True)
class Transducer:
    stages: tuple = ()
    name: str = "td"

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        self.topological()

    @property
    def trivial(self) -> bool:
        return not self.stages

    def predecessors(self) -> dict[str, tuple]:
        out = {}
        prev: tuple = ()
        names = [s.name for s in self.stages]
        if len(set(names)) != len(names):
            raise InputError("duplicate stage names")
        for s in self.stages:
            out[s.name] = prev if s.after is None else s.after
            unknown = set(out[s.name]) - set(names)
            if unknown:
                raise InputError(f"stage {s.name!r} follows unknown stages {sorted(unknown)}")
            prev = (s.name,)
        return out

    def topological(self) -> list[Stage]:
        preds = self.predecessors()
        by_name = {s.name: s for s in self.stages}
        order, state = [], {}

        def visit(n):
            if state.get(n) == 1:
                raise InputError(f"transducer stages form a cycle through {n!r}")
            if state.get(n) == 2:
                return
            state[n] = 1
            for p in preds[n]:
                visit(p)
            state[n] = 2
            order.append(by_name[n])

        for s in self.stages:
            visit(s.name)
        return order

    def sinks(self) -> list[str]:
        preds = self.predecessors()
        used = {p for ps in preds.values() for p in ps}
        return [s.name for s in self.stages if s.name not in used]

    def total_steps(self) -> int:
        return sum(s.budget for s in self.stages)


def pipeline(*systems, budget: int = 1, mode: str = "steps", name: str = "td") -> Transducer:
    """A linear transducer with one stage per RNS (or RNS set)."""
    stages = []
    for k, s in enumerate(systems):
        group = tuple(s) if isinstance(s, (list, tuple)) else (s,)
        stages.append(Stage(f"s{k}", group, budget, mode))
    return Transducer(tuple(stages), name)


def run_stage(stage: Stage, j: frozenset) -> frozenset:
    if stage.mode == "normal":
        try:
            return normal_forms(list(stage.systems), j, stage.budget)
        except BudgetExhausted as e:
            raise StageBudgetExhausted(stage.name, e) from e
    cur = frozenset(j)
    for _ in range(stage.budget):
        nxt = apply(list(stage.systems), cur) if stage.systems else cur
        if nxt == cur and _tagged(nxt) == _tagged(cur):
            break
        cur = nxt
    return cur


def _tagged(j):
    return frozenset(n.tagged_key for n in j)


def apply_transducer(td: Transducer, start) -> frozenset:
    start = as_jungle(start)
    if td.trivial:
        return start
    preds = td.predecessors()
    outputs: dict[str, frozenset] = {}
    for stage in td.topological():
        ps = preds[stage.name]
        inp = start if not ps else frozenset().union(*(outputs[p] for p in ps))
        outputs[stage.name] = run_stage(stage, inp)
    return frozenset().union(*(outputs[n] for n in td.sinks()))


def normal_form_td(td: Transducer) -> Transducer:
    """Every stage switched to normal-form application."""
    return Transducer(
        tuple(Stage(s.name, s.systems, s.budget, "normal", s.after) for s in td.stages), td.name + "^"
    )
