"""Rules, renetting systems (RNS) and their conditional demands."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from .errors import InputError
from .net import IN, OUT, Net, Port


@dataclass(frozen=True)
class Preform:
    """One ordered left/right pair.

    Variable nodes in ``left`` bind the subnet hanging off their tie; tags
    name the boundary shared by both sides. ``new_tags`` lists right-side
    tags that open fresh unoccupied ports.
    """

    left: Net
    right: Net
    new_tags: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "new_tags", frozenset(self.new_tags))
        if len(self.left) == 0:
            raise InputError("left side must be non-empty")
        for side, net in (("left", self.left), ("right", self.right)):
            for v in net.var_ids():
                if len(var_ties(net, v)) != 1:
                    raise InputError(f"{side} variable node {v!r} must have exactly one tie")
                (port, _), = var_ties(net, v)
                if net.nodes[port[0]].var:
                    raise InputError(f"{side} variable node {v!r} is tied to another variable")
        missing = self.right.variables() - self.left.variables()
        if missing:
            raise InputError(f"right side uses unbound variables {sorted(missing)}")

    @property
    def interface(self) -> frozenset:
        """Shared tag and variable names."""
        shared_tags = set(self.left.tags) & set(self.right.tags)
        return frozenset(shared_tags | (self.left.variables() & self.right.variables()))

    def inverse(self) -> "Preform":
        new = frozenset(set(self.left.tags) - set(self.right.tags))
        return Preform(self.right, self.left, new)

    def is_identity(self) -> bool:
        return self.left.tagged_key == self.right.tagged_key and not self.new_tags


def dict_dirs(net: Net) -> dict:
    return {t: p[1] for t, p in net.tags.items()}


def var_ties(net: Net, vid: str) -> list[tuple[Port, str]]:
    """For a variable node: [(ranked port it occupies, var-side direction)]."""
    out = []
    for d in (IN, OUT):
        other = net.link((vid, d, 0))
        if other is not None:
            out.append((other, d))
    return out


@dataclass(frozen=True)
class Rule:
    name: str
    preforms: tuple

    def __post_init__(self):
        object.__setattr__(self, "preforms", tuple(self.preforms))
        if not self.preforms:
            raise InputError(f"rule {self.name!r} has no preforms")

    @property
    def simultaneous(self) -> bool:
        return len(self.preforms) > 1

    def inverse(self) -> "Rule":
        return Rule(self.name, tuple(p.inverse() for p in self.preforms))


def rule(name: str, left: Net, right: Net, new_tags: Iterable[str] = ()) -> Rule:
    return Rule(name, (Preform(left, right, frozenset(new_tags)),))


# -- conditions ----------------------------------------------------------------

@dataclass(frozen=True)
class FreshLetters:
    """Normal forms may not keep any ranked letter of the start jungle."""

    kind = "fresh-letters"


@dataclass(frozen=True)
class ApplyOrder:
    """Priority order: only the earliest listed rule with a match applies.

    Unlisted rules rank after every listed one.
    """

    names: tuple
    kind = "order"

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))


@dataclass(frozen=True)
class RedexRestriction:
    """``predicate(host, match) -> bool`` filters candidate redexes."""

    predicate: Callable = field(compare=False)
    label: str = "restriction"
    kind = "redex-restriction"


@dataclass(frozen=True)
class RedexDisjoint:
    """Redexes may not contain letters produced by the system's right sides."""

    kind = "redex-disjoint"


@dataclass(frozen=True)
class LettersOutside:
    """Results must avoid the given letters (else ConditionViolated)."""

    letters: frozenset
    kind = "letters-outside"

    def __post_init__(self):
        object.__setattr__(self, "letters", frozenset(self.letters))


CONDITION_KINDS = (FreshLetters, ApplyOrder, RedexRestriction, RedexDisjoint, LettersOutside)


@dataclass(frozen=True)
class Rns:
    name: str
    rules: tuple = ()
    conditions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "conditions", tuple(self.conditions))
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate rule names in {self.name!r}")
        for c in self.conditions:
            if not isinstance(c, CONDITION_KINDS):
                raise InputError(f"unknown condition {c!r}")
            if isinstance(c, ApplyOrder):
                unknown = set(c.names) - set(names)
                if unknown:
                    raise InputError(f"order names unknown rules {sorted(unknown)}")

    def condition(self, kind):
        return next((c for c in self.conditions if isinstance(c, kind)), None)

    def has(self, kind) -> bool:
        return self.condition(kind) is not None

    def preforms(self) -> list[tuple[Rule, int, Preform]]:
        return [(r, k, p) for r in self.rules for k, p in enumerate(r.preforms)]

    def right_letters(self) -> frozenset:
        out = set()
        for _, _, p in self.preforms():
            out |= p.right.letters()
        return frozenset(out)

    def left_letters(self) -> frozenset:
        out = set()
        for _, _, p in self.preforms():
            out |= p.left.letters()
        return frozenset(out)

    def rule_named(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def with_conditions(self, *conds) -> "Rns":
        return replace(self, conditions=tuple(self.conditions) + tuple(conds))

    def __len__(self):
        return len(self.rules)


def as_rns(r) -> Rns:
    if isinstance(r, Rns):
        return r
    if isinstance(r, Rule):
        return Rns(r.name, (r,))
    if isinstance(r, Preform):
        return Rns("r", (Rule("r", (r,)),))
    raise TypeError(f"not a rule or RNS: {r!r}")


def invert_rns(r) -> Rns:
    """Swap every preform. Conditions carry over unchanged."""
    r = as_rns(r)
    return Rns(_inv_name(r.name), tuple(x.inverse() for x in r.rules), r.conditions)


def _inv_name(name: str) -> str:
    return name[:-3] if name.endswith("^-1") else name + "^-1"


def rns_of_relation(pairs: Iterable[tuple[Net, Iterable[Net]]], name: str = "rel") -> Rns:
    """The relation RNS: one (possibly simultaneous) rule ``s -> T`` per pair.

    A right jungle becomes one preform per member net; the empty jungle maps
    to a deleting preform. Boundary tags of ``s`` are kept when a member
    carries the same tag names.
    """
    rules = []
    for k, (s, targets) in enumerate(pairs):
        targets = list(targets) or [Net({})]
        pre = tuple(
            Preform(s, t, frozenset(set(t.tags) - set(s.tags))) for t in sorted(targets, key=lambda n: n.key)
        )
        rules.append(Rule(f"{name}{k}", pre))
    return Rns(name, tuple(rules))


def rns_equal(a: Rns, b: Rns) -> bool:
    """Structural equality up to rule names: same multiset of preform sides+interfaces."""

    def sig(r: Rns):
        items = []
        for rule_ in r.rules:
            items.append(
                tuple(
                    sorted(
                        (p.left.tagged_key, p.right.tagged_key, tuple(sorted(p.new_tags)))
                        for p in rule_.preforms
                    )
                )
            )
        return sorted(items)

    return sig(a) == sig(b)
