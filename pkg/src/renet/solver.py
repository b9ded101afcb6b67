"""Recognizers, problems, the solution memory, and transfer solving."""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .abstraction import Exhausted, OriginWitness, abstract_sisters, search_common_origin
from .enclosure import is_enclosure
from .errors import BudgetExhausted, ConstructionUnsupported, CorruptEntry, InputError, NotSisters, RenetError
from .macro import parallel_td
from .net import Net, delta_d
from .netf import parse, print_net, print_rns
from .realize import AlgebraSpec, evaluate, _port
from .rewrite import Stage, Transducer, apply_transducer, as_jungle, derive, normal_forms, ordered
from .rules import Rns
from .net import port_name


# -- recognizers -----------------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalFormMembership:
    """Every normal form under ``rns`` contains ``require`` and avoids ``forbid`` letters."""

    rns: Rns
    require: frozenset = frozenset()
    forbid: frozenset = frozenset()
    kind = "normal-form-membership"

    def check(self, j: frozenset, budget: int) -> bool:
        nfs = normal_forms(self.rns, j, budget)
        return bool(nfs) and all(self.require <= n.letters() and not (self.forbid & n.letters()) for n in nfs)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "rns": print_rns(self.rns),
            "require": sorted(self.require),
            "forbid": sorted(self.forbid),
        }


@dataclass(frozen=True)
class PatternContainment:
    """Some (or every) net of the jungle encloses ``pattern``."""

    pattern: Net
    every: bool = True
    kind = "pattern-containment"

    def check(self, j: frozenset, budget: int) -> bool:
        hits = [is_enclosure(self.pattern, n) for n in ordered(j)]
        return bool(hits) and (all(hits) if self.every else any(hits))

    def to_json(self) -> dict:
        return {"kind": self.kind, "pattern": print_net(self.pattern, "pattern"), "every": self.every}


@dataclass(frozen=True)
class DeltaSignature:
    total: int
    n_in: int
    n_out: int
    kind = "delta-signature"

    def check(self, j: frozenset, budget: int) -> bool:
        return tuple(delta_d(j)) == (self.total, self.n_in, self.n_out)

    def to_json(self) -> dict:
        return {"kind": self.kind, "target": [self.total, self.n_in, self.n_out]}


@dataclass(frozen=True)
class RealizationCheck:
    """Every net realizes ``expected`` outputs from ``inputs`` over ``algebra``."""

    algebra: AlgebraSpec
    inputs: tuple  # ((port, value), ...)
    expected: tuple  # ((port, (values...)), ...)
    kind = "realization-check"

    def check(self, j: frozenset, budget: int) -> bool:
        if not j:
            return False
        want = {_port(p): frozenset(v) for p, v in self.expected}
        for n in ordered(j):
            got = evaluate(n, self.algebra, dict(self.inputs)).outputs
            if any(got.get(p) != v for p, v in want.items()):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "algebra": self.algebra.to_json(),
            "inputs": {str(p) if not isinstance(p, tuple) else port_name(p): v for p, v in self.inputs},
            "expected": {
                str(p) if not isinstance(p, tuple) else port_name(p): sorted(v, key=str) for p, v in self.expected
            },
        }


@dataclass(frozen=True)
class Conjunction:
    parts: tuple
    kind = "conjunction"

    def check(self, j: frozenset, budget: int) -> bool:
        return all(p.check(j, budget) for p in self.parts)

    def to_json(self) -> dict:
        return {"kind": self.kind, "parts": [p.to_json() for p in self.parts]}


Recognizer = Union[NormalFormMembership, PatternContainment, DeltaSignature, RealizationCheck, Conjunction]


def recognizer_from_json(doc: dict) -> Recognizer:
    try:
        kind = doc["kind"]
        if kind == "normal-form-membership":
            rns = next(iter(parse(doc["rns"]).rns.values()))
            return NormalFormMembership(rns, frozenset(doc.get("require", ())), frozenset(doc.get("forbid", ())))
        if kind == "pattern-containment":
            return PatternContainment(next(iter(parse(doc["pattern"]).nets.values())), doc.get("every", True))
        if kind == "delta-signature":
            return DeltaSignature(*map(int, doc["target"]))
        if kind == "realization-check":
            return RealizationCheck(
                AlgebraSpec.from_json(doc["algebra"]),
                tuple(sorted(doc["inputs"].items())),
                tuple(sorted((p, tuple(v)) for p, v in doc["expected"].items())),
            )
        if kind == "conjunction":
            return Conjunction(tuple(recognizer_from_json(p) for p in doc["parts"]))
    except (KeyError, TypeError, StopIteration) as e:
        raise InputError(f"malformed recognizer: {e}") from e
    raise InputError(f"unknown recognizer kind {doc.get('kind')!r}")


def recognize(rec: Recognizer, j, budget: int = 32) -> bool:
    """Raises BudgetExhausted when the verdict is unknown."""
    return rec.check(as_jungle(j), budget)


def models(r, s, t, budget: int) -> bool:
    """Every net of ``t`` is reachable from ``s`` under the transducer's systems."""
    t = as_jungle(t)
    if not t:
        return True
    td = r if isinstance(r, Transducer) else _single(r)
    systems = [x for st in td.stages for x in st.systems]
    reached = set(apply_transducer(td, s))
    if t <= reached:
        return True
    d = derive(systems, s, budget) if systems else None
    if d is not None:
        reached |= d.nets
    if t <= reached:
        return True
    if d is not None and d.budget_exhausted:
        raise BudgetExhausted("reachability not settled within the step budget", frozenset(reached))
    return False


def associated_member(tup: Sequence, mode: str = "split", pairs: Iterable[tuple] = ()) -> bool:
    tup = [as_jungle(x) for x in tup]
    for i, k in pairs:
        if not (1 <= i <= len(tup) and 1 <= k <= len(tup)):
            raise InputError(f"pair ({i}, {k}) out of range")
        if not abstract_sisters(tup[i - 1], tup[k - 1], mode):
            return False
    return True


# -- problems --------------------------------------------------------------------------------------

@dataclass(frozen=True)
class Limits:
    max_derivation_steps: int = 16
    max_td_stages: int = 8
    max_origin_nodes: int = 4
    wall_budget: float = 60.0

    def __post_init__(self):
        if min(self.max_derivation_steps, self.max_origin_nodes) < 0 or self.max_td_stages < 0:
            raise InputError("limits must be non-negative")


@dataclass(frozen=True)
class Problem:
    subject: frozenset
    recognizer: Recognizer
    limits: Limits = Limits()

    def __post_init__(self):
        object.__setattr__(self, "subject", as_jungle(self.subject))

    @property
    def mother(self) -> Net:
        return ordered(self.subject)[0]


@dataclass(frozen=True)
class SolutionCheck:
    presolution: bool
    solution: bool
    product: frozenset


def _single(r) -> Transducer:
    from .rules import as_rns

    rns = as_rns(r)
    return Transducer((Stage("s0", (rns,), 1, "steps"),), rns.name)


def check_solution(td, p: Problem) -> SolutionCheck:
    td = td if isinstance(td, Transducer) else _single(td)
    product = apply_transducer(td, p.subject)
    pre = recognize(p.recognizer, product, p.limits.max_derivation_steps)
    within = len(td.stages) <= p.limits.max_td_stages and all(
        s.budget <= p.limits.max_derivation_steps for s in td.stages
    )
    return SolutionCheck(pre, pre and within, product)


# -- memory ----------------------------------------------------------------------------------------

@dataclass
class Entry:
    subject: Net
    solution: Transducer
    recognizer: Recognizer
    metadata: dict = field(default_factory=dict)

    @property
    def signature(self) -> tuple:
        return tuple(delta_d(self.subject))


@dataclass
class MemoryBank:
    entries: list = field(default_factory=list)
    quarantined: list = field(default_factory=list)  # (entry dir, reason)

    def add(self, subject: Net, solution, recognizer: Recognizer, **metadata) -> Entry:
        td = solution if isinstance(solution, Transducer) else _single(solution)
        e = Entry(subject, td, recognizer, dict(metadata))
        self.entries.append(e)
        return e

    def __len__(self):
        return len(self.entries)


def transducer_to_json(td: Transducer) -> dict:
    return {
        "name": td.name,
        "stages": [
            {
                "name": s.name,
                "budget": s.budget,
                "mode": s.mode,
                "after": None if s.after is None else list(s.after),
                "systems": [print_rns(x) for x in s.systems],
            }
            for s in td.stages
        ],
    }


def transducer_from_json(doc: dict) -> Transducer:
    try:
        stages = []
        for s in doc["stages"]:
            systems = tuple(next(iter(parse(text).rns.values())) for text in s["systems"])
            after = s.get("after")
            stages.append(Stage(s["name"], systems, int(s["budget"]), s.get("mode", "steps"),
                                None if after is None else tuple(after)))
        return Transducer(tuple(stages), doc.get("name", "td"))
    except (KeyError, TypeError, StopIteration) as e:
        raise InputError(f"malformed transducer manifest: {e}") from e


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save_bank(bank: MemoryBank, path) -> Path:
    root = Path(path)
    if root.exists():
        for child in root.glob("entry-*"):
            shutil.rmtree(child)
    root.mkdir(parents=True, exist_ok=True)
    names = []
    for k, e in enumerate(bank.entries):
        d = root / f"entry-{k:03d}"
        d.mkdir()
        (d / "subject.netf").write_text(print_net(e.subject, "subject"))
        (d / "transducer.json").write_text(_dump(transducer_to_json(e.solution)))
        meta = {"recognizer": e.recognizer.to_json(), "signature": list(e.signature), "metadata": e.metadata}
        (d / "meta.json").write_text(_dump(meta))
        names.append(d.name)
    (root / "manifest.json").write_text(_dump({"entries": names, "version": 1}))
    return root


def _load_entry(d: Path) -> Entry:
    try:
        subject = next(iter(parse((d / "subject.netf").read_text()).nets.values()))
        td = transducer_from_json(json.loads((d / "transducer.json").read_text()))
        meta = json.loads((d / "meta.json").read_text())
        rec = recognizer_from_json(meta["recognizer"])
    except (OSError, ValueError, KeyError, StopIteration, RenetError) as e:
        raise CorruptEntry(f"{d.name}: unreadable ({e})") from e
    if list(delta_d(subject)) != list(meta.get("signature", [])):
        raise CorruptEntry(f"{d.name}: recorded signature does not match the subject")
    try:
        ok = check_solution(td, Problem(frozenset([subject]), rec)).presolution
    except BudgetExhausted as e:
        raise CorruptEntry(f"{d.name}: verification ran out of budget ({e})") from e
    if not ok:
        raise CorruptEntry(f"{d.name}: stored solution no longer satisfies its recognizer")
    return Entry(subject, td, rec, meta.get("metadata", {}))


def load_bank(path) -> MemoryBank:
    """Load and re-verify every entry; failures are quarantined, not fatal."""
    root = Path(path)
    try:
        manifest = json.loads((root / "manifest.json").read_text())
    except (OSError, ValueError) as e:
        raise InputError(f"{root}: no readable manifest ({e})") from e
    bank = MemoryBank()
    for name in manifest.get("entries", []):
        try:
            bank.entries.append(_load_entry(root / name))
        except CorruptEntry as e:
            bank.quarantined.append((name, str(e)))
    return bank


# -- solving ---------------------------------------------------------------------------------------

@dataclass
class SolveReport:
    status: str  # "solved" | "no-solution-within-budget"
    method: str = ""  # "trivial" | "direct" | "transfer"
    solution: Optional[Transducer] = None
    product: frozenset = frozenset()
    witness: Optional[OriginWitness] = None
    trace: list = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == "solved"

    def to_json(self) -> dict:
        doc = {"status": self.status, "method": self.method, "trace": self.trace}
        if self.solution is not None:
            doc["solution"] = transducer_to_json(self.solution)
            doc["product"] = [print_net(n, f"p{k}") for k, n in enumerate(ordered(self.product))]
        if self.witness is not None:
            doc["witness"] = {**self.witness.summary(), "origin": print_net(self.witness.origin, "origin")}
        return doc


def _attempt(td, p: Problem, label: str, trace: list) -> Optional[SolutionCheck]:
    try:
        res = check_solution(td, p)
    except BudgetExhausted as e:
        trace.append({"step": label, "result": "unknown", "reason": str(e)})
        return None
    trace.append({"step": label, "result": "solved" if res.solution else "rejected"})
    return res if res.solution else None


def _distance(a: tuple, b: tuple) -> int:
    return sum(abs(x - y) for x, y in zip(a, b))


def solve(p: Problem, mem: MemoryBank, auto_insert: bool = False) -> SolveReport:
    """Trivial transducer, then stored solutions as-is, then transfer through common origins."""
    trace: list = []
    trivial = Transducer((), "trivial")
    res = _attempt(trivial, p, "trivial", trace)
    if res:
        return SolveReport("solved", "trivial", trivial, res.product, None, trace)
    for k, e in enumerate(mem.entries):
        res = _attempt(e.solution, p, f"direct:{k}", trace)
        if res:
            return _finish(SolveReport("solved", "direct", e.solution, res.product, None, trace), p, mem, auto_insert)
    mother = p.mother
    sig = tuple(delta_d(mother))
    candidates = [
        (_distance(e.signature, sig), k, e) for k, e in enumerate(mem.entries)
        if abstract_sisters(e.subject, mother, "split")
    ]
    for k, e in enumerate(mem.entries):
        if not abstract_sisters(e.subject, mother, "split"):
            trace.append({"step": f"transfer:{k}", "result": "skipped", "reason": "not sisters"})
    for _, k, e in sorted(candidates, key=lambda c: (c[0], c[1])):
        label = f"transfer:{k}"
        try:
            w = search_common_origin(e.subject, mother, p.limits.max_origin_nodes)
        except (NotSisters, BudgetExhausted) as err:
            trace.append({"step": label, "result": "unknown", "reason": str(err)})
            continue
        if isinstance(w, Exhausted):
            trace.append({"step": label, "result": "exhausted", "reason": w.reason})
            continue
        try:
            pair = parallel_td(e.solution, w)
        except (ConstructionUnsupported, BudgetExhausted) as err:
            trace.append({"step": label, "result": "unsupported", "reason": str(err)})
            continue
        res = _attempt(pair.parallel, p, label, trace)
        if res:
            return _finish(SolveReport("solved", "transfer", pair.parallel, res.product, w, trace), p, mem, auto_insert)
    trace.append({"step": "clrns-transfer", "result": "unattempted"})
    return SolveReport("no-solution-within-budget", "", None, frozenset(), None, trace)


def _finish(rep: SolveReport, p: Problem, mem: MemoryBank, auto_insert: bool) -> SolveReport:
    if auto_insert:
        mem.add(p.mother, rep.solution, p.recognizer, method=rep.method)
    return rep
