"""Command-line interface: ``renet <group> <verb> ...``.

Exit codes: 0 success, 1 negative verdict, 2 budget exhausted / unknown /
unsupported, 3 input or usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from typing import Callable, Optional

import jsonschema

from . import abstraction as ab
from . import macro as mc
from .enclosure import PartitionSpec
from .errors import (
    BudgetExhausted,
    ClosureViolation,
    ConstructionUnsupported,
    InputError,
    NotSisters,
    ParseError,
    RenetError,
)
from .net import FreshLetters as LetterSource, Net, delta_d, nets_equal
from .netf import Document, parse, print_net, print_rns, to_dot
from .realize import AlgebraSpec, evaluate, generated_closure
from .rewrite import Transducer, apply, derive, find_matches, normal_forms, ordered
from .rules import Rns, invert_rns
from .solver import (
    Limits,
    MemoryBank,
    Problem,
    load_bank,
    recognizer_from_json,
    save_bank,
    solve,
    transducer_from_json,
    transducer_to_json,
)
from .workspace import Workspace

OK, NEGATIVE, UNKNOWN, INPUT = 0, 1, 2, 3


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- output schemas ---------------------------------------------------------------------------------

_ENVELOPE = {
    "type": "object",
    "required": ["command", "status", "result"],
    "properties": {
        "command": {"type": "string"},
        "status": {"enum": ["ok", "negative", "unknown", "error"]},
        "result": {},
    },
    "additionalProperties": False,
}

_NETS = {"type": "array", "items": {"type": "string"}}
_DELTA = {
    "type": "object",
    "required": ["total", "in", "out"],
    "properties": {k: {"type": "integer", "minimum": 0} for k in ("total", "in", "out")},
}

_MESSAGE = {"type": "object", "required": ["message"], "properties": {"message": {"type": "string"}}}

SCHEMAS: dict[str, dict] = {
    "net parse": {"type": "object", "required": ["nets", "rules", "rns"],
                  "properties": {"nets": _NETS, "rules": _NETS, "rns": _NETS}},
    "net print": {"type": "object", "required": ["netf"], "properties": {"netf": {"type": "string"}}},
    "net eq": {"type": "object", "required": ["equal", "mode"],
               "properties": {"equal": {"type": "boolean"}, "mode": {"type": "string"}}},
    "net delta": _DELTA,
    "net dot": {"type": "object", "required": ["dot"], "properties": {"dot": {"type": "string"}}},
    "rw matches": {"type": "object", "required": ["matches"],
                   "properties": {"matches": {"type": "array", "items": {"type": "object"}}}},
    "rw apply": {"type": "object", "required": ["nets"], "properties": {"nets": _NETS}},
    "rw derive": {"type": "object", "required": ["reached", "cycle", "budget_exhausted"],
                  "properties": {"reached": {"type": "integer"}, "cycle": {"type": "boolean"},
                                 "budget_exhausted": {"type": "boolean"}}},
    "rw normalize": {"type": "object", "required": ["nets"], "properties": {"nets": _NETS}},
    "prns synth": {"type": "object", "required": ["rns", "rules"],
                   "properties": {"rns": {"type": "string"}, "rules": {"type": "integer"}}},
    "prns validate": {"type": "object", "required": ["kind", "ok", "failing"],
                      "properties": {"kind": {"type": "string"}, "ok": {"type": "boolean"},
                                     "failing": {"type": "object"}}},
    "prns concept": {"type": "object", "required": ["nets"], "properties": {"nets": _NETS}},
    "prns roundtrip": {"type": "object", "required": ["nets", "recovered"],
                       "properties": {"nets": _NETS, "recovered": {"type": "boolean"}}},
    "abs sisters": {"type": "object", "required": ["sisters", "mode", "a", "b"],
                    "properties": {"sisters": {"type": "boolean"}, "a": _DELTA, "b": _DELTA}},
    "abs origin": {"type": "object", "required": ["found"],
                   "properties": {"found": {"type": "boolean"}, "netf": {"type": "string"},
                                  "summary": {"type": "object"}, "reason": {"type": "string"}}},
    "abs verify": {"type": "object", "required": ["verified"], "properties": {"verified": {"type": "boolean"}}},
    "macro build": {"type": "object", "required": ["netf"], "properties": {"netf": {"type": "string"}}},
    "macro solve-micro": {"type": "object", "required": ["netf"], "properties": {"netf": {"type": "string"}}},
    "macro verify": {"type": "object", "required": ["holds", "left", "right"],
                     "properties": {"holds": {"type": "boolean"}, "left": _NETS, "right": _NETS}},
    "parallel build": {"type": "object", "required": ["transducer", "witness"],
                       "properties": {"transducer": {"type": "object"}, "witness": {"type": "object"}}},
    "parallel verify": {"type": "object", "required": ["ok", "condition_1", "condition_2", "arity_saving"],
                        "properties": {k: {"type": "boolean"} for k in
                                       ("ok", "condition_1", "condition_2", "arity_saving")}},
    "class apply": {"type": "object", "required": ["key"],
                    "properties": {"key": {"type": "array", "items": {"type": "integer"}}}},
    "class closure": {"type": "object", "required": ["ok", "results", "lemma", "notes"]},
    "realize eval": {"type": "object", "required": ["outputs", "iterations"],
                     "properties": {"outputs": {"type": "object"}, "iterations": {"type": "integer"}}},
    "realize closure": {"type": "object", "required": ["count", "nets"],
                        "properties": {"count": {"type": "integer"}, "nets": _NETS}},
    "solve run": {"type": "object", "required": ["status", "trace"],
                  "properties": {"status": {"type": "string"}, "trace": {"type": "array"}}},
    "solve memory add": {"type": "object", "required": ["entries"], "properties": {"entries": {"type": "integer"}}},
    "solve memory list": {"type": "object", "required": ["entries", "quarantined"],
                          "properties": {"entries": {"type": "array"}, "quarantined": {"type": "array"}}},
}


def validate_output(doc: dict) -> None:
    jsonschema.validate(doc, _ENVELOPE)
    schema = SCHEMAS.get(doc["command"])
    if doc["status"] == "error" or schema is None:
        schema = _MESSAGE if doc["status"] == "error" else {}
    elif doc["status"] == "unknown":
        # budget-limited verbs may still report their partial result
        schema = {"anyOf": [schema, _MESSAGE]}
    jsonschema.validate(doc["result"], schema)


# -- input resolution ------------------------------------------------------------------------------

class Ctx:
    def __init__(self, args, ws: Workspace):
        self.args = args
        self.ws = ws

    def doc(self, path: str) -> Document:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as e:
            raise InputError(f"cannot read {path}: {e.strerror or e}") from e
        return parse(text, self.ws.doc)

    def jungle(self, path: str) -> list[Net]:
        name = None
        if ":" in path and not Path(path).exists():
            path, name = path.rsplit(":", 1)
        doc = self.doc(path)
        if name is not None:
            if name not in doc.nets:
                raise InputError(f"{path}: no net named {name!r}")
            return [doc.nets[name]]
        if not doc.nets:
            raise InputError(f"{path}: no nets")
        return [doc.nets[k] for k in sorted(doc.nets)]

    def net(self, path: str) -> Net:
        nets = self.jungle(path)
        if len(nets) != 1:
            raise InputError(f"{path}: expected one net, found {len(nets)} (use FILE:NAME)")
        return nets[0]

    def rns(self, spec: Optional[str], what: str = "--rns") -> Rns:
        if not spec:
            raise UsageError(f"{what} is required")
        path, name = spec, None
        if not Path(spec).exists() and ":" in spec:
            path, name = spec.rsplit(":", 1)
        if Path(path).exists():
            doc = self.doc(path)
        else:
            doc, name = self.ws.doc, spec
        return _pick_rns(doc, name, spec)

    def budget(self) -> int:
        b = self.args.budget if self.args.budget is not None else self.ws.default("budget")
        if b < 0:
            raise UsageError("--budget must be >= 0")
        return b

    def max_nodes(self) -> int:
        m = self.args.max_nodes if self.args.max_nodes is not None else self.ws.default("max_nodes")
        if m < 1:
            raise UsageError("--max-nodes must be >= 1")
        return m


def _pick_rns(doc: Document, name: Optional[str], spec: str) -> Rns:
    if name is not None:
        for table in (doc.rns, doc.rules):
            for key in (name, name.upper(), name.lower()):
                if key in table:
                    return ab._rns(table[key])
        raise InputError(f"no rns or rule named {name!r}")
    if doc.rns:
        return doc.rns[sorted(doc.rns)[0]]
    if doc.rules:
        return Rns(Path(spec).stem, tuple(doc.rules[k] for k in sorted(doc.rules)))
    raise InputError(f"{spec}: no rns or rules")


def _netf_list(nets) -> list[str]:
    return [print_net(n, f"r{k}") for k, n in enumerate(ordered(nets))]


def _delta(j) -> dict:
    d = delta_d(j)
    return {"total": d.total, "in": d.n_in, "out": d.n_out}


def _prns_from_rns(r: Rns) -> ab.Prns:
    block_map = {}
    for rl in r.rules:
        pre = rl.preforms[0]
        letters = sorted(pre.right.letters())
        block_map[rl.name] = (pre.left, letters[0] if letters else "")
    return ab.Prns(r, block_map)


# -- command handlers: each returns (status, result, text) ------------------------------------------

Result = tuple  # (exit code, result dict, human text)


def net_parse(c: Ctx) -> Result:
    doc = c.doc(c.args.file)
    res = {"nets": sorted(doc.nets), "rules": sorted(doc.rules), "rns": sorted(doc.rns)}
    return OK, res, f"{len(doc.nets)} nets, {len(doc.rules)} rules, {len(doc.rns)} rns"


def net_print(c: Ctx) -> Result:
    from .netf import print_document

    text = print_document(c.doc(c.args.file))
    return OK, {"netf": text}, text.rstrip("\n")


def net_eq(c: Ctx) -> Result:
    mode = c.args.mode or "strict"
    if mode not in ("strict", "permuting"):
        raise UsageError("--mode must be strict or permuting for net eq")
    eq = nets_equal(c.net(c.args.a), c.net(c.args.b), mode)
    return (OK if eq else NEGATIVE), {"equal": eq, "mode": mode}, "equal" if eq else "not equal"


def net_delta(c: Ctx) -> Result:
    d = _delta(c.jungle(c.args.file))
    return OK, d, f"{d['total']} (in={d['in']},out={d['out']})"


def net_dot(c: Ctx) -> Result:
    text = to_dot(c.net(c.args.file))
    return OK, {"dot": text}, text.rstrip("\n")


def rw_matches(c: Ctx) -> Result:
    ms = find_matches(c.rns(c.args.rns), c.jungle(c.args.input))
    items = [m.describe() for m in ms]
    text = "\n".join(json.dumps(i, sort_keys=True) for i in items) or "no matches"
    return (OK if ms else NEGATIVE), {"matches": items}, text


def rw_apply(c: Ctx) -> Result:
    res = apply(c.rns(c.args.rns), c.jungle(c.args.input))
    nets = _netf_list(res)
    return OK, {"nets": nets}, "".join(nets).rstrip("\n")


def rw_derive(c: Ctx) -> Result:
    d = derive([c.rns(c.args.rns)], c.jungle(c.args.input), c.budget())
    res = {"reached": len(d.reached), "cycle": d.cycle, "budget_exhausted": d.budget_exhausted}
    text = f"reached {len(d.reached)} nets; cycle={d.cycle}; budget_exhausted={d.budget_exhausted}"
    return (UNKNOWN if d.budget_exhausted else OK), res, text


def rw_normalize(c: Ctx) -> Result:
    res = normal_forms(c.rns(c.args.rns), c.jungle(c.args.input), c.budget())
    nets = _netf_list(res)
    return OK, {"nets": nets}, "".join(nets).rstrip("\n") or "(no normal forms)"


def _blocks(c: Ctx) -> PartitionSpec:
    if not c.args.blocks:
        raise UsageError("--blocks is required (e.g. \"n1,n2|n3\")")
    return PartitionSpec.parse(c.args.blocks)


def _synth(c: Ctx, t: Net) -> ab.Prns:
    blocks = _blocks(c)
    start = c.ws.next_fresh(len(blocks))
    return ab.synthesize_prns(t, blocks, LetterSource("$", start), name=c.args.name or "W")


def prns_synth(c: Ctx) -> Result:
    w = _synth(c, c.net(c.args.input))
    text = print_rns(w.rns)
    return OK, {"rns": text, "rules": len(w.rns.rules)}, text.rstrip("\n")


def prns_validate(c: Ctx) -> Result:
    kind = c.args.kind.upper().replace("GCDRNS", "GCdRNS")
    rep = ab.validate_rns_type(c.rns(c.args.rns), kind, c.jungle(c.args.input), c.max_nodes() * 2)
    failing = rep.failing()
    text = f"{kind}: " + ("valid" if rep.ok else "invalid " + json.dumps(failing, sort_keys=True))
    return (OK if rep.ok else NEGATIVE), {"kind": kind, "ok": rep.ok, "failing": failing}, text


def _prns_arg(c: Ctx, t: Net):
    return c.rns(c.args.rns) if c.args.rns else _synth(c, t)


def prns_concept(c: Ctx) -> Result:
    j = c.jungle(c.args.input)
    w = _prns_arg(c, j[0])
    nets = _netf_list(ab.concept(j, w))
    return OK, {"nets": nets}, "".join(nets).rstrip("\n")


def prns_roundtrip(c: Ctx) -> Result:
    j = c.jungle(c.args.input)
    w = _prns_arg(c, j[0])
    back = ab.roundtrip(j, w)
    ok = back == frozenset(j)
    nets = _netf_list(back)
    return (OK if ok else NEGATIVE), {"nets": nets, "recovered": ok}, "".join(nets).rstrip("\n")


def abs_sisters(c: Ctx) -> Result:
    mode = c.args.mode or "total"
    if mode not in ("total", "split"):
        raise UsageError("--mode must be total or split for abs sisters")
    a, b = c.jungle(c.args.a), c.jungle(c.args.b)
    s = ab.abstract_sisters(a, b, mode)
    res = {"sisters": s, "mode": mode, "a": _delta(a), "b": _delta(b)}
    return (OK if s else NEGATIVE), res, "sisters" if s else "not sisters"


def _witness_netf(w: ab.OriginWitness) -> str:
    return print_net(w.origin, "origin") + print_rns(_renamed(w.w_a, "Wa")) + print_rns(_renamed(w.w_b, "Wb"))


def _renamed(r: Rns, name: str) -> Rns:
    return Rns(name, r.rules, r.conditions)


def abs_origin(c: Ctx) -> Result:
    a, b = c.net(c.args.a), c.net(c.args.b)
    try:
        w = ab.search_common_origin(a, b, c.max_nodes())
    except NotSisters as e:
        return NEGATIVE, {"found": False, "reason": str(e)}, f"not sisters: {e}"
    if isinstance(w, ab.Exhausted):
        return UNKNOWN, {"found": False, "reason": w.reason}, f"exhausted: {w.reason}"
    summary = {**w.summary(), "verified": ab.verify_origin(w, a, b)}
    text = _witness_netf(w)
    return OK, {"found": True, "netf": text, "summary": summary}, text.rstrip("\n")


def abs_verify(c: Ctx) -> Result:
    doc = c.doc(c.args.witness)
    try:
        origin, wa, wb = doc.nets["origin"], doc.rns["Wa"], doc.rns["Wb"]
    except KeyError as e:
        raise InputError(f"witness file lacks {e}") from e
    w = ab.OriginWitness(origin, wa, wb, PartitionSpec(()), PartitionSpec(()))
    ok = ab.verify_origin(w, c.net(c.args.a), c.net(c.args.b))
    return (OK if ok else NEGATIVE), {"verified": ok}, "verified" if ok else "not verified"


def macro_build(c: Ctx) -> Result:
    t = c.net(c.args.input)
    w = _synth(c, t)
    m = mc.build_macro(c.rns(c.args.rns), w, t, c.budget())
    text = print_rns(_renamed(w.rns, "W")) + print_rns(_renamed(m.macro, "M")) + print_rns(
        _renamed(m.post_prns.rns, "W0")
    )
    return OK, {"netf": text}, text.rstrip("\n")


def _three(c: Ctx):
    return (
        _prns_from_rns(c.rns(c.args.w, "--w")),
        c.rns(c.args.macro, "--macro"),
        _prns_from_rns(c.rns(c.args.w0, "--w0")),
    )


def macro_solve_micro(c: Ctx) -> Result:
    w, m, w0 = _three(c)
    micro = mc.solve_micro(m, w, w0, c.args.budget)
    text = print_rns(micro)
    return OK, {"netf": text}, text.rstrip("\n")


def macro_verify(c: Ctx) -> Result:
    w, m, w0 = _three(c)
    micro = c.rns(c.args.rns)
    v = mc.verify_macro_equation(w, m, w0, micro, c.jungle(c.args.input), c.budget())
    res = {"holds": v.holds, "left": _netf_list(v.left), "right": _netf_list(v.right)}
    return (OK if v.holds else NEGATIVE), res, "equation holds" if v.holds else "equation fails"


def _pair(c: Ctx):
    a, b = c.net(c.args.a), c.net(c.args.b)
    w = ab.search_common_origin(a, b, c.max_nodes())
    if isinstance(w, ab.Exhausted):
        raise BudgetExhausted(f"no common origin found: {w.reason}")
    return a, b, mc.parallel_td(c.rns(c.args.rns), w, c.budget())


def parallel_build(c: Ctx) -> Result:
    _, _, pair = _pair(c)
    doc = transducer_to_json(pair.parallel)
    res = {"transducer": doc, "witness": pair.witness.summary()}
    return OK, res, json.dumps(doc, indent=2, sort_keys=True)


def parallel_verify(c: Ctx) -> Result:
    a, b, pair = _pair(c)
    rep = mc.verify_parallel(pair, a, b, c.budget())
    res = {"ok": rep.ok, "condition_1": rep.condition_1, "condition_2": rep.condition_2,
           "arity_saving": rep.arity_saving}
    text = " ".join(f"{k}={v}" for k, v in res.items())
    return (OK if rep.ok else NEGATIVE), res, text


def _algebra(c: Ctx) -> mc.ClassAlgebra:
    nets = [n for f in c.args.nets for n in c.jungle(f)]
    alg = mc.ClassAlgebra.from_nets(nets)
    for spec in c.args.op or []:
        r = c.rns(spec, "--op")
        alg.register(r.name, [r])
    return alg


def _key(text: str) -> tuple:
    try:
        parts = tuple(int(x) for x in text.split(","))
    except ValueError as e:
        raise UsageError(f"bad class key {text!r}; expected total,in,out") from e
    if len(parts) != 3:
        raise UsageError(f"bad class key {text!r}; expected total,in,out")
    return parts


def class_apply(c: Ctx) -> Result:
    alg = _algebra(c)
    op = c.args.op_name or "identity"
    try:
        key = mc.class_apply(alg, _key(c.args.key), op)
    except ClosureViolation as e:
        return NEGATIVE, {"key": []}, f"closure violation: {e}"
    return OK, {"key": list(key)}, ",".join(map(str, key))


def class_closure(c: Ctx) -> Result:
    rep = mc.check_closure(_algebra(c))
    res = {
        "ok": rep.ok,
        "results": {f"{','.join(map(str, k))}|{op}": (v if isinstance(v, str) else list(v))
                    for (k, op), v in sorted(rep.results.items())},
        "lemma": {f"{','.join(map(str, k))}|{op}": v for (k, op), v in sorted(rep.lemma.items())},
        "notes": rep.notes,
    }
    return (OK if rep.ok else NEGATIVE), res, json.dumps(res, indent=2, sort_keys=True)


def _json_file(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from e
    except ValueError as e:
        raise InputError(f"{path}: invalid JSON ({e})") from e


def realize_eval(c: Ctx) -> Result:
    alg = AlgebraSpec.from_json(_json_file(c.args.algebra))
    if c.args.inputs and Path(c.args.inputs).is_file():
        inputs = _json_file(c.args.inputs)
    else:
        try:
            inputs = json.loads(c.args.inputs or "{}")
        except ValueError as e:
            raise InputError(f"--inputs: invalid JSON or missing file ({e})") from e
    ev = evaluate(c.net(c.args.input), alg, inputs, c.args.budget)
    from .net import port_name

    outputs = {port_name(p): sorted(v, key=str) for p, v in sorted(ev.outputs.items())}
    text = "\n".join(f"{p} = {{{', '.join(map(str, v))}}}" for p, v in outputs.items())
    return OK, {"outputs": outputs, "iterations": ev.iterations}, text


def realize_closure(c: Ctx) -> Result:
    alphabet = {}
    for item in (c.args.alphabet or "").split(","):
        if not item.strip():
            continue
        try:
            letter, n_in, n_out = item.strip().split(":")
            alphabet[letter] = (int(n_in), int(n_out))
        except ValueError as e:
            raise UsageError(f"bad alphabet entry {item!r}; expected letter:in:out") from e
    depth = c.args.budget if c.args.budget is not None else 1
    res = generated_closure(c.jungle(c.args.input), alphabet, depth, c.args.max_nodes)
    nets = _netf_list(res)
    return OK, {"count": len(nets), "nets": nets}, f"{len(nets)} nets"


def _memory(c: Ctx) -> Path:
    return Path(c.args.memory or (c.ws.root / c.ws.default("memory") if c.ws.root else "memory"))


def solve_run(c: Ctx) -> Result:
    doc = _json_file(c.args.problem)
    try:
        subject = [n for ref in doc["subject"] for n in c.jungle(ref)]
        rec = recognizer_from_json(doc["recognizer"])
        limits = Limits(**doc.get("limits", {}))
    except (KeyError, TypeError) as e:
        raise InputError(f"malformed problem manifest: {e}") from e
    mem_path = _memory(c)
    bank = load_bank(mem_path) if (mem_path / "manifest.json").exists() else MemoryBank()
    rep = solve(Problem(subject, rec, limits), bank, auto_insert=c.args.auto_insert)
    if c.args.auto_insert and rep.solved:
        save_bank(bank, mem_path)
    res = rep.to_json()
    return (OK if rep.solved else NEGATIVE), res, f"{rep.status} {rep.method}".strip()


def memory_add(c: Ctx) -> Result:
    mem_path = _memory(c)
    bank = load_bank(mem_path) if (mem_path / "manifest.json").exists() else MemoryBank()
    subject = c.net(c.args.subject)
    if c.args.transducer:
        td = transducer_from_json(_json_file(c.args.transducer))
    else:
        td = c.rns(c.args.rns)
    rec = recognizer_from_json(_json_file(c.args.recognizer))
    from .solver import check_solution

    if not check_solution(td, Problem([subject], rec)).presolution:
        return NEGATIVE, {"entries": len(bank)}, "solution does not satisfy the recognizer; not stored"
    bank.add(subject, td, rec)
    save_bank(bank, mem_path)
    return OK, {"entries": len(bank)}, f"{len(bank)} entries"


def memory_list(c: Ctx) -> Result:
    mem_path = _memory(c)
    if not (mem_path / "manifest.json").exists():
        raise InputError(f"{mem_path}: no memory manifest")
    bank = load_bank(mem_path)
    entries = [{"signature": list(e.signature), "stages": len(e.solution.stages),
                "recognizer": e.recognizer.kind} for e in bank.entries]
    quarantined = [{"entry": n, "reason": r} for n, r in bank.quarantined]
    lines = [f"{k}: delta={e['signature']} stages={e['stages']} {e['recognizer']}" for k, e in enumerate(entries)]
    lines += [f"quarantined {q['entry']}: {q['reason']}" for q in quarantined]
    return OK, {"entries": entries, "quarantined": quarantined}, "\n".join(lines) or "(empty)"


# -- parser ----------------------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--budget", type=int, help="step / iteration / depth budget")
    p.add_argument("--max-nodes", type=int, help="node bound for searches")
    p.add_argument("--mode", help="strict|permuting|total|split")
    p.add_argument("--seed", type=int, default=0, help="seed for generator-backed verbs")


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="renet", description="Port-graph rewriting engine.")
    groups = root.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def verb(group_parser, name: str, fn: Callable, *args: tuple) -> argparse.ArgumentParser:
        p = group_parser.add_parser(name)
        _common(p)
        for a in args:
            if a[0].startswith("--"):
                p.add_argument(a[0], **(a[1] if len(a) > 1 else {}))
            else:
                p.add_argument(a[0], **(a[1] if len(a) > 1 else {}))
        p.set_defaults(fn=fn)
        return p

    g = groups.add_parser("net").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    verb(g, "parse", net_parse, ("file",))
    verb(g, "print", net_print, ("file",))
    verb(g, "eq", net_eq, ("a",), ("b",))
    verb(g, "delta", net_delta, ("file",))
    verb(g, "dot", net_dot, ("file",))

    g = groups.add_parser("rw").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for name, fn in (("matches", rw_matches), ("apply", rw_apply), ("derive", rw_derive), ("normalize", rw_normalize)):
        verb(g, name, fn, ("--rns", {"required": True}), ("--input", {"required": True}))

    g = groups.add_parser("prns").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    verb(g, "synth", prns_synth, ("--input", {"required": True}), ("--blocks",), ("--name",))
    verb(g, "validate", prns_validate, ("--rns", {"required": True}), ("--input", {"required": True}),
         ("--kind", {"default": "PRNS"}))
    for name, fn in (("concept", prns_concept), ("roundtrip", prns_roundtrip)):
        verb(g, name, fn, ("--input", {"required": True}), ("--rns",), ("--blocks",), ("--name",))

    g = groups.add_parser("abs").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    verb(g, "sisters", abs_sisters, ("a",), ("b",))
    verb(g, "origin", abs_origin, ("a",), ("b",))
    verb(g, "verify", abs_verify, ("--witness", {"required": True}), ("a",), ("b",))

    g = groups.add_parser("macro").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    verb(g, "build", macro_build, ("--rns", {"required": True}), ("--input", {"required": True}),
         ("--blocks", {"required": True}), ("--name",))
    verb(g, "solve-micro", macro_solve_micro, ("--w", {"required": True}), ("--macro", {"required": True}),
         ("--w0", {"required": True}))
    verb(g, "verify", macro_verify, ("--w", {"required": True}), ("--macro", {"required": True}),
         ("--w0", {"required": True}), ("--rns", {"required": True}), ("--input", {"required": True}))

    g = groups.add_parser("parallel").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for name, fn in (("build", parallel_build), ("verify", parallel_verify)):
        verb(g, name, fn, ("--rns", {"required": True}), ("a",), ("b",))

    g = groups.add_parser("class").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    verb(g, "apply", class_apply, ("--nets", {"nargs": "+", "required": True}), ("--key", {"required": True}),
         ("--op", {"action": "append"}), ("--op-name",))
    verb(g, "closure", class_closure, ("--nets", {"nargs": "+", "required": True}), ("--op", {"action": "append"}))

    g = groups.add_parser("realize").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    verb(g, "eval", realize_eval, ("--input", {"required": True}), ("--algebra", {"required": True}),
         ("--inputs",))
    verb(g, "closure", realize_closure, ("--input", {"required": True}), ("--alphabet", {"required": True}))

    g = groups.add_parser("solve").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    verb(g, "run", solve_run, ("--problem", {"required": True}), ("--memory",),
         ("--auto-insert", {"action": "store_true"}))
    mem = g.add_parser("memory").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    verb(mem, "add", memory_add, ("--memory",), ("--subject", {"required": True}), ("--rns",),
         ("--transducer",), ("--recognizer", {"required": True}))
    verb(mem, "list", memory_list, ("--memory",))
    return root


def _command_name(args) -> str:
    parts = [args.group, args.verb]
    if getattr(args, "sub", None):
        parts.append(args.sub)
    return " ".join(parts)


def _emit(args, command: str, status: str, result, text: str, err: Optional[str] = None) -> None:
    if getattr(args, "json", False):
        doc = {"command": command, "status": status, "result": result}
        validate_output(doc)
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif text:
        sys.stdout.write(text + "\n")
    if err:
        sys.stderr.write(err + "\n")


_STATUS = {OK: "ok", NEGATIVE: "negative", UNKNOWN: "unknown", INPUT: "error"}


def main(argv: Optional[list] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"error: {e}\n")
        return INPUT
    except SystemExit as e:  # --help
        return OK if e.code in (0, None) else INPUT
    command = _command_name(args)
    try:
        ctx = Ctx(args, Workspace.load())
        code, result, text = args.fn(ctx)
    except ParseError as e:
        _emit(args, command, "error", {"message": str(e), "line": e.line, "column": e.column}, "", f"error: {e}")
        return INPUT
    except InputError as e:
        _emit(args, command, "error", {"message": str(e)}, "", f"error: {e}")
        return INPUT
    except (BudgetExhausted, ConstructionUnsupported) as e:
        kind = "budget exhausted" if isinstance(e, BudgetExhausted) else "unsupported"
        _emit(args, command, "unknown", {"message": str(e)}, "", f"unknown ({kind}): {e}")
        return UNKNOWN
    except RenetError as e:
        _emit(args, command, "error", {"message": f"{type(e).__name__}: {e}"}, "", f"error: {type(e).__name__}: {e}")
        return INPUT
    _emit(args, command, _STATUS[code], result, text)
    return code


def run(argv: list) -> tuple[int, str, str]:
    """Run in-process, capturing (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":
    sys.exit(main())
