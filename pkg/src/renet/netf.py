"""NETF v1: a line-friendly text format for nets, rules and RNS, plus DOT export.

    # comment
    net D1 {
      node n1 f in=2 out=1
      node n2 a in=0 out=1
      edge n2:out:0 -- n1:in:0
      tag free n1:in:1
    }
    rule R1 { preform { left @FL right { node x h in=2 out=1 ... } new "t9" } }
    rns W { rule R1 condition fresh-letters condition order "R1" }
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import InputError, ParseError
from .net import IN, OUT, Net, Node, var_node
from .rules import (
    ApplyOrder,
    FreshLetters,
    LettersOutside,
    Preform,
    RedexDisjoint,
    RedexRestriction,
    Rns,
    Rule,
)

_TOKEN = re.compile(r'\s+|#[^\n]*|"(?:[^"\\]|\\.)*"|[{}]|[^\s{}"]+')


@dataclass
class Token:
    text: str
    line: int
    col: int
    quoted: bool = False


def tokenize(text: str) -> list[Token]:
    out = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        s = m.group(0)
        if not (s.isspace() or s.startswith("#")):
            quoted = s.startswith('"')
            out.append(Token(s[1:-1].replace('\\"', '"') if quoted else s, line, pos - line_start + 1, quoted))
        for k, ch in enumerate(s):
            if ch == "\n":
                line += 1
                line_start = pos + k + 1
        pos = m.end()
    return out


@dataclass
class Document:
    nets: dict = field(default_factory=dict)
    rules: dict = field(default_factory=dict)
    rns: dict = field(default_factory=dict)

    def merge(self, other: "Document") -> "Document":
        return Document({**self.nets, **other.nets}, {**self.rules, **other.rules}, {**self.rns, **other.rns})


class _Parser:
    def __init__(self, text: str, env: Optional[Document] = None):
        self.toks = tokenize(text)
        self.k = 0
        self.doc = Document()
        self.env = env or Document()

    # token helpers
    def peek(self) -> Optional[Token]:
        return self.toks[self.k] if self.k < len(self.toks) else None

    def next(self, what: str = "token") -> Token:
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else Token("", 1, 1)
            raise ParseError(f"unexpected end of input, expected {what}", last.line, last.col)
        self.k += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next(repr(text))
        if t.text != text or t.quoted:
            raise ParseError(f"expected {text!r}, got {t.text!r}", t.line, t.col)
        return t

    def word(self, what: str) -> Token:
        t = self.next(what)
        if t.text in ("{", "}") and not t.quoted:
            raise ParseError(f"expected {what}, got {t.text!r}", t.line, t.col)
        return t

    # grammar
    def document(self) -> Document:
        while self.peek() is not None:
            t = self.next()
            if t.text == "net":
                name = self.word("net name").text
                self.doc.nets[name] = self.net_body(name)
            elif t.text == "rule":
                name = self.word("rule name").text
                self.doc.rules[name] = self.rule_body(name)
            elif t.text == "rns":
                name = self.word("rns name").text
                self.doc.rns[name] = self.rns_body(name)
            else:
                raise ParseError(f"expected 'net', 'rule' or 'rns', got {t.text!r}", t.line, t.col)
        return self.doc

    def _int(self, tok: Token, prefix: str) -> int:
        if not tok.text.startswith(prefix):
            raise ParseError(f"expected {prefix}N, got {tok.text!r}", tok.line, tok.col)
        try:
            return int(tok.text[len(prefix):])
        except ValueError:
            raise ParseError(f"bad integer in {tok.text!r}", tok.line, tok.col) from None

    def _port(self, tok: Token):
        parts = tok.text.rsplit(":", 2)
        if len(parts) != 3 or parts[1] not in (IN, OUT):
            raise ParseError(f"bad port {tok.text!r} (want NODE:in|out:INDEX)", tok.line, tok.col)
        try:
            return (parts[0], parts[1], int(parts[2]))
        except ValueError:
            raise ParseError(f"bad port index in {tok.text!r}", tok.line, tok.col) from None

    def net_body(self, name: str) -> Net:
        start = self.expect("{")
        nodes, edges, tags = {}, [], {}
        while True:
            t = self.next("net statement or '}'")
            if t.text == "}" and not t.quoted:
                break
            if t.text == "node":
                nid = self.word("node id")
                label = self.word("label").text
                n_in = self._int(self.word("in=K"), "in=")
                n_out = self._int(self.word("out=M"), "out=")
                if nid.text in nodes:
                    raise ParseError(f"duplicate node id {nid.text!r}", nid.line, nid.col)
                nodes[nid.text] = Node(label, n_in, n_out)
            elif t.text == "var":
                nid = self.word("var id")
                vname = self.word("variable name").text
                if nid.text in nodes:
                    raise ParseError(f"duplicate node id {nid.text!r}", nid.line, nid.col)
                nodes[nid.text] = var_node(vname)
            elif t.text == "edge":
                a = self._port(self.word("port"))
                self.expect("--")
                btok = self.word("port")
                b = self._port(btok)
                if a[1] == IN and b[1] == OUT:
                    a, b = b, a
                if a[1] != OUT or b[1] != IN:
                    raise ParseError("edge must join an out-port and an in-port", btok.line, btok.col)
                edges.append((a[0], a[2], b[0], b[2]))
            elif t.text == "tag":
                tname = self.word("tag name")
                if tname.text in tags:
                    raise ParseError(f"duplicate tag {tname.text!r}", tname.line, tname.col)
                tags[tname.text] = self._port(self.word("port"))
            else:
                raise ParseError(f"unknown net statement {t.text!r}", t.line, t.col)
        if len(set(edges)) != len(edges):
            raise ParseError("edge listed twice", start.line, start.col)
        try:
            return Net(nodes, edges, tags, name=name)
        except InputError as e:
            raise ParseError(f"net {name!r}: {type(e).__name__}: {e}", start.line, start.col) from e

    def net_ref(self, what: str) -> Net:
        t = self.peek()
        if t is not None and t.text == "{" and not t.quoted:
            return self.net_body("")
        tok = self.word(what)
        if not tok.text.startswith("@"):
            raise ParseError(f"expected net literal or @NAME, got {tok.text!r}", tok.line, tok.col)
        ref = tok.text[1:]
        for src in (self.doc.nets, self.env.nets):
            if ref in src:
                return src[ref]
        raise ParseError(f"unknown net {ref!r}", tok.line, tok.col)

    def rule_body(self, name: str) -> Rule:
        start = self.expect("{")
        preforms = []
        while True:
            t = self.next("'preform' or '}'")
            if t.text == "}" and not t.quoted:
                break
            if t.text != "preform":
                raise ParseError(f"expected 'preform', got {t.text!r}", t.line, t.col)
            self.expect("{")
            left = right = None
            new: frozenset = frozenset()
            while True:
                s = self.next("'left', 'right', 'new' or '}'")
                if s.text == "}" and not s.quoted:
                    break
                if s.text == "left":
                    left = self.net_ref("left side")
                elif s.text == "right":
                    right = self.net_ref("right side")
                elif s.text == "new":
                    q = self.next("quoted tag list")
                    new = frozenset(x.strip() for x in q.text.split(",") if x.strip())
                else:
                    raise ParseError(f"unknown preform statement {s.text!r}", s.line, s.col)
            if left is None or right is None:
                raise ParseError("preform needs both left and right", t.line, t.col)
            try:
                preforms.append(Preform(left, right, new))
            except InputError as e:
                raise ParseError(str(e), t.line, t.col) from e
        if not preforms:
            raise ParseError(f"rule {name!r} has no preforms", start.line, start.col)
        return Rule(name, tuple(preforms))

    def rns_body(self, name: str) -> Rns:
        start = self.expect("{")
        rules, conds = [], []
        while True:
            t = self.next("'rule', 'condition' or '}'")
            if t.text == "}" and not t.quoted:
                break
            if t.text == "rule":
                ref = self.word("rule name")
                nxt = self.peek()
                if nxt is not None and nxt.text == "{" and not nxt.quoted:
                    rules.append(self.rule_body(ref.text))
                else:
                    found = self.doc.rules.get(ref.text) or self.env.rules.get(ref.text)
                    if found is None:
                        raise ParseError(f"unknown rule {ref.text!r}", ref.line, ref.col)
                    rules.append(found)
            elif t.text == "condition":
                kind = self.word("condition kind")
                if kind.text == "fresh-letters":
                    conds.append(FreshLetters())
                elif kind.text == "redex-disjoint":
                    conds.append(RedexDisjoint())
                elif kind.text in ("order", "letters-outside"):
                    q = self.next("quoted list")
                    if not q.quoted:
                        raise ParseError("expected a quoted list", q.line, q.col)
                    items = tuple(x.strip() for x in q.text.split(",") if x.strip())
                    conds.append(ApplyOrder(items) if kind.text == "order" else LettersOutside(frozenset(items)))
                else:
                    raise ParseError(f"unknown condition {kind.text!r}", kind.line, kind.col)
            else:
                raise ParseError(f"unknown rns statement {t.text!r}", t.line, t.col)
        try:
            return Rns(name, tuple(rules), tuple(conds))
        except InputError as e:
            raise ParseError(str(e), start.line, start.col) from e


def parse(text: str, env: Optional[Document] = None) -> Document:
    return _Parser(text, env).document()


def parse_net(text: str) -> Net:
    doc = parse(text)
    if len(doc.nets) != 1:
        raise ParseError(f"expected exactly one net, found {len(doc.nets)}")
    return next(iter(doc.nets.values()))


# -- printing --------------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def _net_lines(net: Net) -> list[str]:
    lines = []
    for nid in sorted(net.nodes):
        n = net.nodes[nid]
        if n.var:
            lines.append(f"var {nid} {n.letter}")
        else:
            lines.append(f"node {nid} {n.letter} in={n.n_in} out={n.n_out}")
    for u, i, v, j in sorted(net.edges):
        lines.append(f"edge {u}:out:{i} -- {v}:in:{j}")
    for t in sorted(net.tags):
        nid, d, k = net.tags[t]
        lines.append(f"tag {t} {nid}:{d}:{k}")
    return lines


def _block(head: str, lines: list[str], indent: str) -> str:
    if not lines:
        return f"{indent}{head} {{\n{indent}}}\n"
    body = "".join(f"{indent}  {x}\n" for x in lines)
    return f"{indent}{head} {{\n{body}{indent}}}\n"


def print_net(net: Net, name: Optional[str] = None) -> str:
    return _block(f"net {name or net.name or 'N'}", _net_lines(net), "")


def _inline(head: str, net: Net, indent: str) -> list[str]:
    text = _block(head, _net_lines(net), "")
    return text.rstrip("\n").split("\n")


def print_rule(r: Rule) -> str:
    lines = []
    for p in r.preforms:
        lines.append("preform {")
        lines += ["  " + x for x in _inline("left", p.left, "")]
        lines += ["  " + x for x in _inline("right", p.right, "")]
        if p.new_tags:
            lines.append("  new " + _q(",".join(sorted(p.new_tags))))
        lines.append("}")
    return _block(f"rule {r.name}", lines, "")


def print_rns(r: Rns) -> str:
    lines = []
    for rule_ in r.rules:
        lines += print_rule(rule_).rstrip("\n").split("\n")
    for c in r.conditions:
        if isinstance(c, FreshLetters):
            lines.append("condition fresh-letters")
        elif isinstance(c, RedexDisjoint):
            lines.append("condition redex-disjoint")
        elif isinstance(c, ApplyOrder):
            lines.append("condition order " + _q(",".join(c.names)))
        elif isinstance(c, LettersOutside):
            lines.append("condition letters-outside " + _q(",".join(sorted(c.letters))))
        elif isinstance(c, RedexRestriction):
            raise InputError(f"redex restriction {c.label!r} has no textual form")
    return _block(f"rns {r.name}", lines, "")


def print_document(doc: Document) -> str:
    parts = [print_net(n, k) for k, n in sorted(doc.nets.items())]
    parts += [print_rule(r) for _, r in sorted(doc.rules.items())]
    parts += [print_rns(r) for _, r in sorted(doc.rns.items())]
    return "".join(parts)


def canonical_roundtrip(text: str) -> bool:
    first = print_document(parse(text))
    second = print_document(parse(first))
    return first == second


# -- DOT ----------------------------------------------------------------------------

def to_dot(net: Net, name: Optional[str] = None) -> str:
    gname = name or net.name or "net"
    out = [f"digraph {_q(gname)} {{", "  rankdir=BT;"]
    for nid in sorted(net.nodes):
        n = net.nodes[nid]
        shape = "diamond" if n.var else "box"
        out.append(f"  {_q(nid)} [label={_q(nid + ':' + n.letter)}, shape={shape}];")
    for u, i, v, j in sorted(net.edges):
        out.append(f"  {_q(u)} -> {_q(v)} [label={_q(f'out{i}→in{j}')}];")
    for p in net.unoccupied(include_vars=False):
        nid, d, k = p
        stub = f"{nid}.{d}{k}"
        label = net.tag_at.get(p, f"{d}{k}")
        out.append(f"  {_q(stub)} [shape=point];")
        if d == IN:
            out.append(f"  {_q(stub)} -> {_q(nid)} [label={_q(label)}, style=dashed];")
        else:
            out.append(f"  {_q(nid)} -> {_q(stub)} [label={_q(label)}, style=dashed];")
    out.append("}")
    return "\n".join(out) + "\n"
