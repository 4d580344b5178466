"""Reading and writing the plain-text system format.

Example::

    sorts nat bool;
    cons 0 : nat;
    cons s : nat -> nat;
    func minus : nat nat -> nat;
    cvar x y : nat;
    rule minus(x,0) = x;
    rule minus(s(x),s(y)) = minus(x,y);

Statements end with ``;`` and ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .criteria import Assumptions
from .crs import CRS, Def, Eq, Neq, Rule, ValidationError, VariableSystem, validate_crs
from .terms import CONSTRUCTOR, GENERAL, App, Signature, Term, Var

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<op>->|==|!=|<=|[;:,()=])
  | (?P<id>[A-Za-z0-9_'][A-Za-z0-9_']*(?:-[A-Za-z][A-Za-z0-9_']*)*)
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


@dataclass
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.col}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics: List[Diagnostic]):
        super().__init__("\n".join(map(str, diagnostics)))
        self.diagnostics = diagnostics


def tokenize(text: str) -> List[Token]:
    out, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError([Diagnostic(line, pos - start + 1,
                                         f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind != "ws":
            out.append(Token(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


@dataclass
class RawTerm:
    name: str
    args: Optional[List["RawTerm"]]   # None for a bare identifier
    tok: Token


class _Stop(Exception):
    pass


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0
        self.diags: List[Diagnostic] = []

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, tok, msg):
        self.diags.append(Diagnostic(tok.line, tok.col, msg))
        raise _Stop

    def expect(self, text):
        t = self.next()
        if t.text != text:
            self.fail(t, f"expected {text!r}, found {t.text or 'end of input'!r}")
        return t

    def ident(self):
        t = self.next()
        if t.kind != "id":
            self.fail(t, f"expected a name, found {t.text or 'end of input'!r}")
        return t

    def skip_statement(self):
        while self.peek().kind != "eof" and self.next().text != ";":
            pass

    def term(self) -> RawTerm:
        t = self.ident()
        if self.peek().text != "(":
            return RawTerm(t.text, None, t)
        self.next()
        args = [self.term()]
        while self.peek().text == ",":
            self.next()
            args.append(self.term())
        self.expect(")")
        return RawTerm(t.text, args, t)

    def literal(self):
        t = self.peek()
        if t.kind == "id" and t.text == "def" and self.toks[self.i + 1].text != "(":
            self.next()
            return ("def", self.term(), None, t)
        left = self.term()
        op = self.next()
        if op.text not in ("==", "!="):
            self.fail(op, f"expected '==' or '!=', found {op.text!r}")
        return (op.text, left, self.term(), t)


@dataclass
class Document:
    crs: CRS
    assumptions: Assumptions


def parse_document(text: str) -> Document:
    """Parse and validate. Raises ParseError with positioned diagnostics."""
    p = _Parser(text)
    sorts: List[str] = []
    symbols: Dict[str, Tuple[Tuple[str, ...], str]] = {}
    cons: List[str] = []
    decl_tok: Dict[str, Token] = {}
    varlist: List[Var] = []
    raw_rules = []
    instantiate = "gvars"
    assumptions = Assumptions()
    while p.peek().kind != "eof":
        start = p.i
        try:
            kw = p.ident()
            if kw.text == "sorts":
                while p.peek().kind == "id":
                    sorts.append(p.next().text)
            elif kw.text in ("cons", "func"):
                name = p.ident()
                p.expect(":")
                sig = []
                while p.peek().kind == "id":
                    sig.append(p.next().text)
                if p.peek().text == "->":
                    p.next()
                    res = p.ident().text
                    args = tuple(sig)
                elif len(sig) == 1:
                    res, args = sig[0], ()
                else:
                    p.fail(p.peek(), "expected '->' or a single result sort")
                if name.text in symbols or name.text in decl_tok:
                    p.fail(name, f"{name.text} declared twice")
                for s in (*args, res):
                    if s not in sorts:
                        p.fail(name, f"undeclared sort {s}")
                symbols[name.text] = (args, res)
                decl_tok[name.text] = name
                if kw.text == "cons":
                    cons.append(name.text)
            elif kw.text in ("cvar", "gvar"):
                names = []
                while p.peek().kind == "id":
                    names.append(p.next())
                p.expect(":")
                s = p.ident()
                if s.text not in sorts:
                    p.fail(s, f"undeclared sort {s.text}")
                for n in names:
                    if n.text in symbols or n.text in decl_tok:
                        p.fail(n, f"{n.text} declared twice")
                    decl_tok[n.text] = n
                    varlist.append(Var(n.text, s.text,
                                       CONSTRUCTOR if kw.text == "cvar" else GENERAL))
            elif kw.text == "instantiate":
                m = p.ident()
                if m.text not in ("gvars", "none", "all"):
                    p.fail(m, "expected gvars, none or all")
                instantiate = m.text
            elif kw.text == "assume":
                m = p.ident()
                if m.text == "terminating":
                    assumptions.terminating = True
                elif m.text == "constructor-confluent":
                    assumptions.constructor_confluent = True
                else:
                    p.fail(m, f"unknown assumption {m.text}")
            elif kw.text == "rule":
                lhs = p.term()
                p.expect("=")
                rhs = p.term()
                conds = []
                if p.peek().text == "<=":
                    p.next()
                    conds.append(p.literal())
                    while p.peek().text == ",":
                        p.next()
                        conds.append(p.literal())
                raw_rules.append((lhs, rhs, conds, kw))
            else:
                p.fail(kw, f"unknown statement {kw.text}")
            p.expect(";")
        except _Stop:
            p.i = start
            p.skip_statement()
    if not sorts:
        p.diags.append(Diagnostic(1, 1, "no sorts declared"))
    if p.diags:
        raise ParseError(p.diags)
    sig = Signature(sorts, symbols, cons)
    varsys = VariableSystem(varlist)
    rules = []
    for lhs, rhs, conds, kw in raw_rules:
        try:
            lits = []
            for op, a, b, tok in conds:
                if op == "def":
                    lits.append(Def(resolve_term(a, sig, varsys)))
                else:
                    cls = Eq if op == "==" else Neq
                    lits.append(cls(resolve_term(a, sig, varsys), resolve_term(b, sig, varsys)))
            rules.append(Rule(resolve_term(lhs, sig, varsys), resolve_term(rhs, sig, varsys),
                              tuple(lits)))
        except ParseError as e:
            p.diags.extend(e.diagnostics)
    if p.diags:
        raise ParseError(p.diags)
    try:
        crs = validate_crs(rules, sig, varsys, instantiate)
    except ValidationError as e:
        raise ParseError([Diagnostic(0, 0, d) for d in e.diagnostics]) from None
    return Document(crs, assumptions)


def resolve_term(raw: RawTerm, sig: Signature, varsys: VariableSystem) -> Term:
    def err(msg):
        raise ParseError([Diagnostic(raw.tok.line, raw.tok.col, msg)])

    if raw.args is None and raw.name in varsys.vars:
        return varsys.vars[raw.name]
    if raw.name not in sig.symbols:
        err(f"unknown symbol {raw.name}")
    args = [resolve_term(a, sig, varsys) for a in (raw.args or [])]
    want, res = sig.symbols[raw.name]
    if len(want) != len(args):
        err(f"{raw.name} expects {len(want)} arguments, got {len(args)}")
    for k, (s, a) in enumerate(zip(want, args), 1):
        if a.sort != s:
            err(f"argument {k} of {raw.name} has sort {a.sort}, expected {s}")
    return App(raw.name, tuple(args), res, raw.name in sig.constructors)


def parse_term(text: str, crs: CRS) -> Term:
    p = _Parser(text)
    try:
        raw = p.term()
        if p.peek().kind != "eof":
            p.fail(p.peek(), f"unexpected {p.peek().text!r} after term")
    except _Stop:
        raise ParseError(p.diags) from None
    return resolve_term(raw, crs.signature, crs.varsys)


def format_document(crs: CRS, assumptions: Optional[Assumptions] = None) -> str:
    """Text that parses back to the same system."""
    sig = crs.signature
    lines = ["sorts " + " ".join(sig.sorts) + ";"]
    for f, (args, res) in sig.symbols.items():
        kw = "cons" if f in sig.constructors else "func"
        lines.append(f"{kw} {f} : " + (" ".join(args) + " -> " if args else "") + res + ";")
    for kind, kw in ((CONSTRUCTOR, "cvar"), (GENERAL, "gvar")):
        by_sort: Dict[str, List[str]] = {}
        for v in crs.varsys:
            if v.kind == kind:
                by_sort.setdefault(v.sort, []).append(v.name)
        for s, names in by_sort.items():
            lines.append(f"{kw} {' '.join(names)} : {s};")
    if crs.instantiate != "gvars":
        lines.append(f"instantiate {crs.instantiate};")
    if assumptions and assumptions.terminating:
        lines.append("assume terminating;")
    if assumptions and assumptions.constructor_confluent:
        lines.append("assume constructor-confluent;")
    for r in crs.rules:
        lines.append(f"rule {r};")
    return "\n".join(lines) + "\n"
