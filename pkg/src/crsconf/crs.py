"""Conditional rewrite systems over a constructor signature."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Sequence, Tuple

from .terms import (CONSTRUCTOR, GENERAL, Signature, Substitution, Term, Var,
                    apply_substitution, fresh_var, is_constructor_term, is_linear,
                    variables)


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def terms(self):
        return (self.left, self.right)

    def substitute(self, sigma):
        return Eq(apply_substitution(self.left, sigma), apply_substitution(self.right, sigma))

    def __str__(self):
        return f"{self.left} == {self.right}"


@dataclass(frozen=True)
class Neq:
    left: Term
    right: Term

    def terms(self):
        return (self.left, self.right)

    def substitute(self, sigma):
        return Neq(apply_substitution(self.left, sigma), apply_substitution(self.right, sigma))

    def __str__(self):
        return f"{self.left} != {self.right}"


@dataclass(frozen=True)
class Def:
    term: Term

    def terms(self):
        return (self.term,)

    def substitute(self, sigma):
        return Def(apply_substitution(self.term, sigma))

    def __str__(self):
        return f"def {self.term}"


Literal = object  # Eq | Neq | Def


def literal_variables(lits) -> List[Var]:
    seen: Dict[Var, None] = {}
    for lit in lits:
        for t in lit.terms():
            for x in variables(t):
                seen.setdefault(x)
    return list(seen)


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term
    conditions: Tuple = ()

    @property
    def is_constructor_rule(self) -> bool:
        """Constructor rules have a constructor lhs (lambda = 0)."""
        return is_constructor_term(self.lhs)

    @property
    def lam(self) -> int:
        return 0 if self.is_constructor_rule else 1

    def variables(self) -> List[Var]:
        seen: Dict[Var, None] = dict.fromkeys(variables(self.lhs))
        seen.update(dict.fromkeys(variables(self.rhs)))
        seen.update(dict.fromkeys(literal_variables(self.conditions)))
        return list(seen)

    def extra_variables(self) -> List[Var]:
        lv = set(variables(self.lhs))
        return [x for x in self.variables() if x not in lv]

    def rhs_extra_variables(self) -> List[Var]:
        lv = set(variables(self.lhs))
        return [x for x in variables(self.rhs) if x not in lv]

    def substitute(self, sigma: Substitution) -> "Rule":
        return Rule(apply_substitution(self.lhs, sigma), apply_substitution(self.rhs, sigma),
                    tuple(c.substitute(sigma) for c in self.conditions))

    def __str__(self):
        s = f"{self.lhs} = {self.rhs}"
        if self.conditions:
            s += " <= " + ", ".join(map(str, self.conditions))
        return s


class VariableSystem:
    """Declared variables, each general or constructor, with a sort."""

    def __init__(self, variables: Sequence[Var] = ()):
        self.vars: Dict[str, Var] = {}
        for v in variables:
            self.add(v)

    def add(self, v: Var):
        if v.name in self.vars and self.vars[v.name] != v:
            raise ValueError(f"variable {v.name} declared twice")
        self.vars[v.name] = v

    def general(self) -> List[Var]:
        return [v for v in self.vars.values() if v.kind == GENERAL]

    def constructor(self) -> List[Var]:
        return [v for v in self.vars.values() if v.kind == CONSTRUCTOR]

    def __iter__(self):
        return iter(self.vars.values())

    def __eq__(self, other):
        return isinstance(other, VariableSystem) and self.vars == other.vars

    __hash__ = None


INSTANTIATIONS = ("gvars", "none", "all")


@dataclass
class CRS:
    """A validated system. ``instantiate`` fixes which variables substitutions
    may leave in place: ``gvars`` (general ones), ``none`` (ground only) or
    ``all``."""

    signature: Signature
    varsys: VariableSystem
    rules: Tuple[Rule, ...]
    instantiate: str = "gvars"

    @property
    def x_has_cvars(self) -> bool:
        return self.instantiate == "all"

    @property
    def x_has_gvars(self) -> bool:
        return self.instantiate in ("gvars", "all")

    def rule_id(self, i: int) -> str:
        return f"rule{i + 1}"

    def constructor_rules(self) -> List[Tuple[int, Rule]]:
        return [(i, r) for i, r in enumerate(self.rules) if r.is_constructor_rule]


class ValidationError(ValueError):
    def __init__(self, diagnostics: List[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


def _check_term(t: Term, sig: Signature, varsys: VariableSystem, where: str, out: List[str]):
    if isinstance(t, Var):
        v = varsys.vars.get(t.name)
        if v is None or v != t:
            out.append(f"{where}: undeclared variable {t.name}")
        return
    if t.fn not in sig.symbols:
        out.append(f"{where}: unknown symbol {t.fn}")
        return
    args, res = sig.symbols[t.fn]
    if res != t.sort or len(args) != len(t.args) or (t.fn in sig.constructors) != t.cons:
        out.append(f"{where}: malformed application of {t.fn}")
        return
    for s, a in zip(args, t.args):
        if a.sort != s:
            out.append(f"{where}: argument {a} of {t.fn} has sort {a.sort}, expected {s}")
        _check_term(a, sig, varsys, where, out)


def validate_crs(rules: Sequence[Rule], signature: Signature, varsys: VariableSystem,
                 instantiate: str = "gvars") -> CRS:
    """Return the CRS or raise ValidationError listing every problem found."""
    out = list(signature.problems())
    if instantiate not in INSTANTIATIONS:
        out.append(f"unknown instantiation mode {instantiate}")
    for v in varsys:
        if v.sort not in signature.sorts:
            out.append(f"variable {v.name} has undeclared sort {v.sort}")
        if v.name in signature.symbols:
            out.append(f"{v.name} is both a variable and a function symbol")
    for i, r in enumerate(rules):
        rid = f"rule{i + 1} ({r})"
        for t in (r.lhs, r.rhs):
            _check_term(t, signature, varsys, rid, out)
        for lit in r.conditions:
            for t in lit.terms():
                _check_term(t, signature, varsys, rid, out)
            if not isinstance(lit, Def) and lit.left.sort != lit.right.sort:
                out.append(f"{rid}: condition {lit} compares different sorts")
        if isinstance(r.lhs, Var):
            out.append(f"{rid}: left-hand side is a variable")
        if r.lhs.sort != r.rhs.sort:
            out.append(f"{rid}: sides have sorts {r.lhs.sort} and {r.rhs.sort}")
        if r.is_constructor_rule and not isinstance(r.lhs, Var):
            if not is_constructor_term(r.rhs):
                out.append(f"{rid}: constructor rule with non-constructor right-hand side")
            for lit in r.conditions:
                if isinstance(lit, Neq):
                    out.append(f"{rid}: constructor rule with a negative condition")
                elif not all(is_constructor_term(t) for t in lit.terms()):
                    out.append(f"{rid}: constructor rule with non-constructor condition {lit}")
            if r.extra_variables():
                names = ", ".join(x.name for x in r.extra_variables())
                out.append(f"{rid}: constructor rule with extra variables {names}")
    if out:
        raise ValidationError(out)
    return CRS(signature, varsys, tuple(rules), instantiate)


def rename_apart(rule: Rule, avoid) -> Tuple[Rule, Substitution]:
    """Rename the variables of ``rule`` away from the names in ``avoid``."""
    taken = {x.name if isinstance(x, Var) else x for x in avoid}
    taken |= {x.name for x in rule.variables()}
    xi: Substitution = {}
    for x in rule.variables():
        xi[x] = fresh_var(x, taken)
    return rule.substitute(xi), xi


def is_left_linear(crs: CRS) -> bool:
    return all(is_linear(r.lhs) for r in crs.rules)


def nonlinear_rules(crs: CRS) -> List[int]:
    return [i for i, r in enumerate(crs.rules) if not is_linear(r.lhs)]


def has_conservative_constructors(crs: CRS) -> bool:
    """Conditions of constructor rules only mention constructor variables."""
    return all(x.kind == CONSTRUCTOR
               for r in crs.rules if r.is_constructor_rule
               for x in literal_variables(r.conditions))


def constructor_subsystem(crs: CRS) -> CRS:
    return replace(crs, rules=tuple(r for r in crs.rules if r.is_constructor_rule))


def vars_all_constructor(t: Term) -> bool:
    return all(x.kind == CONSTRUCTOR for x in variables(t))


NORMAL = "normal"
QUASI_NORMAL = "quasi-normal"
UNKNOWN = "unknown"
FAILS = "fails"
_STATUS_ORDER = {NORMAL: 0, QUASI_NORMAL: 1, UNKNOWN: 2, FAILS: 3}


@dataclass
class NormalityReport:
    per_rule: List[str]
    summary: str
    notes: List[str] = field(default_factory=list)

    @property
    def normal(self):
        return self.summary == NORMAL

    @property
    def quasi_normal(self):
        return self.summary in (NORMAL, QUASI_NORMAL)


def normality_report(crs: CRS, engine) -> NormalityReport:
    """Classify each rule as normal, syntactically quasi-normal, unknown or failing.

    Normal: every equation has a ground irreducible side. Quasi-normal:
    every equation has such a side, or both sides use constructor
    variables only, or both sides are ground, or a ``def`` of one side
    occurs in the same condition.
    """
    from .engine import TriBool
    per_rule, notes = [], []
    for i, r in enumerate(crs.rules):
        defs = {lit.term for lit in r.conditions if isinstance(lit, Def)}
        all_a, all_quasi, failed = True, True, False
        for lit in r.conditions:
            if not isinstance(lit, Eq):
                continue
            a = TriBool.NO
            for side in lit.terms():
                if side.ground:
                    a = a | engine.is_irreducible_limit(side)
            quasi = (a is TriBool.YES
                     or (vars_all_constructor(lit.left) and vars_all_constructor(lit.right))
                     or (lit.left.ground and lit.right.ground)
                     or lit.left in defs or lit.right in defs)
            if a is not TriBool.YES:
                all_a = False
            if not quasi:
                all_quasi = False
                if a is not TriBool.UNKNOWN:
                    failed = True
                    notes.append(f"rule{i + 1}: condition {lit} has no usable side")
        if all_a:
            per_rule.append(NORMAL)
        elif all_quasi:
            per_rule.append(QUASI_NORMAL)
        elif failed:
            per_rule.append(FAILS)
        else:
            per_rule.append(UNKNOWN)
    summary = max(per_rule, key=_STATUS_ORDER.get, default=NORMAL)
    return NormalityReport(per_rule, summary, notes)
