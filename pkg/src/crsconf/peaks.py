"""Conditional critical peaks and the complementarity tests on them."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Optional

from .crs import CRS, Eq, Neq, Rule, literal_variables, rename_apart
from .depth import OMEGA_OMEGA, DepthIndex
from .engine import NO, UNKNOWN, YES, Engine, TriBool
from .terms import (Position, Substitution, Var, apply_substitution, format_position,
                    function_positions, mgu, replace_at, subterm_at, variables)


@dataclass(eq=False)
class CriticalPeak:
    """Overlap of ``rule0`` (renamed apart) into ``rule1`` at ``pos``.

    ``peak_term`` rewrites to ``t0`` with ``rule0`` at ``pos`` and to ``t1``
    with ``rule1`` at the root, under conditions ``d0`` and ``d1``.
    """

    rule0: int
    rule1: int
    pos: Position
    renamed0: Rule
    outer: Rule
    sigma: Substitution

    @cached_property
    def peak_term(self):
        return apply_substitution(self.outer.lhs, self.sigma)

    @cached_property
    def t0(self):
        return apply_substitution(replace_at(self.outer.lhs, self.pos, self.renamed0.rhs),
                                  self.sigma)

    @cached_property
    def t1(self):
        return apply_substitution(self.outer.rhs, self.sigma)

    @cached_property
    def d0(self):
        return tuple(c.substitute(self.sigma) for c in self.renamed0.conditions)

    @cached_property
    def d1(self):
        return tuple(c.substitute(self.sigma) for c in self.outer.conditions)

    @property
    def lam0(self):
        return self.renamed0.lam

    @property
    def lam1(self):
        return self.outer.lam

    @property
    def form(self):
        return (self.lam0, self.lam1)

    @property
    def is_overlay(self):
        return self.pos == ()

    def variables(self) -> List[Var]:
        seen = dict.fromkeys(variables(self.peak_term))
        for t in (self.t0, self.t1):
            seen.update(dict.fromkeys(variables(t)))
        seen.update(dict.fromkeys(literal_variables(self.d0 + self.d1)))
        return list(seen)

    def describe(self, crs: Optional[CRS] = None) -> str:
        name = crs.rule_id if crs else (lambda i: f"rule{i + 1}")
        d0 = ", ".join(map(str, self.d0)) or "-"
        d1 = ", ".join(map(str, self.d1)) or "-"
        return (f"{name(self.rule0)} into {name(self.rule1)} at {format_position(self.pos)}"
                f" form ({self.lam0},{self.lam1}): {self.peak_term}\n"
                f"  -> {self.t0}  if {d0}\n  -> {self.t1}  if {d1}")


def compute_critical_peaks(crs: CRS) -> List[CriticalPeak]:
    """All non-trivial critical peaks, ordered by rule pair then position."""
    out = []
    for i1, outer in enumerate(crs.rules):
        names = {x.name for x in outer.variables()}
        for i0, inner in enumerate(crs.rules):
            renamed, _ = rename_apart(inner, names)
            for p in function_positions(outer.lhs):
                sub = subterm_at(outer.lhs, p)
                if sub.sort != renamed.lhs.sort:
                    continue
                sigma = mgu([(renamed.lhs, sub)])
                if sigma is None:
                    continue
                cp = CriticalPeak(i0, i1, p, renamed, outer, sigma)
                if cp.t0 != cp.t1:
                    out.append(cp)
    out.sort(key=lambda c: (c.rule0, c.rule1, c.pos))
    return out


def _literal_clash(ds0, ds1, engine: Engine) -> TriBool:
    """Some (u == v) in ds0 meets (u != v) in ds1, or some p == a in ds0 meets
    p == b in ds1 for distinct irreducible ground a and b."""
    eqs0 = [l for l in ds0 if isinstance(l, Eq)]
    eqs1 = [l for l in ds1 if isinstance(l, Eq)]
    for e in eqs0:
        for n in ds1:
            if isinstance(n, Neq) and {e.left, e.right} == {n.left, n.right}:
                return YES
    out = NO
    for e0 in eqs0:
        for e1 in eqs1:
            for p0, a in ((e0.left, e0.right), (e0.right, e0.left)):
                for p1, b in ((e1.left, e1.right), (e1.right, e1.left)):
                    if p0 != p1 or a == b or not (a.ground and b.ground):
                        continue
                    v = engine.is_irreducible(a) & engine.is_irreducible(b)
                    if v is YES:
                        return YES
                    out = out | v
    return out


def complementary_conditions(ds0, ds1, engine: Engine) -> TriBool:
    return _literal_clash(ds0, ds1, engine) | _literal_clash(ds1, ds0, engine)


def is_complementary(peak: CriticalPeak, engine: Engine) -> TriBool:
    return complementary_conditions(peak.d0, peak.d1, engine)


def is_weakly_complementary(peak: CriticalPeak, engine: Engine) -> TriBool:
    both = peak.d0 + peak.d1
    return _literal_clash(both, both, engine)


class InstanceOutcome(Enum):
    JOINABLE = "joinable"
    CONDITION_INFEASIBLE = "condition-infeasible"
    NOT_JOINABLE = "not-joinable"
    UNKNOWN = "unknown"


def instantiate_peak(peak: CriticalPeak, phi: Substitution):
    return (apply_substitution(peak.peak_term, phi), apply_substitution(peak.t0, phi),
            apply_substitution(peak.t1, phi),
            tuple(c.substitute(phi) for c in peak.d0),
            tuple(c.substitute(phi) for c in peak.d1))


def peak_instance_joinability(peak: CriticalPeak, phi: Substitution, engine: Engine,
                              depth: DepthIndex = OMEGA_OMEGA) -> InstanceOutcome:
    _, t0, t1, d0, d1 = instantiate_peak(peak, phi)
    f = engine.fulfilled(d0, depth) & engine.fulfilled(d1, depth)
    if f is NO:
        return InstanceOutcome.CONDITION_INFEASIBLE
    if f is UNKNOWN:
        return InstanceOutcome.UNKNOWN
    j = engine.joinable(t0, t1, depth)
    if j is YES:
        return InstanceOutcome.JOINABLE
    if j is NO:
        return InstanceOutcome.NOT_JOINABLE
    return InstanceOutcome.UNKNOWN
