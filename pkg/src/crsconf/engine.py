"""Three-valued evaluation of the stratified conditional rewrite relation.

Every answer is YES, NO or UNKNOWN. YES and NO are only given with
evidence: a YES step has a fulfilled condition, a NO needs the reach sets
involved to be complete. Budgets only ever turn answers into UNKNOWN.

Each finite depth index is computed from the one below it and memoized
per (index, term). The limit indices w and w+w are obtained by
stabilization: starting from a term, collect every term whose steps were
consulted at index n while computing index n+1, close under that, and
check that indices n and n+1 agree on the whole set. Such a set keeps
agreeing at every later index, so the limit equals index n+1 there.
"""

from __future__ import annotations

import os
import sys
from collections import deque
from dataclasses import dataclass, fields
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Tuple

from .crs import CRS, Def, Eq
from .depth import OMEGA, OMEGA_OMEGA, DepthIndex, fin, omega_plus
from .terms import (Position, Term, apply_substitution, is_constructor_ground,
                    match_term, replace_at, sort_key, subterms)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class TriBool(Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __and__(self, other):
        if TriBool.NO in (self, other):
            return TriBool.NO
        if TriBool.UNKNOWN in (self, other):
            return TriBool.UNKNOWN
        return TriBool.YES

    def __or__(self, other):
        if TriBool.YES in (self, other):
            return TriBool.YES
        if TriBool.UNKNOWN in (self, other):
            return TriBool.UNKNOWN
        return TriBool.NO

    def __invert__(self):
        return {TriBool.YES: TriBool.NO, TriBool.NO: TriBool.YES}.get(self, TriBool.UNKNOWN)

    @staticmethod
    def of(b: bool) -> "TriBool":
        return TriBool.YES if b else TriBool.NO

    def __str__(self):
        return self.value


YES, NO, UNKNOWN = TriBool.YES, TriBool.NO, TriBool.UNKNOWN

ENV_PREFIX = "CRSCONF_"


@dataclass(frozen=True)
class Budget:
    max_steps: int = 1000       # step-set computations per query, and nodes per search
    max_term_size: int = 64     # larger terms are not expanded
    max_strata: int = 8         # indices tried before giving up on a limit
    max_depth: int = 64         # nesting of condition evaluation
    inst_size_bound: int = 3    # size of enumerated substitution ranges

    @classmethod
    def from_env(cls, **overrides) -> "Budget":
        """Defaults, then CRSCONF_MAX_STEPS style variables, then ``overrides``."""
        vals = {}
        for f in fields(cls):
            env = os.environ.get(ENV_PREFIX + f.name.upper())
            if env is not None:
                vals[f.name] = int(env)
        vals.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**vals)

    def dominates(self, other: "Budget") -> bool:
        return all(getattr(self, f.name) >= getattr(other, f.name) for f in fields(self))


class Step(NamedTuple):
    pos: Position
    rule: int
    reduct: Term


class StepSet(NamedTuple):
    """Definite one-step reducts; ``complete`` means there are no others."""
    steps: Tuple[Step, ...]
    complete: bool


EMPTY = StepSet((), True)


class Edge(NamedTuple):
    source: Term
    pos: Position
    rule: int
    target: Term


class _Candidate(NamedTuple):
    pos: Position
    rule: int
    reduct: Optional[Term]   # None when the rhs has extra variables
    conditions: tuple
    cons: bool
    decidable: bool          # False when conditions have extra variables


class BudgetExhausted(Exception):
    pass


@dataclass
class ReachSet:
    origin: Term
    depth: DepthIndex
    members: frozenset
    complete: bool
    parents: Dict[Term, Optional[Edge]]
    succ: Dict[Term, Tuple[Term, ...]] = None   # expanded nodes whose step set is complete

    def closure(self, t: Term) -> Optional[frozenset]:
        """Everything reachable from member ``t``, if the explored graph
        certifies it; None when some node on the way is not fully known."""
        seen, todo = {t}, [t]
        while todo:
            u = todo.pop()
            nxt = self.succ.get(u) if self.succ else None
            if nxt is None:
                return None
            for v in nxt:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return frozenset(seen)

    def certified(self) -> frozenset:
        """Members whose whole reach set lies inside the explored graph."""
        preds: Dict[Term, List[Term]] = {}
        for u, vs in (self.succ or {}).items():
            for v in vs:
                preds.setdefault(v, []).append(u)
        bad = [t for t in self.members if t not in (self.succ or {})]
        seen = set(bad)
        while bad:
            v = bad.pop()
            for u in preds.get(v, ()):
                if u not in seen:
                    seen.add(u)
                    bad.append(u)
        return frozenset(self.members - seen)

    @property
    def edges(self) -> List[Edge]:
        return [e for e in self.parents.values() if e is not None]

    def path_to(self, t: Term) -> List[Edge]:
        out = []
        while True:
            e = self.parents[t]
            if e is None:
                return out[::-1]
            out.append(e)
            t = e.source


class _Search:
    """Breadth-first exploration along definite steps at one index."""

    def __init__(self, engine: "Engine", origin: Term, depth: DepthIndex, cap: int):
        self.engine = engine
        self.depth = depth
        self.cap = cap
        self.parents: Dict[Term, Optional[Edge]] = {origin: None}
        self.queue = deque([origin])
        self.complete = True
        self.expanded = 0
        self.succ: Dict[Term, Tuple[Term, ...]] = {}

    @property
    def done(self):
        return not self.queue

    def expand_one(self) -> List[Term]:
        u = self.queue.popleft()
        if u.size > self.engine.budget.max_term_size or self.expanded >= self.cap:
            self.complete = False
            if self.expanded >= self.cap:
                self.queue.clear()
            return []
        self.expanded += 1
        ss = self.engine.steps(u, self.depth)
        if not ss.complete:
            self.complete = False
        else:
            self.succ[u] = tuple(st.reduct for st in ss.steps)
        new = []
        for st in ss.steps:
            if st.reduct not in self.parents:
                self.parents[st.reduct] = Edge(u, st.pos, st.rule, st.reduct)
                self.queue.append(st.reduct)
                new.append(st.reduct)
        return new

    def run(self):
        while self.queue:
            self.expand_one()
        return self


class Engine:
    """Query context holding the memo tables for one CRS and budget."""

    def __init__(self, crs: CRS, budget: Optional[Budget] = None):
        self.crs = crs
        self.budget = budget or Budget()
        self._by_root: Dict[str, List[int]] = {}
        for i, r in enumerate(crs.rules):
            self._by_root.setdefault(r.lhs.fn, []).append(i)
        self._reset()

    def _reset(self):
        self._cands: Dict[Term, Tuple[_Candidate, ...]] = {}
        self._memo: Dict[Tuple[DepthIndex, Term], StepSet] = {}
        self._deps: Dict[Tuple[DepthIndex, Term], frozenset] = {}
        self._limits: Dict[int, Dict[Term, StepSet]] = {1: {}, 2: {}}
        self._lit_memo: Dict[tuple, Tuple[TriBool, frozenset]] = {}
        self._collect: List[set] = []
        self._work = 0
        self._nesting = 0
        self._api = 0

    def set_budget(self, budget: Budget):
        """Switch budgets; memo tables are dropped unless the new one is smaller."""
        if not self.budget.dominates(budget):
            self._reset()
        self.budget = budget

    # candidate redexes, independent of the index

    def _candidates(self, t: Term) -> Tuple[_Candidate, ...]:
        got = self._cands.get(t)
        if got is not None:
            return got
        out = []
        ground_cvars = not self.crs.x_has_cvars
        for p, s in subterms(t):
            idxs = self._by_root.get(getattr(s, "fn", None))
            if not idxs:
                continue
            for i in idxs:
                rule = self.crs.rules[i]
                sigma = match_term(rule.lhs, s)
                if sigma is None:
                    continue
                if ground_cvars and any(x.kind == "constructor" and not b.ground
                                        for x, b in sigma.items()):
                    continue
                reduct = None
                if not rule.rhs_extra_variables():
                    reduct = replace_at(t, p, apply_substitution(rule.rhs, sigma))
                conds = tuple(c.substitute(sigma) for c in rule.conditions)
                decidable = not rule.extra_variables()
                out.append(_Candidate(p, i, reduct, conds, rule.is_constructor_rule, decidable))
        out.sort(key=lambda c: (c.pos, c.rule))
        got = tuple(out)
        self._cands[t] = got
        return got

    # step sets per index

    def steps(self, t: Term, depth: DepthIndex) -> StepSet:
        if self._collect:
            self._collect[-1].add((depth, t))
        if depth.is_limit:
            return self._limit(t, depth.omegas)
        key = (depth, t)
        got = self._memo.get(key)
        if got is None:
            got = self._compute(t, depth)
            self._memo[key] = got
        return got

    def _compute(self, t: Term, depth: DepthIndex) -> StepSet:
        if depth.is_finite and depth.n == 0:
            return EMPTY
        cands = self._candidates(t)
        if depth.is_finite:
            cands = [c for c in cands if c.cons]
            found, complete = {}, True
        else:
            base = self.steps(t, OMEGA)
            found = {(s.pos, s.rule): s for s in base.steps}
            complete = base.complete
        if not cands:
            return StepSet(tuple(found.values()), complete)
        self._work += 1
        if self._work > self.budget.max_steps:
            raise BudgetExhausted("step budget exhausted")
        if self._nesting >= self.budget.max_depth:
            raise BudgetExhausted("condition nesting too deep")
        below = depth.predecessor()
        self._nesting += 1
        self._collect.append(set())
        try:
            for c in cands:
                if (c.pos, c.rule) in found:
                    continue
                if c.reduct is None or not c.decidable:
                    # extra variables: never a definite step
                    if self._fulfilled(c.conditions, below, c.decidable) is not NO:
                        complete = False
                    continue
                v = self._fulfilled(c.conditions, below)
                if v is YES:
                    found[(c.pos, c.rule)] = Step(c.pos, c.rule, c.reduct)
                elif v is UNKNOWN:
                    complete = False
        finally:
            seen = self._collect.pop()
            self._nesting -= 1
        self._deps[(depth, t)] = frozenset(u for d, u in seen if d == below)
        steps = tuple(sorted(found.values(), key=lambda s: (s.pos, s.rule)))
        return StepSet(steps, complete)

    def _limit(self, t: Term, omegas: int) -> StepSet:
        memo = self._limits[omegas]
        got = memo.get(t)
        if got is not None:
            return got
        level = fin if omegas == 1 else omega_plus
        cands = self._candidates(t)
        relevant = [c for c in cands if c.cons] if omegas == 1 else list(cands)
        if not relevant:
            got = EMPTY
        elif all(not c.conditions and c.reduct is not None for c in relevant):
            got = self.steps(t, level(1))
        else:
            got = self._stabilize(t, level, memo)
            if got is None:
                last = self.steps(t, level(self.budget.max_strata + 1))
                full = all(c.reduct is not None and c.decidable for c in relevant) and \
                    len(last.steps) == len({(c.pos, c.rule) for c in relevant})
                got = StepSet(last.steps, full and (omegas == 1 or self.steps(t, OMEGA).complete))
        memo[t] = got
        return got

    def _stabilize(self, t, level, memo) -> Optional[StepSet]:
        for n in range(1, self.budget.max_strata + 1):
            lo, hi = level(n), level(n + 1)
            order, seen, stable = [t], {t}, True
            i = 0
            while i < len(order):
                u = order[i]
                i += 1
                if self.steps(u, lo) != self.steps(u, hi):
                    stable = False
                    break
                for v in sorted(self._deps.get((hi, u), ()), key=sort_key):
                    if v not in seen:
                        seen.add(v)
                        order.append(v)
            if stable:
                for u in order:
                    memo.setdefault(u, self.steps(u, hi))
                return memo[t]
        return None

    # conditions

    def _fulfilled(self, conds, depth: DepthIndex, decidable: bool = True) -> TriBool:
        if not decidable:
            return UNKNOWN
        out = YES
        for lit in conds:
            v = self._literal(lit, depth)
            if v is NO:
                return NO
            out = out & v
        return out

    def _literal(self, lit, depth: DepthIndex) -> TriBool:
        key = (type(lit).__name__, lit.terms(), depth)
        hit = self._lit_memo.get(key)
        if hit is None:
            self._collect.append(set())
            try:
                if isinstance(lit, Eq):
                    val = self._join(lit.left, lit.right, depth)
                elif isinstance(lit, Def):
                    val = self._defined(lit.term, depth)
                else:
                    val = self._apart(lit.left, lit.right, depth)
            finally:
                seen = self._collect.pop()
            hit = (val, frozenset(seen))
            self._lit_memo[key] = hit
        if self._collect:
            self._collect[-1].update(hit[1])
        return hit[0]

    def _join(self, u: Term, v: Term, depth: DepthIndex) -> TriBool:
        if u == v:
            return YES
        cap = self.budget.max_steps
        a, b = _Search(self, u, depth, cap), _Search(self, v, depth, cap)
        while not (a.done and b.done):
            for s, other in ((a, b), (b, a)):
                if not s.done:
                    if any(w in other.parents for w in s.expand_one()):
                        return YES
        return NO if a.complete and b.complete else UNKNOWN

    def _defined(self, u: Term, depth: DepthIndex) -> TriBool:
        if is_constructor_ground(u):
            return YES
        s = _Search(self, u, depth, self.budget.max_steps)
        while not s.done:
            if any(is_constructor_ground(w) for w in s.expand_one()):
                return YES
        return NO if s.complete else UNKNOWN

    def _apart(self, u: Term, v: Term, depth: DepthIndex) -> TriBool:
        """Some constructor ground reducts of u and v fail to be joinable."""
        cap = self.budget.max_steps
        a = _Search(self, u, depth, cap).run()
        b = _Search(self, v, depth, cap).run()
        us = sorted((w for w in a.parents if is_constructor_ground(w)), key=sort_key)
        vs = sorted((w for w in b.parents if is_constructor_ground(w)), key=sort_key)
        out = NO if a.complete and b.complete else UNKNOWN
        for x in us:
            for y in vs:
                j = self._join(x, y, depth)
                if j is NO:
                    return YES
                if j is UNKNOWN:
                    out = UNKNOWN
        return out

    # public queries; each gets a fresh step budget

    def _enter(self):
        if self._api == 0:
            self._work = 0
        self._api += 1

    def _leave(self):
        self._api -= 1

    def one_step_reducts(self, t: Term, depth: DepthIndex) -> StepSet:
        self._enter()
        try:
            return self.steps(t, depth)
        except BudgetExhausted:
            return StepSet((), False)
        finally:
            self._leave()

    def fulfilled(self, conds, depth: DepthIndex) -> TriBool:
        self._enter()
        try:
            return self._fulfilled(tuple(conds), depth,
                                   decidable=True)
        except BudgetExhausted:
            return UNKNOWN
        finally:
            self._leave()

    def is_irreducible(self, t: Term, depth: DepthIndex = OMEGA_OMEGA) -> TriBool:
        ss = self.one_step_reducts(t, depth)
        if ss.steps:
            return NO
        return YES if ss.complete else UNKNOWN

    def is_irreducible_limit(self, t: Term) -> TriBool:
        return self.is_irreducible(t, OMEGA_OMEGA)

    def reachable(self, t: Term, depth: DepthIndex = OMEGA_OMEGA) -> ReachSet:
        self._enter()
        s = _Search(self, t, depth, self.budget.max_steps)
        try:
            s.run()
        except BudgetExhausted:
            s.complete = False
        finally:
            self._leave()
        return ReachSet(t, depth, frozenset(s.parents), s.complete, s.parents, s.succ)

    def joinable(self, t0: Term, t1: Term, depth: DepthIndex = OMEGA_OMEGA) -> TriBool:
        self._enter()
        try:
            return self._join(t0, t1, depth)
        except BudgetExhausted:
            return UNKNOWN
        finally:
            self._leave()

    def join_evidence(self, t0: Term, t1: Term, depth: DepthIndex = OMEGA_OMEGA):
        """Verdict together with a common reduct or both reach sets."""
        verdict = self.joinable(t0, t1, depth)
        r0, r1 = self.reachable(t0, depth), self.reachable(t1, depth)
        common = sorted(r0.members & r1.members, key=sort_key)
        return verdict, (common[0] if common else None), r0, r1

    def normal_forms(self, t: Term, depth: DepthIndex = OMEGA_OMEGA):
        r = self.reachable(t, depth)
        nfs, complete = [], r.complete
        for u in sorted(r.members, key=sort_key):
            v = self.is_irreducible(u, depth)
            if v is YES:
                nfs.append(u)
            elif v is UNKNOWN:
                complete = False
        return nfs, complete

    def parallel_reducts(self, t: Term, depth: DepthIndex = OMEGA_OMEGA):
        """Terms reached by contracting a set of disjoint redexes at once."""
        self._enter()
        try:
            complete = [True]
            out = self._par(t, depth, complete)
            return out, complete[0]
        except BudgetExhausted:
            return {t}, False
        finally:
            self._leave()

    def _par(self, t, depth, complete):
        ss = self.steps(t, depth)
        if not ss.complete:
            complete[0] = False
        out = {t}
        out.update(s.reduct for s in ss.steps if s.pos == ())
        if getattr(t, "args", None):
            combos = [()]
            for a in t.args:
                subs = sorted(self._par(a, depth, complete), key=sort_key)
                combos = [c + (x,) for c in combos for x in subs]
                if len(combos) > self.budget.max_steps:
                    complete[0] = False
                    combos = combos[:self.budget.max_steps]
            out.update(type(t)(t.fn, c, t.sort, t.cons) for c in combos)
        return out

    def licensing_depth(self, edge: Edge) -> Optional[DepthIndex]:
        """Smallest index at which ``edge`` is a definite step."""
        want = (edge.pos, edge.rule, edge.target)
        top = self.budget.max_strata + 1
        levels = []
        if self.crs.rules[edge.rule].is_constructor_rule:
            levels += [fin(n) for n in range(1, top + 1)] + [OMEGA]
        levels += [omega_plus(n) for n in range(1, top + 1)] + [OMEGA_OMEGA]
        for d in levels:
            if want in self.one_step_reducts(edge.source, d).steps:
                return d
        return None
