"""Confluence criteria, counterexample search and the decision pipeline.

The pipeline tries, in order: the complementary-peaks criterion, its
weak variant, a search for a verified non-confluence witness, and a
bounded survey of critical-peak instances. The survey is advisory only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .crs import (CRS, Def, Eq, constructor_subsystem, has_conservative_constructors,
                  literal_variables, nonlinear_rules, normality_report,
                  vars_all_constructor)
from .depth import DepthIndex
from .engine import NO, UNKNOWN, YES, Budget, Edge, Engine, ReachSet, TriBool
from .peaks import (CriticalPeak, InstanceOutcome, compute_critical_peaks,
                    instantiate_peak, is_complementary, is_weakly_complementary,
                    peak_instance_joinability)
from .terms import (CONSTRUCTOR, Term, apply_substitution, ground_terms, sort_key,
                    variables)

CONFLUENT = "confluent"
NOT_CONFLUENT = "not-confluent"
UNKNOWN_VERDICT = "unknown"

MAX_INSTANCES = 5000
MAX_PAIR_MEMBERS = 64


@dataclass
class Assumptions:
    terminating: bool = False
    constructor_confluent: bool = False
    assume_cvar_equations: Optional[bool] = None   # None: on iff no constructor variables are instantiated

    def cvar_equations(self, crs: CRS) -> bool:
        if self.assume_cvar_equations is None:
            return not crs.x_has_cvars
        return self.assume_cvar_equations


@dataclass
class Hypothesis:
    name: str
    value: TriBool
    detail: str = ""

    def to_json(self):
        return {"name": self.name, "value": self.value.value, "detail": self.detail}


@dataclass
class CriterionResult:
    criterion: str
    hypotheses: List[Hypothesis]

    @property
    def value(self) -> TriBool:
        out = YES
        for h in self.hypotheses:
            out = out & h.value
        return out

    def failing(self) -> List[Hypothesis]:
        return [h for h in self.hypotheses if h.value is not YES]


def _all(values) -> TriBool:
    out = YES
    for v in values:
        out = out & v
    return out


def check_constructor_confluence(crs: CRS, engine: Engine,
                                 assumptions: Optional[Assumptions] = None) -> CriterionResult:
    """Confluence of the constructor rules alone."""
    assumptions = assumptions or Assumptions()
    sub = constructor_subsystem(crs)
    if not sub.rules:
        return CriterionResult("constructor-subsystem", [
            Hypothesis("no constructor rules", YES, "constructors are free")])
    hyps = []
    bad = nonlinear_rules(sub)
    hyps.append(Hypothesis("left-linear", TriBool.of(not bad),
                           ", ".join(f"rule {crs.rules.index(sub.rules[i]) + 1}" for i in bad)))
    rep = normality_report(sub, engine)
    normal = YES if rep.normal else (UNKNOWN if rep.summary == "unknown" else NO)
    hyps.append(Hypothesis("normal", normal, rep.summary))
    cps = compute_critical_peaks(sub)
    comp = _all(is_complementary(cp, engine) for cp in cps)
    hyps.append(Hypothesis("critical peaks complementary", comp, f"{len(cps)} peaks"))
    res = CriterionResult("constructor-subsystem", hyps)
    if res.value is not YES and assumptions.constructor_confluent:
        res.hypotheses.append(Hypothesis("asserted by user", YES, "assume constructor-confluent"))
        res.hypotheses = [h for h in res.hypotheses if h.value is YES]
    return res


def equation_sides_check(crs: CRS, engine: Engine, assumptions: Assumptions) -> Hypothesis:
    """Every condition equation has a side that is defined by a ``def`` literal
    of the same rule or is ground and irreducible."""
    implicit = assumptions.cvar_equations(crs)
    out, notes = YES, []
    for i, r in enumerate(crs.rules):
        defs = {l.term for l in r.conditions if isinstance(l, Def)}
        for lit in r.conditions:
            if not isinstance(lit, Eq):
                continue
            if lit.left in defs or lit.right in defs:
                continue
            if implicit and all(t.all_cons and vars_all_constructor(t) for t in lit.terms()):
                continue
            v = NO
            for side in lit.terms():
                if side.ground:
                    v = v | engine.is_irreducible(side)
            if v is not YES:
                notes.append(f"rule{i + 1}: {lit}")
            out = out & v
    return Hypothesis("equations have a defined or irreducible side", out, "; ".join(notes))


def _peak_hypothesis(crs, peaks, engine, weak_11: bool) -> Hypothesis:
    out, notes = YES, []
    for k, cp in enumerate(peaks):
        if cp.form == (0, 0):
            continue
        if cp.form == (1, 1) and weak_11:
            v = is_weakly_complementary(cp, engine)
        else:
            v = is_complementary(cp, engine)
        if v is not YES:
            notes.append(f"peak {k + 1} ({v})")
        out = out & v
    name = "peaks complementary" + (" (weakly for form (1,1))" if weak_11 else "")
    return Hypothesis(name, out, ", ".join(notes))


def check_complementary_criterion(crs: CRS, engine: Engine, assumptions: Assumptions,
                                  peaks=None) -> CriterionResult:
    peaks = compute_critical_peaks(crs) if peaks is None else peaks
    cc = check_constructor_confluence(crs, engine, assumptions)
    bad = nonlinear_rules(crs)
    hyps = [
        Hypothesis("left-linear", TriBool.of(not bad),
                   ", ".join(f"rule{i + 1}" for i in bad)),
        Hypothesis("conservative constructors", TriBool.of(has_conservative_constructors(crs))),
        equation_sides_check(crs, engine, assumptions),
        Hypothesis("constructor subsystem confluent", cc.value,
                   "; ".join(f"{h.name}: {h.value}" for h in cc.hypotheses)),
        _peak_hypothesis(crs, peaks, engine, weak_11=False),
    ]
    return CriterionResult("complementary", hyps)


def check_weakly_complementary_criterion(crs: CRS, engine: Engine, assumptions: Assumptions,
                                         peaks=None) -> CriterionResult:
    peaks = compute_critical_peaks(crs) if peaks is None else peaks
    cc = check_constructor_confluence(crs, engine, assumptions)
    bad = nonlinear_rules(crs)
    general = [f"rule{i + 1}" for i, r in enumerate(crs.rules)
               if any(x.kind != CONSTRUCTOR for x in literal_variables(r.conditions))]
    hyps = [
        Hypothesis("left-linear", TriBool.of(not bad),
                   ", ".join(f"rule{i + 1}" for i in bad)),
        Hypothesis("conditions use constructor variables only", TriBool.of(not general),
                   ("general variables in conditions of " + ", ".join(general)) if general else ""),
        equation_sides_check(crs, engine, assumptions),
        Hypothesis("constructor subsystem confluent", cc.value,
                   "; ".join(f"{h.name}: {h.value}" for h in cc.hypotheses)),
        _peak_hypothesis(crs, peaks, engine, weak_11=True),
    ]
    return CriterionResult("weakly-complementary", hyps)


# witnesses

@dataclass
class Witness:
    """``seed`` rewrites to both ``left`` and ``right``, which are not joinable:
    their reach sets are complete and disjoint."""

    seed: Term
    left_path: List[Edge]
    right_path: List[Edge]
    left: Term
    right: Term
    left_depths: List[Optional[DepthIndex]] = field(default_factory=list)
    right_depths: List[Optional[DepthIndex]] = field(default_factory=list)
    left_reach: Optional[ReachSet] = None
    right_reach: Optional[ReachSet] = None

    def annotate(self, engine: Engine):
        self.left_depths = [engine.licensing_depth(e) for e in self.left_path]
        self.right_depths = [engine.licensing_depth(e) for e in self.right_path]
        self.left_reach = engine.reachable(self.left)
        self.right_reach = engine.reachable(self.right)

    def replay(self, engine: Engine) -> bool:
        """Check every step at its recorded index and the non-joinability."""
        for path, depths, end in ((self.left_path, self.left_depths, self.left),
                                  (self.right_path, self.right_depths, self.right)):
            cur = self.seed
            if len(depths) != len(path):
                return False
            for e, d in zip(path, depths):
                if d is None or e.source != cur:
                    return False
                if (e.pos, e.rule, e.target) not in engine.one_step_reducts(cur, d).steps:
                    return False
                cur = e.target
            if cur != end:
                return False
        r0, r1 = engine.reachable(self.left), engine.reachable(self.right)
        return r0.complete and r1.complete and not (r0.members & r1.members)

    def to_json(self, crs: CRS):
        def path(edges, depths):
            return [{"from": str(e.source), "position": list(e.pos), "rule": crs.rule_id(e.rule),
                     "to": str(e.target), "depth": str(d)} for e, d in zip(edges, depths)]
        return {
            "seed": str(self.seed), "left": str(self.left), "right": str(self.right),
            "left_derivation": path(self.left_path, self.left_depths),
            "right_derivation": path(self.right_path, self.right_depths),
            "left_reach": sorted(map(str, self.left_reach.members)) if self.left_reach else None,
            "right_reach": sorted(map(str, self.right_reach.members)) if self.right_reach else None,
        }


def peak_instances(crs: CRS, peak: CriticalPeak, engine: Engine, k: int):
    """Substitutions sending each peak variable to an irreducible constructor
    ground term of size at most ``k``."""
    xs = sorted(peak.variables(), key=lambda x: x.name)
    ranges = []
    cache: Dict[str, list] = {}
    for x in xs:
        if x.sort not in cache:
            cache[x.sort] = [t for t in ground_terms(crs.signature, x.sort, k, True)
                             if engine.is_irreducible(t) is YES]
        ranges.append(cache[x.sort])
    for n, combo in enumerate(itertools.product(*ranges)):
        if n >= MAX_INSTANCES:
            return
        yield dict(zip(xs, combo))


def _peak_witness(crs, engine, peak, phi) -> Optional[Witness]:
    seed, t0, t1, _, _ = instantiate_peak(peak, phi)
    w = Witness(seed, [Edge(seed, peak.pos, peak.rule0, t0)], [Edge(seed, (), peak.rule1, t1)],
                t0, t1)
    w.annotate(engine)
    return w if w.replay(engine) else None


def auto_seeds(crs: CRS, size_bound: int) -> List[Term]:
    out = []
    for s in crs.signature.sorts:
        out.extend(ground_terms(crs.signature, s, size_bound))
    out.sort(key=sort_key)
    return out


def search_counterexample(crs: CRS, engine: Engine, seeds: Optional[Sequence[Term]] = None,
                          size_bound: Optional[int] = None, peaks=None) -> Optional[Witness]:
    """Look for a verified non-confluence witness.

    Critical-peak instances are tried first, then the reach sets of the
    given seeds (or of small ground terms) are scanned for two members
    whose own reach sets are complete and disjoint.
    """
    k = engine.budget.inst_size_bound if size_bound is None else size_bound
    peaks = compute_critical_peaks(crs) if peaks is None else peaks
    for cp in peaks:
        for phi in peak_instances(crs, cp, engine, k):
            if peak_instance_joinability(cp, phi, engine) is InstanceOutcome.NOT_JOINABLE:
                w = _peak_witness(crs, engine, cp, phi)
                if w is not None:
                    return w
    for seed in (auto_seeds(crs, k) if seeds is None else seeds):
        w = _seed_witness(engine, seed)
        if w is not None:
            return w
    return None


def _seed_witness(engine: Engine, seed: Term) -> Optional[Witness]:
    top = engine.reachable(seed)
    members = sorted(top.certified(), key=sort_key)[:MAX_PAIR_MEMBERS]
    closures = [(m, top.closure(m)) for m in members]
    for i, (a, ca) in enumerate(closures):
        for b, cb in closures[i + 1:]:
            if ca & cb:
                continue
            w = Witness(seed, top.path_to(a), top.path_to(b), a, b)
            w.annotate(engine)
            if w.replay(engine):
                return w
    return None


# bounded survey

ALL_OK = "all-instances-ok"
SOME_UNKNOWN = "some-unknown"
NOT_JOINABLE_FOUND = "not-joinable-instance-found"


@dataclass
class PeakSurvey:
    peak: int
    status: str
    counts: Dict[str, int]
    excluded: int
    witness: Optional[Witness] = None

    def to_json(self):
        return {"peak": self.peak, "status": self.status, "counts": self.counts,
                "excluded_unnormalized": self.excluded}


@dataclass
class SurveyReport:
    k: int
    heuristic: bool
    peaks: List[PeakSurvey]

    @property
    def supported(self) -> bool:
        return all(p.status == ALL_OK for p in self.peaks)

    @property
    def label(self) -> str:
        if any(p.status == NOT_JOINABLE_FOUND for p in self.peaks):
            return "refuted"
        tag = "heuristic" if self.heuristic else "bounded"
        if self.supported:
            return f"SUPPORTED ({tag}, k={self.k})"
        return f"INCONCLUSIVE ({tag}, k={self.k})"

    def to_json(self):
        return {"k": self.k, "heuristic": self.heuristic, "label": self.label,
                "peaks": [p.to_json() for p in self.peaks]}


def bounded_joinability_survey(crs: CRS, engine: Engine, assumptions: Assumptions,
                               k: Optional[int] = None, peaks=None) -> SurveyReport:
    """Check every normalized peak instance up to size ``k``.

    Normalized means each binding is irreducible and, for a peak below
    the root, the instantiated arguments of the outer left-hand side are
    irreducible too. Other instances are counted as excluded.
    """
    k = engine.budget.inst_size_bound if k is None else k
    peaks = compute_critical_peaks(crs) if peaks is None else peaks
    out = []
    for n, cp in enumerate(peaks):
        counts = {o.value: 0 for o in InstanceOutcome}
        excluded, witness = 0, None
        outer_vars = variables(cp.outer.lhs)
        for phi in peak_instances(crs, cp, engine, k):
            if not cp.is_overlay and any(
                    engine.is_irreducible(apply_substitution(apply_substitution(x, cp.sigma), phi))
                    is not YES for x in outer_vars):
                excluded += 1
                continue
            o = peak_instance_joinability(cp, phi, engine)
            counts[o.value] += 1
            if o is InstanceOutcome.NOT_JOINABLE and witness is None:
                witness = _peak_witness(crs, engine, cp, phi)
        if counts[InstanceOutcome.NOT_JOINABLE.value]:
            status = NOT_JOINABLE_FOUND
        elif counts[InstanceOutcome.UNKNOWN.value]:
            status = SOME_UNKNOWN
        else:
            status = ALL_OK
        out.append(PeakSurvey(n + 1, status, counts, excluded, witness))
    return SurveyReport(k, not assumptions.terminating, out)


# pipeline

@dataclass
class Verdict:
    status: str
    criterion: Optional[str] = None
    hypotheses: List[Hypothesis] = field(default_factory=list)
    witness: Optional[Witness] = None
    advisory: Optional[SurveyReport] = None
    diagnostics: List[str] = field(default_factory=list)
    peaks: List[CriticalPeak] = field(default_factory=list)
    trace: List[CriterionResult] = field(default_factory=list)


def run_pipeline(crs: CRS, assumptions: Optional[Assumptions] = None,
                 budget: Optional[Budget] = None, seeds: Optional[Sequence[Term]] = None,
                 engine: Optional[Engine] = None) -> Verdict:
    assumptions = assumptions or Assumptions()
    engine = engine or Engine(crs, budget or Budget.from_env())
    peaks = compute_critical_peaks(crs)
    trace = []
    for check in (check_complementary_criterion, check_weakly_complementary_criterion):
        res = check(crs, engine, assumptions, peaks)
        trace.append(res)
        if res.value is YES:
            return Verdict(CONFLUENT, res.criterion, res.hypotheses, peaks=peaks, trace=trace)
    w = search_counterexample(crs, engine, seeds=seeds, peaks=peaks)
    if w is not None:
        return Verdict(NOT_CONFLUENT, "counterexample", witness=w, peaks=peaks, trace=trace)
    survey = bounded_joinability_survey(crs, engine, assumptions, peaks=peaks)
    for p in survey.peaks:
        if p.witness is not None:
            return Verdict(NOT_CONFLUENT, "survey", witness=p.witness, advisory=survey,
                           peaks=peaks, trace=trace)
    diags = [f"{r.criterion}: {h.name} is {h.value}" + (f" ({h.detail})" if h.detail else "")
             for r in trace for h in r.failing()]
    return Verdict(UNKNOWN_VERDICT, None, advisory=survey, diagnostics=diags,
                   peaks=peaks, trace=trace)
