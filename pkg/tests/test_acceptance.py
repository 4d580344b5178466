"""Acceptance criteria, one numbered group each.

Run under pytest or directly as a script; either way a PASS/FAIL line per
criterion is printed at the end.
"""

import io
import json
import random

import pytest

from crsconf.cli import main as cli_main
from crsconf.corpus import load_case
from crsconf.criteria import (CONFLUENT, NOT_CONFLUENT, UNKNOWN_VERDICT,
                              bounded_joinability_survey, check_complementary_criterion,
                              check_constructor_confluence,
                              check_weakly_complementary_criterion, run_pipeline,
                              search_counterexample)
from crsconf.crs import (Rule, ValidationError, VariableSystem, constructor_subsystem,
                         validate_crs)
from crsconf.depth import OMEGA, OMEGA_OMEGA, fin, omega_plus
from crsconf.engine import NO, YES, Budget, Engine
from crsconf.peaks import (InstanceOutcome, compute_critical_peaks, is_complementary,
                           peak_instance_joinability)
from crsconf.syntax import parse_term
from crsconf.terms import (CONSTRUCTOR, GENERAL, Signature, Var, apply_substitution,
                           function_positions, ground_terms, is_constructor_term,
                           is_pure_constructor_term, match_term, mgu, positions,
                           replace_at, replace_parallel, subterm_at, variables)

CASES = 1000


def case(cid, **budget):
    c = load_case(cid)
    return c.crs, Engine(c.crs, Budget(**budget)), c.assumptions


def hyp(res, name):
    return next(h for h in res.hypotheses if h.name == name)


@pytest.mark.acceptance(1, "member system: two complementary overlays, confluent")
def test_member_peaks_and_verdict():
    crs, e, a = case("member")
    peaks = compute_critical_peaks(crs)
    assert len(peaks) == 2
    for cp in peaks:
        assert cp.is_overlay and cp.form == (1, 1)
        assert is_complementary(cp, e) is YES
    v = run_pipeline(crs, a, engine=e)
    assert (v.status, v.criterion) == (CONFLUENT, "complementary")


@pytest.mark.acceptance(2, "while system: confluent, weak criterion blocked by general variables")
def test_while():
    crs, e, a = case("while")
    v = run_pipeline(crs, a, engine=e)
    assert (v.status, v.criterion) == (CONFLUENT, "complementary")
    weak = check_weakly_complementary_criterion(crs, e, a)
    assert weak.value is NO
    h = hyp(weak, "conditions use constructor variables only")
    assert h.value is NO and "rule6" in h.detail and "rule7" in h.detail


@pytest.mark.acceptance(3, "non-left-linear system: no peaks, witness c/d from plus(0,0)")
def test_not_left_linear():
    crs, e, a = case("not-left-linear", max_steps=50)
    assert compute_critical_peaks(crs) == []
    res = check_complementary_criterion(crs, e, a)
    assert hyp(res, "left-linear").value is NO and res.value is NO
    w = search_counterexample(crs, e, seeds=[parse_term("plus(0,0)", crs)])
    assert w is not None
    assert {str(w.left), str(w.right)} == {"c", "d"}
    assert w.replay(e)


@pytest.mark.acceptance(4, "Bergstra-Klop system: witness d/g(d) with stabilized irreducibility")
@pytest.mark.parametrize("strata", [1, 2, 3, 4])
def test_bergstra_klop(strata):
    crs, e, a = case("bergstra-klop", max_strata=strata)
    assert compute_critical_peaks(crs) == []
    assert e.is_irreducible(parse_term("g(d)", crs)) is YES
    v = run_pipeline(crs, a, engine=e)
    assert v.status == NOT_CONFLUENT
    assert {str(v.witness.left), str(v.witness.right)} == {"d", "g(d)"}
    assert v.witness.replay(e)


@pytest.mark.acceptance(5, "Gramlich system: joinable peak instance, still not confluent")
def test_gramlich():
    crs, e, a = case("gramlich")
    (cp,) = compute_critical_peaks(crs)
    assert peak_instance_joinability(cp, {}, e) is InstanceOutcome.JOINABLE
    v = run_pipeline(crs, a, engine=e)
    assert v.status == NOT_CONFLUENT
    w = v.witness
    assert str(w.seed) == "f(a)"
    assert {str(w.left), str(w.right)} == {"f(c)", "g(c)"}
    assert w.replay(e)


@pytest.mark.acceptance(6, "toll system: witness from plus(a,a) using steps at w+2")
def test_toll():
    crs, e, a = case("toll")
    v = run_pipeline(crs, a, engine=e)
    assert v.status == NOT_CONFLUENT
    w = v.witness
    assert str(w.seed) == "plus(a,a)"
    assert w.replay(e)
    assert omega_plus(2) in w.left_depths + w.right_depths
    assert e.joinable(w.left, w.right) is NO


@pytest.mark.acceptance(7, "integer system: constructor part confluent, survey supported, unknown")
def test_integer():
    crs, e, a = case("integer")
    assert a.terminating
    cc = check_constructor_confluence(crs, e)
    assert cc.value is YES
    assert hyp(cc, "left-linear").value is YES and hyp(cc, "normal").value is YES
    assert compute_critical_peaks(constructor_subsystem(crs)) == []
    peaks = compute_critical_peaks(crs)
    assert peaks and all(is_complementary(cp, e) is NO for cp in peaks)
    report = bounded_joinability_survey(crs, e, a, k=3)
    assert report.supported
    for p in report.peaks:
        total = sum(p.counts.values())
        assert total > 0 and p.counts[InstanceOutcome.CONDITION_INFEASIBLE.value] == total
    v = run_pipeline(crs, a, engine=e)
    assert v.status == UNKNOWN_VERDICT and v.advisory.label == "SUPPORTED (bounded, k=3)"
    for n in range(5):
        for term, want in (("s(" * n + "0" + ")" * n, "true"),
                           ("p(" * (n + 1) + "0" + ")" * (n + 1), "false")):
            out = io.StringIO()
            assert cli_main(["reduce", "corpus:integer", f"nonneg({term})", "--format", "json"],
                            out) == 0
            assert json.loads(out.getvalue())["normal_forms"] == [want]


# property suites

SYSTEMS = ["member", "while", "integer", "int-plus", "toll", "bergstra-klop", "gramlich",
           "not-left-linear", "asso", "quasi-over", "swap", "flip"]
DEPTHS = [fin(0), fin(1), fin(2), fin(3), OMEGA, omega_plus(1), omega_plus(2), omega_plus(3),
          OMEGA_OMEGA]
PROP_BUDGET = dict(max_steps=100, max_term_size=12, max_strata=4)

_engines = {}


def system(cid):
    if cid not in _engines:
        crs = load_case(cid).crs
        _engines[cid] = (crs, Engine(crs, Budget(**PROP_BUDGET)))
    return _engines[cid]


def random_term(rng, sig, sort, size, pool=(), constructors_only=False):
    """Random term of ``sort`` with at most ``size`` symbols over ``pool`` variables."""
    vs = [v for v in pool if v.sort == sort]
    if vs and rng.random() < 0.25:
        return rng.choice(vs)
    opts = [f for f, (args, res) in sig.symbols.items()
            if res == sort and len(args) < size
            and (not constructors_only or sig.is_constructor(f))]
    if not opts:
        if vs:
            return rng.choice(vs)
        return ground_terms(sig, sort, 4, constructors_only)[0]
    compound = [f for f in opts if sig.arity(f)]
    f = rng.choice(compound if compound and rng.random() < 0.8 else opts)
    args, rest = [], size - 1
    arg_sorts = sig.arg_sorts(f)
    for i, s in enumerate(arg_sorts):
        share = max(1, rest - (len(arg_sorts) - i - 1))
        n = rng.randint(1, share)
        args.append(random_term(rng, sig, s, n, pool, constructors_only))
        rest -= args[-1].size
    return sig.app(f, *args)


def step_keys(ss):
    return {(s.pos, s.rule, s.reduct) for s in ss.steps}


def pick_system(rng, want=None):
    names = [n for n in SYSTEMS if want is None or want(system(n)[0])]
    return system(rng.choice(names))


@pytest.mark.acceptance(8, "property suites")
def test_depth_monotonicity():
    rng = random.Random(8001)
    checked = steps_seen = 0
    while checked < CASES:
        crs, e = pick_system(rng)
        t = random_term(rng, crs.signature, rng.choice(crs.signature.sorts), 8)
        lo, hi = sorted(rng.sample(DEPTHS, 2))
        small, big = e.one_step_reducts(t, lo), e.one_step_reducts(t, hi)
        if not big.complete:
            continue
        assert step_keys(small) <= step_keys(big), (str(t), str(lo), str(hi))
        steps_seen += len(small.steps)
        checked += 1
    assert steps_seen > 0


@pytest.mark.acceptance(8, "property suites")
def test_constructor_keeping():
    rng = random.Random(8002)
    checked = steps_seen = 0
    while checked < CASES:
        crs, e = pick_system(rng, lambda c: c.constructor_rules)
        pool = list(crs.varsys.vars.values())
        t = random_term(rng, crs.signature, rng.choice(crs.signature.sorts), 8, pool,
                        constructors_only=True)
        d = rng.choice(DEPTHS)
        ss = e.one_step_reducts(t, d)
        at_omega = e.one_step_reducts(t, OMEGA)
        if not at_omega.complete:
            continue
        for s in ss.steps:
            assert is_constructor_term(s.reduct)
        assert step_keys(ss) <= step_keys(at_omega)
        steps_seen += len(ss.steps)
        checked += 1
    assert steps_seen > 0


@pytest.mark.acceptance(8, "property suites")
def test_substitution_stability():
    rng = random.Random(8003)
    checked = steps_seen = 0
    while checked < CASES:
        crs, e = pick_system(rng, lambda c: c.x_has_gvars and c.varsys.general())
        sig = crs.signature
        pool = crs.varsys.general()
        t = random_term(rng, sig, rng.choice(sig.sorts), 8, pool)
        d = rng.choice(DEPTHS)
        sigma = {x: random_term(rng, sig, x.sort, 4) for x in variables(t)}
        ts = apply_substitution(t, sigma)
        after = e.one_step_reducts(ts, d)
        if not after.complete:
            continue
        before = e.one_step_reducts(t, d)
        for s in before.steps:
            assert (s.pos, s.rule, apply_substitution(s.reduct, sigma)) in step_keys(after)
        steps_seen += len(before.steps)
        checked += 1
    assert steps_seen > 0


@pytest.mark.acceptance(8, "property suites")
def test_replacement_monotonicity():
    rng = random.Random(8004)
    checked = steps_seen = 0
    while checked < CASES:
        crs, e = pick_system(rng)
        sig = crs.signature
        inner = random_term(rng, sig, rng.choice(sig.sorts), 4)
        d = rng.choice(DEPTHS)
        ss = e.one_step_reducts(inner, d)
        outer = random_term(rng, sig, rng.choice(sig.sorts), 5)
        spots = [p for p in positions(outer) if subterm_at(outer, p).sort == inner.sort]
        if not spots:
            continue
        p = rng.choice(spots)
        big = e.one_step_reducts(replace_at(outer, p, inner), d)
        if not big.complete:
            continue
        keys = step_keys(big)
        for s in ss.steps:
            assert (p + s.pos, s.rule, replace_at(outer, p, s.reduct)) in keys
        steps_seen += len(ss.steps)
        checked += 1
    assert steps_seen > 0


@pytest.mark.acceptance(8, "property suites")
def test_sandwich():
    rng = random.Random(8005)
    checked = 0
    while checked < CASES:
        crs, e = pick_system(rng)
        t = random_term(rng, crs.signature, rng.choice(crs.signature.sorts), 8)
        one = {s.reduct for s in e.one_step_reducts(t, OMEGA_OMEGA).steps}
        par, par_complete = e.parallel_reducts(t)
        assert one <= par
        reach = e.reachable(t)
        if not (reach.complete and par_complete):
            continue
        assert par <= reach.members
        checked += 1


def anti_instance(rng, t, taken):
    """Generalize ``t`` by replacing random subterms with fresh variables.

    Returns the generalization and the bindings that undo it."""
    if rng.random() < 0.3:
        kind = CONSTRUCTOR if is_pure_constructor_term(t) and rng.random() < 0.5 else GENERAL
        i = len(taken)
        while f"Z{i}" in taken:
            i += 1
        v = Var(f"Z{i}", t.sort, kind)
        taken.add(v.name)
        return v, {v: t}
    if isinstance(t, Var) or not t.args:
        return t, {}
    args, bind = [], {}
    for a in t.args:
        g, b = anti_instance(rng, a, taken)
        args.append(g)
        bind.update(b)
    return type(t)(t.fn, tuple(args), t.sort, t.cons), bind


@pytest.mark.acceptance(8, "property suites")
def test_mgu_soundness_and_generality():
    rng = random.Random(8006)
    unified = 0
    for _ in range(CASES):
        crs, _ = pick_system(rng)
        sig = crs.signature
        pool = list(crs.varsys.vars.values())
        sort = rng.choice(sig.sorts)
        # soundness on arbitrary pairs
        a = random_term(rng, sig, sort, 6, pool)
        b = random_term(rng, sig, sort, 6, pool)
        sigma = mgu([(a, b)])
        if sigma is not None:
            assert apply_substitution(a, sigma) == apply_substitution(b, sigma)
            assert all(x.kind == GENERAL or is_pure_constructor_term(t)
                       for x, t in sigma.items())
            unified += 1
        # generality against a known unifier built by anti-instantiation
        theta = {x: random_term(rng, sig, x.sort, 4, (), x.kind == CONSTRUCTOR)
                 for x in variables(a)}
        gen, back = anti_instance(rng, apply_substitution(a, theta),
                                  {v.name for v in pool})
        theta.update(back)
        assert apply_substitution(a, theta) == apply_substitution(gen, theta)
        sigma = mgu([(a, gen)])
        assert sigma is not None, (str(a), str(gen))
        assert apply_substitution(a, sigma) == apply_substitution(gen, sigma)
        rho = {}
        for x in set(variables(a)) | set(variables(gen)):
            rho = match_term(apply_substitution(x, sigma), theta.get(x, x), rho)
            assert rho is not None, (str(a), str(gen), str(x))
    assert unified > 0


@pytest.mark.acceptance(8, "property suites")
def test_position_round_trips():
    rng = random.Random(8007)
    for _ in range(CASES):
        crs, _ = pick_system(rng)
        sig = crs.signature
        pool = list(crs.varsys.vars.values())
        t = random_term(rng, sig, rng.choice(sig.sorts), 8, pool)
        ps = positions(t)
        assert len(ps) == t.size
        p = rng.choice(ps)
        assert replace_at(t, p, subterm_at(t, p)) is t
        u = random_term(rng, sig, subterm_at(t, p).sort, 4, pool)
        assert subterm_at(replace_at(t, p, u), p) == u
        # parallel replacement at disjoint positions equals sequential replacement
        q = rng.choice(ps)
        if q[:len(p)] != p and p[:len(q)] != q:
            v = random_term(rng, sig, subterm_at(t, q).sort, 4, pool)
            seq = replace_at(replace_at(t, p, u), q, v)
            assert replace_parallel(t, {p: u, q: v}) is seq


CP_SIG = Signature(["n"], {"0": ((), "n"), "s": (("n",), "n"), "f": (("n",), "n"),
                           "g": (("n", "n"), "n")}, ["0", "s"])
CP_VARS = [Var("X", "n"), Var("Y", "n"), Var("x", "n", CONSTRUCTOR)]


def random_rule(rng):
    while True:
        lhs = random_term(rng, CP_SIG, "n", rng.randint(2, 4), CP_VARS)
        if isinstance(lhs, Var):
            continue
        rhs = random_term(rng, CP_SIG, "n", rng.randint(1, 3), variables(lhs))
        return Rule(lhs, rhs)


@pytest.mark.acceptance(8, "property suites")
def test_critical_peak_completeness():
    rng = random.Random(8008)
    ground = [t for t in ground_terms(CP_SIG, "n", 6)]
    systems = divergences = 0
    while systems < CASES:
        try:
            crs = validate_crs([random_rule(rng), random_rule(rng)], CP_SIG,
                               VariableSystem(CP_VARS))
        except ValidationError:
            continue
        systems += 1
        peaks = compute_critical_peaks(crs)
        root = {}
        for t in ground:
            root[t] = []
            for i, r in enumerate(crs.rules):
                m = match_term(r.lhs, t)
                if m is not None:
                    root[t].append((i, apply_substitution(r.rhs, m)))
        for t in ground:
            for outer, t1 in root[t]:
                for q in function_positions(crs.rules[outer].lhs):
                    for inner, red in root[subterm_at(t, q)]:
                        t0 = replace_at(t, q, red)
                        if t0 == t1:
                            continue
                        divergences += 1
                        assert any(_covers(cp, t, t0, t1) for cp in peaks
                                   if (cp.rule0, cp.rule1, cp.pos) == (inner, outer, q)), (
                            [str(r) for r in crs.rules], str(t), q)
    assert divergences > 0


def _covers(cp, t, t0, t1):
    phi = match_term(cp.peak_term, t)
    return (phi is not None and apply_substitution(cp.t0, phi) == t0
            and apply_substitution(cp.t1, phi) == t1)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
