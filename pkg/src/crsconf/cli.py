"""Command-line front end.

Exit codes for ``check``: 0 confluent, 1 not confluent, 2 unknown.
Every command exits with 3 on unreadable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .criteria import Assumptions, Verdict, run_pipeline
from .crs import CRS
from .depth import parse_depth
from .engine import Budget, Engine
from .peaks import compute_critical_peaks, is_complementary, is_weakly_complementary
from .syntax import Document, ParseError, parse_document, parse_term
from .terms import format_position, sort_key

EXIT = {"confluent": 0, "not-confluent": 1, "unknown": 2}
INPUT_ERROR = 3


class InputError(Exception):
    pass


def load(path: str) -> Document:
    if path.startswith("corpus:"):
        from .corpus import load_case
        try:
            text = load_case(path[len("corpus:"):]).text
        except KeyError as e:
            raise InputError(str(e)) from None
    else:
        try:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise InputError(f"{path}: {e.strerror}") from None
    try:
        return parse_document(text)
    except ParseError as e:
        raise InputError("\n".join(f"{path}:{d}" for d in e.diagnostics)) from None


def term_arg(text: str, crs: CRS):
    try:
        return parse_term(text, crs)
    except ParseError as e:
        raise InputError("\n".join(f"term {text!r}: {d.message}" for d in e.diagnostics)) from None


def budget_from(args) -> Budget:
    return Budget.from_env(max_steps=args.max_steps, max_term_size=args.max_term_size,
                           max_strata=args.max_strata, max_depth=args.max_depth,
                           inst_size_bound=args.inst_bound)


def peak_json(crs, engine, k, cp):
    return {
        "index": k + 1,
        "inner_rule": crs.rule_id(cp.rule0),
        "outer_rule": crs.rule_id(cp.rule1),
        "position": list(cp.pos),
        "form": list(cp.form),
        "overlay": cp.is_overlay,
        "peak": str(cp.peak_term),
        "t0": str(cp.t0), "d0": [str(l) for l in cp.d0],
        "t1": str(cp.t1), "d1": [str(l) for l in cp.d1],
        "complementary": is_complementary(cp, engine).value,
        "weakly_complementary": is_weakly_complementary(cp, engine).value,
    }


def verdict_json(crs: CRS, engine: Engine, v: Verdict, assumptions: Assumptions) -> dict:
    return {
        "verdict": v.status,
        "criterion": v.criterion,
        "hypotheses": [dict(h.to_json(), criterion=r.criterion)
                       for r in v.trace for h in r.hypotheses],
        "peaks": [peak_json(crs, engine, k, cp) for k, cp in enumerate(v.peaks)],
        "witness": v.witness.to_json(crs) if v.witness else None,
        "advisory": v.advisory.to_json() if v.advisory else None,
        "diagnostics": v.diagnostics,
        "assumptions": {"terminating": assumptions.terminating,
                        "constructor_confluent": assumptions.constructor_confluent,
                        "cvar_equations": assumptions.cvar_equations(crs)},
    }


def print_verdict(crs: CRS, v: Verdict, out):
    print(f"verdict: {v.status}" + (f" ({v.criterion})" if v.criterion else ""), file=out)
    for r in v.trace:
        print(f"criterion {r.criterion}: {r.value}", file=out)
        for h in r.hypotheses:
            extra = f"  [{h.detail}]" if h.detail else ""
            print(f"  {h.value.value:8} {h.name}{extra}", file=out)
    print(f"critical peaks: {len(v.peaks)}", file=out)
    if v.witness:
        w = v.witness
        print(f"witness: {w.seed} rewrites to both {w.left} and {w.right}", file=out)
        for name, path, depths in (("left", w.left_path, w.left_depths),
                                   ("right", w.right_path, w.right_depths)):
            print(f"  {name}:", file=out)
            for e, d in zip(path, depths):
                print(f"    {e.source} -> {e.target}  [{crs.rule_id(e.rule)} at "
                      f"{format_position(e.pos)}, index {d}]", file=out)
        for t, r in ((w.left, w.left_reach), (w.right, w.right_reach)):
            members = ", ".join(str(u) for u in sorted(r.members, key=sort_key))
            print(f"  reach({t}) = {{{members}}} (complete)", file=out)
    if v.advisory:
        print(f"advisory survey: {v.advisory.label}", file=out)
        for p in v.advisory.peaks:
            counts = ", ".join(f"{k} {n}" for k, n in p.counts.items() if n)
            print(f"  peak {p.peak}: {p.status} ({counts or 'no instances'};"
                  f" {p.excluded} not normalized)", file=out)
    for d in v.diagnostics:
        print(f"  note: {d}", file=out)


def cmd_check(args, out) -> int:
    doc = load(args.file)
    a = doc.assumptions
    if args.assume_terminating:
        a.terminating = True
    if args.assume_constructor_confluent:
        a.constructor_confluent = True
    if args.assume_cvar_equations is not None:
        a.assume_cvar_equations = args.assume_cvar_equations
    engine = Engine(doc.crs, budget_from(args))
    seeds = [term_arg(s, doc.crs) for s in args.seed] if args.seed else None
    v = run_pipeline(doc.crs, a, seeds=seeds, engine=engine)
    if args.format == "json":
        json.dump(verdict_json(doc.crs, engine, v, a), out, indent=2)
        print(file=out)
    else:
        print_verdict(doc.crs, v, out)
    return EXIT[v.status]


def cmd_peaks(args, out) -> int:
    doc = load(args.file)
    engine = Engine(doc.crs, budget_from(args))
    peaks = compute_critical_peaks(doc.crs)
    if args.format == "json":
        json.dump({"peaks": [peak_json(doc.crs, engine, k, cp) for k, cp in enumerate(peaks)]},
                  out, indent=2)
        print(file=out)
        return 0
    print(f"{len(peaks)} critical peaks", file=out)
    for k, cp in enumerate(peaks):
        tags = [f"({cp.lam0},{cp.lam1})", "overlay" if cp.is_overlay else "non-overlay"]
        c = is_complementary(cp, engine)
        tags.append({"yes": "complementary", "no": "not complementary"}.get(
            c.value, "complementarity unknown"))
        print(f"{k + 1}. " + ", ".join(tags), file=out)
        print("   " + cp.describe(doc.crs).replace("\n", "\n   "), file=out)
    return 0


def cmd_reduce(args, out) -> int:
    doc = load(args.file)
    t = term_arg(args.term, doc.crs)
    budget = budget_from(args)
    if args.fuel is not None:
        budget = Budget(**{**budget.__dict__, "max_steps": args.fuel})
    engine = Engine(doc.crs, budget)
    depth = parse_depth(args.depth)
    r = engine.reachable(t, depth)
    nfs, nf_complete = engine.normal_forms(t, depth)
    members = sorted(r.members, key=sort_key)
    if args.format == "json":
        json.dump({"term": str(t), "depth": str(depth), "complete": r.complete,
                   "reach": [str(u) for u in members],
                   "normal_forms": [str(u) for u in nfs],
                   "normal_forms_complete": nf_complete}, out, indent=2)
        print(file=out)
        return 0
    print(f"reach set of {t} at index {depth}: {len(members)} terms, "
          f"{'complete' if r.complete else 'incomplete'}", file=out)
    for u in members:
        print(f"  {u}", file=out)
    print("normal forms: " + (", ".join(map(str, nfs)) or "none found")
          + ("" if nf_complete else " (possibly more)"), file=out)
    return 0


def cmd_join(args, out) -> int:
    doc = load(args.file)
    t0, t1 = term_arg(args.t0, doc.crs), term_arg(args.t1, doc.crs)
    engine = Engine(doc.crs, budget_from(args))
    depth = parse_depth(args.depth)
    verdict, common, r0, r1 = engine.join_evidence(t0, t1, depth)
    if args.format == "json":
        json.dump({"joinable": verdict.value, "depth": str(depth),
                   "common_reduct": str(common) if common else None,
                   "reach0": sorted(map(str, r0.members)), "complete0": r0.complete,
                   "reach1": sorted(map(str, r1.members)), "complete1": r1.complete},
                  out, indent=2)
        print(file=out)
        return 0
    print(f"joinable at index {depth}: {verdict.value}", file=out)
    if common is not None:
        print(f"  common reduct: {common}", file=out)
    for t, r in ((t0, r0), (t1, r1)):
        members = ", ".join(str(u) for u in sorted(r.members, key=sort_key))
        print(f"  reach({t}) = {{{members}}}" + ("" if r.complete else " (incomplete)"),
              file=out)
    return 0


def cmd_corpus(args, out) -> int:
    from .corpus import list_cases, load_case
    if args.id:
        try:
            out.write(load_case(args.id).text)
        except KeyError as e:
            raise InputError(str(e)) from None
    else:
        for cid in list_cases():
            print(cid, file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crsconf",
                                 description="Confluence analysis for conditional rewrite systems.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--max-steps", type=int)
    common.add_argument("--max-term-size", type=int)
    common.add_argument("--max-strata", type=int)
    common.add_argument("--max-depth", type=int)
    common.add_argument("--inst-bound", type=int)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="run the decision pipeline")
    p.add_argument("file", help="system file, or corpus:ID")
    p.add_argument("--assume-terminating", action="store_true")
    p.add_argument("--assume-constructor-confluent", action="store_true")
    p.add_argument("--assume-cvar-equations", dest="assume_cvar_equations",
                   action="store_true", default=None)
    p.add_argument("--no-assume-cvar-equations", dest="assume_cvar_equations",
                   action="store_false")
    p.add_argument("--seed", action="append", help="term to start the witness search from")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("peaks", parents=[common], help="list critical peaks")
    p.add_argument("file")
    p.set_defaults(run=cmd_peaks)

    p = sub.add_parser("reduce", parents=[common], help="reach set and normal forms of a term")
    p.add_argument("file")
    p.add_argument("term")
    p.add_argument("--depth", default="w+w")
    p.add_argument("--fuel", type=int, help="step budget, overrides --max-steps")
    p.set_defaults(run=cmd_reduce)

    p = sub.add_parser("join", parents=[common], help="decide joinability of two terms")
    p.add_argument("file")
    p.add_argument("t0")
    p.add_argument("t1")
    p.add_argument("--depth", default="w+w")
    p.set_defaults(run=cmd_join)

    p = sub.add_parser("corpus", help="list bundled examples or print one")
    p.add_argument("id", nargs="?")
    p.set_defaults(run=cmd_corpus)
    return ap


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.run(args, out)
    except (InputError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
