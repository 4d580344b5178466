"""Many-sorted first-order terms with a constructor sub-signature.

Two kinds of variables exist. General variables may stand for arbitrary
terms; constructor variables only for terms built from constructors and
other constructor variables. Positions are tuples of 1-based argument
indices, the empty tuple being the root.
"""

from __future__ import annotations

import weakref
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

GENERAL = "general"
CONSTRUCTOR = "constructor"

Position = Tuple[int, ...]


class TermError(ValueError):
    pass


class InvalidPosition(TermError):
    pass


class SortMismatch(TermError):
    pass


class OverlappingPositions(TermError):
    pass


class Signature:
    """Sorts plus function symbols, some of which are constructors.

    ``symbols`` maps a name to ``(argument sorts, result sort)``.
    """

    def __init__(self, sorts: Iterable[str], symbols: Dict[str, Tuple[Sequence[str], str]],
                 constructors: Iterable[str]):
        self.sorts = tuple(dict.fromkeys(sorts))
        self.symbols = {f: (tuple(args), res) for f, (args, res) in symbols.items()}
        self.constructors = frozenset(constructors)

    def arity(self, f: str) -> int:
        return len(self.symbols[f][0])

    def arg_sorts(self, f: str) -> Tuple[str, ...]:
        return self.symbols[f][0]

    def result_sort(self, f: str) -> str:
        return self.symbols[f][1]

    def is_constructor(self, f: str) -> bool:
        return f in self.constructors

    def problems(self) -> List[str]:
        """Consistency problems; an empty list means the signature is usable."""
        out = []
        if not self.sorts:
            out.append("no sorts declared")
        for f, (args, res) in self.symbols.items():
            for s in (*args, res):
                if s not in self.sorts:
                    out.append(f"symbol {f} uses undeclared sort {s}")
        for c in self.constructors:
            if c not in self.symbols:
                out.append(f"constructor {c} is not a declared symbol")
        if not out:
            for s in self.sorts:
                if s not in self.inhabited_sorts():
                    out.append(f"sort {s} has no ground constructor term")
        return out

    def inhabited_sorts(self) -> frozenset:
        """Sorts having at least one ground constructor term."""
        done: set = set()
        grew = True
        while grew:
            grew = False
            for c in self.constructors:
                args, res = self.symbols[c]
                if res not in done and all(a in done for a in args):
                    done.add(res)
                    grew = True
        return frozenset(done)

    def app(self, f: str, *args: "Term") -> "App":
        """Build ``f(args)`` checking arity and argument sorts."""
        if f not in self.symbols:
            raise TermError(f"unknown symbol {f}")
        want, res = self.symbols[f]
        if len(want) != len(args):
            raise TermError(f"{f} expects {len(want)} arguments, got {len(args)}")
        for i, (s, a) in enumerate(zip(want, args), 1):
            if a.sort != s:
                raise SortMismatch(f"argument {i} of {f} has sort {a.sort}, expected {s}")
        return App(f, tuple(args), res, f in self.constructors)

    def __eq__(self, other):
        return (isinstance(other, Signature) and self.sorts == other.sorts
                and self.symbols == other.symbols and self.constructors == other.constructors)

    __hash__ = None


class Term:
    __slots__ = ()

    def __str__(self):
        return term_str(self)

    __repr__ = __str__


class Var(Term):
    __slots__ = ("name", "sort", "kind", "_hash")

    def __init__(self, name: str, sort: str, kind: str = GENERAL):
        if kind not in (GENERAL, CONSTRUCTOR):
            raise TermError(f"bad variable kind {kind}")
        self.name = name
        self.sort = sort
        self.kind = kind
        self._hash = hash(("v", name, sort, kind))

    size = 1
    ground = False

    @property
    def all_cons(self):
        return True

    @property
    def cvars_only(self):
        return self.kind == CONSTRUCTOR

    def __eq__(self, other):
        return (self is other or isinstance(other, Var) and self.name == other.name
                and self.sort == other.sort and self.kind == other.kind)

    def __hash__(self):
        return self._hash


class App(Term):
    """Application node. ``cons`` records whether ``fn`` is a constructor.

    Nodes are hash-consed, so equal terms are the same object and equality
    is identity. Size, groundness and the constructor flags are computed
    once since the rewriting engine consults them constantly.
    """

    __slots__ = ("fn", "args", "sort", "cons", "size", "ground", "all_cons",
                 "cvars_only", "_hash", "__weakref__")
    _table: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()

    def __new__(cls, fn: str, args: Tuple[Term, ...], sort: str, cons: bool):
        key = (fn, args, sort, cons)
        t = cls._table.get(key)
        if t is not None:
            return t
        t = object.__new__(cls)
        t.fn = fn
        t.args = args
        t.sort = sort
        t.cons = cons
        t.size = 1 + sum(a.size for a in args)
        t.ground = all(a.ground for a in args)
        t.all_cons = cons and all(a.all_cons for a in args)
        t.cvars_only = all(a.cvars_only for a in args)
        t._hash = hash(key)
        cls._table[key] = t
        return t

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (App, (self.fn, self.args, self.sort, self.cons))


def term_str(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.fn
    return t.fn + "(" + ",".join(term_str(a) for a in t.args) + ")"


def sort_key(t: Term):
    """Deterministic ordering: smaller terms first, then by text."""
    return (t.size, term_str(t))


def is_constructor_term(t: Term) -> bool:
    """Only constructor symbols; variables of either kind allowed."""
    return t.all_cons


def is_pure_constructor_term(t: Term) -> bool:
    """Only constructor symbols and constructor variables."""
    return t.all_cons and t.cvars_only


def is_constructor_ground(t: Term) -> bool:
    return t.all_cons and t.ground


def positions(t: Term) -> List[Position]:
    """All positions of ``t`` in pre-order."""
    out: List[Position] = []

    def walk(u, p):
        out.append(p)
        if isinstance(u, App):
            for i, a in enumerate(u.args, 1):
                walk(a, p + (i,))

    walk(t, ())
    return out


def subterms(t: Term) -> Iterator[Tuple[Position, Term]]:
    """``(position, subterm)`` pairs in pre-order."""
    stack = [((), t)]
    while stack:
        p, u = stack.pop()
        yield p, u
        if isinstance(u, App):
            for i in range(len(u.args), 0, -1):
                stack.append((p + (i,), u.args[i - 1]))


def function_positions(t: Term) -> List[Position]:
    return [p for p in positions(t) if isinstance(subterm_at(t, p), App)]


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        if not isinstance(t, App) or not 1 <= i <= len(t.args):
            raise InvalidPosition(f"position {format_position(p)} not in {t}")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, p: Position, u: Term) -> Term:
    """``t[p <- u]``; the replacement must keep the sort."""
    old = subterm_at(t, p)
    if old.sort != u.sort:
        raise SortMismatch(f"cannot put {u} of sort {u.sort} where {old} of sort {old.sort} was")
    return _replace(t, p, u)


def _replace(t, p, u):
    if not p:
        return u
    i = p[0]
    args = list(t.args)
    args[i - 1] = _replace(args[i - 1], p[1:], u)
    return App(t.fn, tuple(args), t.sort, t.cons)


def is_prefix(p: Position, q: Position) -> bool:
    return q[:len(p)] == p


def replace_parallel(t: Term, replacements: Dict[Position, Term]) -> Term:
    ps = sorted(replacements)
    for a, b in zip(ps, ps[1:]):
        if is_prefix(a, b):
            raise OverlappingPositions(f"{format_position(a)} is above {format_position(b)}")
    for p in ps:
        t = replace_at(t, p, replacements[p])
    return t


def format_position(p: Position) -> str:
    return ".".join(map(str, p)) if p else "e"


def variables(t: Term) -> List[Var]:
    """Distinct variables in order of first occurrence."""
    seen: Dict[Var, None] = {}

    def walk(u):
        if isinstance(u, Var):
            seen.setdefault(u)
        else:
            for a in u.args:
                walk(a)

    walk(t)
    return list(seen)


def variable_occurrences(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from variable_occurrences(a)


def is_linear(t: Term) -> bool:
    occ = list(variable_occurrences(t))
    return len(occ) == len(set(occ))


def symbols(t: Term) -> Iterator[str]:
    if isinstance(t, App):
        yield t.fn
        for a in t.args:
            yield from symbols(a)


Substitution = Dict[Var, Term]


def apply_substitution(t: Term, sigma: Substitution) -> Term:
    if not sigma:
        return t
    if isinstance(t, Var):
        return sigma.get(t, t)
    if t.ground:
        return t
    return App(t.fn, tuple(apply_substitution(a, sigma) for a in t.args), t.sort, t.cons)


def compose(sigma: Substitution, tau: Substitution) -> Substitution:
    """The substitution applying ``sigma`` first, then ``tau``."""
    out = {x: apply_substitution(t, tau) for x, t in sigma.items()}
    for x, t in tau.items():
        out.setdefault(x, t)
    return {x: t for x, t in out.items() if t != x}


def binding_allowed(x: Var, t: Term) -> bool:
    """A constructor variable may only be bound to a pure constructor term."""
    return t.sort == x.sort and (x.kind == GENERAL or is_pure_constructor_term(t))


def match_term(pattern: Term, subject: Term,
               sigma: Optional[Substitution] = None) -> Optional[Substitution]:
    """Matcher with ``pattern sigma == subject`` respecting variable kinds."""
    sigma = dict(sigma) if sigma else {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            bound = sigma.get(p)
            if bound is None:
                if not binding_allowed(p, s):
                    return None
                sigma[p] = s
            elif bound != s:
                return None
        elif isinstance(s, Var) or p.fn != s.fn:
            return None
        else:
            stack.extend(zip(p.args, s.args))
    return sigma


def fresh_var(v: Var, taken: set) -> Var:
    """A variable like ``v`` whose name is not in ``taken``; adds the name."""
    i = 1
    while f"{v.name}{i}" in taken:
        i += 1
    name = f"{v.name}{i}"
    taken.add(name)
    return Var(name, v.sort, v.kind)


def mgu(equations: Sequence[Tuple[Term, Term]]) -> Optional[Substitution]:
    """Most general kind-respecting unifier, or None.

    When a constructor variable meets a term with general variables below
    constructors only, those general variables are narrowed to fresh
    constructor variables; any unifier has to do the same.
    """
    taken = {x.name for a, b in equations for t in (a, b) for x in variables(t)}
    sigma: Substitution = {}

    def walk(t):
        while isinstance(t, Var) and t in sigma:
            t = sigma[t]
        return t

    def resolve(t):
        t = walk(t)
        if isinstance(t, Var) or t.ground:
            return t
        return App(t.fn, tuple(resolve(a) for a in t.args), t.sort, t.cons)

    def occurs(x, t):
        t = walk(t)
        if isinstance(t, Var):
            return t == x
        return any(occurs(x, a) for a in t.args)

    def bind(x, t):
        if occurs(x, t):
            return False
        if x.kind == CONSTRUCTOR:
            t = resolve(t)
            if not t.all_cons:
                return False
            for y in variables(t):
                if y.kind == GENERAL:
                    sigma[y] = fresh_var(Var(y.name, y.sort, CONSTRUCTOR), taken)
        sigma[x] = t
        return True

    stack = list(equations)
    while stack:
        a, b = stack.pop()
        a, b = walk(a), walk(b)
        if a == b:
            continue
        if a.sort != b.sort:
            return None
        if isinstance(a, Var) and isinstance(b, Var):
            # keep the constructor variable when kinds differ
            if a.kind == CONSTRUCTOR and b.kind == GENERAL:
                a, b = b, a
            sigma[a] = b
        elif isinstance(a, Var):
            if not bind(a, b):
                return None
        elif isinstance(b, Var):
            if not bind(b, a):
                return None
        elif a.fn != b.fn or len(a.args) != len(b.args):
            return None
        else:
            stack.extend(zip(a.args, b.args))
    return {x: resolve(x) for x in sigma}


def ground_terms(sig: Signature, sort: str, max_size: int,
                 constructors_only: bool = False) -> List[Term]:
    """All ground terms of ``sort`` with at most ``max_size`` symbols, sorted."""
    table = _ground_table(sig, max_size, constructors_only)
    out = [t for n in range(1, max_size + 1) for t in table.get((sort, n), [])]
    out.sort(key=sort_key)
    return out


def _ground_table(sig, max_size, constructors_only):
    table: Dict[Tuple[str, int], List[Term]] = {}
    syms = sorted(f for f in sig.symbols if not constructors_only or f in sig.constructors)
    for n in range(1, max_size + 1):
        for f in syms:
            args, res = sig.symbols[f]
            if not args:
                if n == 1:
                    table.setdefault((res, 1), []).append(App(f, (), res, f in sig.constructors))
                continue
            for combo in _split(args, n - 1, table):
                table.setdefault((res, n), []).append(
                    App(f, combo, res, f in sig.constructors))
    return table


def _split(arg_sorts, total, table):
    if not arg_sorts:
        if total == 0:
            yield ()
        return
    first, rest = arg_sorts[0], arg_sorts[1:]
    for k in range(1, total - len(rest) + 1):
        for t in table.get((first, k), []):
            for tail in _split(rest, total - k, table):
                yield (t,) + tail
