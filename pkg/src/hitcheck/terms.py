"""Core syntax: nameless terms with name hints kept only for printing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Lam:
    name: str = field(compare=False)
    implicit: bool
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    implicit: bool = False


@dataclass(frozen=True)
class Pi:
    name: str = field(compare=False)
    implicit: bool
    domain: "Term"
    codomain: "Term"


@dataclass(frozen=True)
class Sigma:
    name: str = field(compare=False)
    first: "Term"
    second: "Term"


@dataclass(frozen=True)
class Pair:
    first: "Term"
    second: "Term"


@dataclass(frozen=True)
class Proj1:
    of: "Term"


@dataclass(frozen=True)
class Proj2:
    of: "Term"


@dataclass(frozen=True)
class Sort:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Meta:
    id: int


Term = Union[Var, Lam, App, Pi, Sigma, Pair, Proj1, Proj2, Sort, Const, Meta]

SORT = Sort()


def loose_bound(t: Term) -> int:
    """One more than the largest free index of ``t`` (0 when closed); cached per node."""
    cached = t.__dict__.get("_loose")
    if cached is not None:
        return cached
    match t:
        case Var(i):
            n = i + 1
        case App(f, a, _) | Pair(f, a):
            n = max(loose_bound(f), loose_bound(a))
        case Lam(_, _, b):
            n = max(loose_bound(b) - 1, 0)
        case Pi(_, _, a, b) | Sigma(_, a, b):
            n = max(loose_bound(a), loose_bound(b) - 1, 0)
        case Proj1(p) | Proj2(p):
            n = loose_bound(p)
        case _:
            n = 0
    object.__setattr__(t, "_loose", n)
    return n


def shift(t: Term, d: int, cutoff: int = 0) -> Term:
    """Add ``d`` to every free variable index ``>= cutoff``."""
    if d == 0 or loose_bound(t) <= cutoff:
        return t
    seen: dict[tuple[int, int], Term] = {}

    def go(t: Term, c: int) -> Term:
        if loose_bound(t) <= c:
            return t
        key = (id(t), c)
        hit = seen.get(key)
        if hit is not None:
            return hit
        match t:
            case Var(i):
                r = Var(i + d)
            case App(f, a, imp):
                r = App(go(f, c), go(a, c), imp)
            case Lam(n, imp, b):
                r = Lam(n, imp, go(b, c + 1))
            case Pi(n, imp, a, b):
                r = Pi(n, imp, go(a, c), go(b, c + 1))
            case Sigma(n, a, b):
                r = Sigma(n, go(a, c), go(b, c + 1))
            case Pair(a, b):
                r = Pair(go(a, c), go(b, c))
            case Proj1(p):
                r = Proj1(go(p, c))
            case Proj2(p):
                r = Proj2(go(p, c))
            case _:
                r = t
        seen[key] = r
        return r

    return go(t, cutoff)


def subst_many(t: Term, values: Sequence[Term], depth: int = 0) -> Term:
    """Replace the ``len(values)`` outermost free variables of ``t``.

    ``values[0]`` replaces the variable bound furthest out, so
    ``values[-1]`` replaces ``Var(0)``.  The values live in the context
    that remains once those variables are removed.  Shared subterms are
    visited once per binder depth, so the result keeps the input's sharing.
    """
    k = len(values)
    if k == 0 or loose_bound(t) <= depth:
        return t
    seen: dict[tuple[int, int], Term] = {}
    shifted: dict[tuple[int, int], Term] = {}

    def value(j: int, dd: int) -> Term:
        hit = shifted.get((j, dd))
        if hit is None:
            hit = shifted[(j, dd)] = shift(values[j], dd)
        return hit

    def go(t: Term, dd: int) -> Term:
        if loose_bound(t) <= dd:
            return t
        key = (id(t), dd)
        hit = seen.get(key)
        if hit is not None:
            return hit
        match t:
            case Var(i):
                r = value(k - 1 - (i - dd), dd) if i - dd < k else Var(i - k)
            case App(f, a, imp):
                r = App(go(f, dd), go(a, dd), imp)
            case Lam(n, imp, b):
                r = Lam(n, imp, go(b, dd + 1))
            case Pi(n, imp, a, b):
                r = Pi(n, imp, go(a, dd), go(b, dd + 1))
            case Sigma(n, a, b):
                r = Sigma(n, go(a, dd), go(b, dd + 1))
            case Pair(a, b):
                r = Pair(go(a, dd), go(b, dd))
            case Proj1(p):
                r = Proj1(go(p, dd))
            case Proj2(p):
                r = Proj2(go(p, dd))
            case _:
                r = t
        seen[key] = r
        return r

    return go(t, depth)


def instantiate(body: Term, value: Term) -> Term:
    """Substitute ``value`` for ``Var(0)`` in ``body`` (opening one binder)."""
    return subst_many(body, [value])


def unapply(t: Term) -> tuple[Term, list[tuple[Term, bool]]]:
    args: list[tuple[Term, bool]] = []
    while isinstance(t, App):
        args.append((t.arg, t.implicit))
        t = t.fn
    args.reverse()
    return t, args


def apply(head: Term, args: Sequence[tuple[Term, bool]]) -> Term:
    for a, imp in args:
        head = App(head, a, imp)
    return head


def free_vars(t: Term, depth: int = 0, acc: set[int] | None = None) -> set[int]:
    """Free variable indices of ``t`` (relative to its outer context)."""
    if acc is None:
        acc = set()
    match t:
        case Var(i):
            if i >= depth:
                acc.add(i - depth)
        case App(f, a, _):
            free_vars(f, depth, acc)
            free_vars(a, depth, acc)
        case Lam(_, _, b):
            free_vars(b, depth + 1, acc)
        case Pi(_, _, a, b) | Sigma(_, a, b):
            free_vars(a, depth, acc)
            free_vars(b, depth + 1, acc)
        case Pair(a, b):
            free_vars(a, depth, acc)
            free_vars(b, depth, acc)
        case Proj1(p) | Proj2(p):
            free_vars(p, depth, acc)
    return acc


def metas_of(t: Term, acc: set[int] | None = None) -> set[int]:
    if acc is None:
        acc = set()
    match t:
        case Meta(m):
            acc.add(m)
        case App(f, a, _):
            metas_of(f, acc)
            metas_of(a, acc)
        case Lam(_, _, b) | Proj1(b) | Proj2(b):
            metas_of(b, acc)
        case Pi(_, _, a, b) | Sigma(_, a, b) | Pair(a, b):
            metas_of(a, acc)
            metas_of(b, acc)
    return acc


def constants_of(t: Term, acc: set[str] | None = None) -> set[str]:
    if acc is None:
        acc = set()
    match t:
        case Const(c):
            acc.add(c)
        case App(f, a, _):
            constants_of(f, acc)
            constants_of(a, acc)
        case Lam(_, _, b) | Proj1(b) | Proj2(b):
            constants_of(b, acc)
        case Pi(_, _, a, b) | Sigma(_, a, b) | Pair(a, b):
            constants_of(a, acc)
            constants_of(b, acc)
    return acc


def size(t: Term) -> int:
    match t:
        case App(f, a, _):
            return 1 + size(f) + size(a)
        case Lam(_, _, b) | Proj1(b) | Proj2(b):
            return 1 + size(b)
        case Pi(_, _, a, b) | Sigma(_, a, b) | Pair(a, b):
            return 1 + size(a) + size(b)
    return 1


def subterms(t: Term, depth: int = 0):
    """Yield ``(subterm, binder_depth)`` pairs, outermost first."""
    yield t, depth
    match t:
        case App(f, a, _):
            yield from subterms(f, depth)
            yield from subterms(a, depth)
        case Lam(_, _, b):
            yield from subterms(b, depth + 1)
        case Pi(_, _, a, b) | Sigma(_, a, b):
            yield from subterms(a, depth)
            yield from subterms(b, depth + 1)
        case Pair(a, b):
            yield from subterms(a, depth)
            yield from subterms(b, depth)
        case Proj1(p) | Proj2(p):
            yield from subterms(p, depth)


def pi_telescope(t: Term) -> tuple[list[tuple[str, bool, Term]], Term]:
    tele = []
    while isinstance(t, Pi):
        tele.append((t.name, t.implicit, t.domain))
        t = t.codomain
    return tele, t


def close_pi(tele: Sequence[tuple[str, bool, Term]], body: Term) -> Term:
    for name, imp, dom in reversed(tele):
        body = Pi(name, imp, dom, body)
    return body


def close_lam(tele: Sequence[tuple[str, bool]], body: Term) -> Term:
    for name, imp in reversed(tele):
        body = Lam(name, imp, body)
    return body
