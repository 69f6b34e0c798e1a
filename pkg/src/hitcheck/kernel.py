"""Reduction, conversion and bidirectional checking of core terms."""

from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Mapping, Optional, Sequence

from .env import (
    CheckError,
    Environment,
    NotAFunction,
    NotAPair,
    TypeMismatch,
    UnboundVariable,
    current_budget,
)
from .pretty import show
from .rewrite import rewrite_spine
from .terms import (
    SORT,
    App,
    Const,
    Lam,
    Meta,
    Pair,
    Pi,
    Proj1,
    Proj2,
    Sigma,
    Sort,
    Term,
    Var,
    apply,
    instantiate,
    loose_bound,
    shift,
    subst_many,
    unapply,
)

Context = Sequence[tuple[str, Term]]
Metas = Optional[Mapping[int, Term]]


class CannotInfer(CheckError):
    pass


def whnf(env: Environment, t: Term, metas: Metas = None) -> Term:
    """Weak-head normal form: beta, projections, definitions, rewrite rules."""
    budget = current_budget()
    while True:
        head, args = unapply(t)
        match head:
            case Lam() if args:
                # substitute every saturated binder in one traversal
                body, values = head, []
                while isinstance(body, Lam) and len(values) < len(args):
                    budget.tick()
                    values.append(args[len(values)][0])
                    body = body.body
                t = apply(subst_many(body, values), args[len(values):])
                continue
            case Proj1(p) | Proj2(p):
                inner = whnf(env, p, metas)
                if isinstance(inner, Pair):
                    budget.tick()
                    t = apply(inner.first if isinstance(head, Proj1) else inner.second, args)
                    continue
                if inner is not p:
                    return apply(type(head)(inner), args)
                return t
            case Meta(m) if metas is not None and m in metas:
                budget.tick()
                t = apply(metas[m], args)
                continue
            case Const(c):
                decl = env.decls.get(c)
                if decl is not None and decl.body is not None:
                    budget.tick()
                    t = apply(decl.body, args)
                    continue
                if c in env.rules:
                    r = rewrite_spine(
                        env, c, args, lambda u: whnf(env, u, metas), lambda a, b: conv(env, (), a, b, metas)
                    )
                    if r is not None:
                        budget.tick()
                        t = r
                        continue
        return t


def nf(env: Environment, t: Term, metas: Metas = None) -> Term:
    """Full normal form: whnf applied under binders and to every argument.

    Shared subterms are normalised once, and equal subterms of the result
    are the same object.  Memoising is sound because normal forms do not
    depend on the context.
    """
    return _nf(env, t, metas, {}, {})


def _nf(env: Environment, t: Term, metas: Metas, seen: dict, table: dict) -> Term:
    hit = seen.get(id(t))
    if hit is not None:
        return hit[1]
    w = whnf(env, t, metas)
    head, args = unapply(w)

    def go(u: Term) -> Term:
        return _nf(env, u, metas, seen, table)

    match head:
        case Lam(n, imp, b):
            head = Lam(n, imp, go(b))
        case Pi(n, imp, a, b):
            head = Pi(n, imp, go(a), go(b))
        case Sigma(n, a, b):
            head = Sigma(n, go(a), go(b))
        case Pair(a, b):
            head = Pair(go(a), go(b))
        case Proj1(p):
            head = Proj1(go(p))
        case Proj2(p):
            head = Proj2(go(p))
    result = _share(table, head)
    for a, imp in args:
        result = _share(table, App(result, go(a), imp))
    seen[id(t)] = (t, result)  # keeps t alive so its id is not reused
    return result


def _share(table: dict, t: Term) -> Term:
    """The canonical copy of ``t``, whose children are already canonical."""
    match t:
        case App(f, a, imp):
            key = ("app", id(f), id(a), imp)
        case Lam(_, imp, b):
            key = ("lam", imp, id(b))
        case Pi(_, imp, a, b):
            key = ("pi", imp, id(a), id(b))
        case Sigma(_, a, b):
            key = ("sigma", id(a), id(b))
        case Pair(a, b):
            key = ("pair", id(a), id(b))
        case Proj1(p) | Proj2(p):
            key = (type(t).__name__, id(p))
        case _:
            key = ("leaf", t)
    return table.setdefault(key, t)


# ---------------------------------------------------------------- conversion


def conv(env: Environment, ctx: Context, t: Term, u: Term, metas: Metas = None) -> bool:
    """Definitional equality up to beta, rules, and eta for Pi and Sigma."""
    if t == u:
        return True
    ht, at = unapply(t)
    hu, au = unapply(u)
    if isinstance(ht, Const) and ht == hu and len(at) == len(au) and at:
        if all(conv(env, ctx, a, b, metas) for (a, _), (b, _) in zip(at, au)):
            return True
    t2 = whnf(env, t, metas)
    u2 = whnf(env, u, metas)
    if t2 == u2:
        return True
    return _conv_whnf(env, t2, u2, metas)


def _conv_whnf(env: Environment, t: Term, u: Term, metas: Metas) -> bool:
    match t, u:
        case Sort(), Sort():
            return True
        case Pi(_, i1, a1, b1), Pi(_, i2, a2, b2):
            return i1 == i2 and conv(env, (), a1, a2, metas) and conv(env, (), b1, b2, metas)
        case Sigma(_, a1, b1), Sigma(_, a2, b2):
            return conv(env, (), a1, a2, metas) and conv(env, (), b1, b2, metas)
        case Lam(_, _, b1), Lam(_, _, b2):
            return conv(env, (), b1, b2, metas)
        case Lam(_, imp, b), _:
            return conv(env, (), b, App(shift(u, 1), Var(0), imp), metas)
        case _, Lam(_, imp, b):
            return conv(env, (), App(shift(t, 1), Var(0), imp), b, metas)
        case Pair(a1, b1), Pair(a2, b2):
            return conv(env, (), a1, a2, metas) and conv(env, (), b1, b2, metas)
        case Pair(a, b), _:
            return conv(env, (), a, Proj1(u), metas) and conv(env, (), b, Proj2(u), metas)
        case _, Pair(a, b):
            return conv(env, (), Proj1(t), a, metas) and conv(env, (), Proj2(t), b, metas)
    ht, at = unapply(t)
    hu, au = unapply(u)
    if len(at) != len(au):
        return False
    match ht, hu:
        case (Proj1(p), Proj1(q)) | (Proj2(p), Proj2(q)):
            if not conv(env, (), p, q, metas):
                return False
        case _:
            if ht != hu:
                return False
    return all(conv(env, (), a, b, metas) for (a, _), (b, _) in zip(at, au))


# ---------------------------------------------------------------- typing


def _mismatch(env: Environment, ctx: Context, expected: Term, actual: Term, what: str = "") -> TypeMismatch:
    names = [n for n, _ in ctx]
    e = show(nf(env, expected), names)
    a = show(nf(env, actual), names)
    prefix = f"{what}: " if what else ""
    return TypeMismatch(f"{prefix}expected type\n    {e}\nbut got\n    {a}", e, a)


def lookup_var(ctx: Context, i: int) -> Term:
    if i >= len(ctx):
        raise UnboundVariable(f"variable #{i} is not bound")
    return shift(ctx[len(ctx) - 1 - i][1], i + 1)


_shared: ContextVar[Optional[dict]] = ContextVar("shared_checking", default=None)


@contextmanager
def shared_checking() -> Iterator[None]:
    """Cache inference and checking results by node identity.

    Meant for terms with heavy sharing, such as normal forms.  A result is
    keyed on the term and on the context entries its free variables reach,
    which are the only ones its type can depend on.
    """
    token = _shared.set({})
    try:
        yield
    finally:
        _shared.reset(token)


def _reach(ctx: list, *terms: Term) -> list:
    k = max(loose_bound(t) for t in terms)
    return ctx[len(ctx) - k:] if k else []


def infer(env: Environment, ctx: Context, t: Term) -> Term:
    """The type of ``t`` in ``ctx`` (for terms without metavariables)."""
    ctx = list(ctx)
    cache = _shared.get()
    if cache is None:
        return _infer(env, ctx, t)
    reach = _reach(ctx, t)
    key = ("infer", id(t), *map(id, reach))
    hit = cache.get(key)
    if hit is None:
        hit = cache[key] = (t, reach, _infer(env, ctx, t))
    return hit[2]


def _infer(env: Environment, ctx: list, t: Term) -> Term:
    match t:
        case Var(i):
            return lookup_var(ctx, i)
        case Const(c):
            return env.type_of(c)
        case Sort():
            return SORT
        case Pi(n, _, a, b) | Sigma(n, a, b):
            check(env, ctx, a, SORT)
            check(env, ctx + [(n, a)], b, SORT)
            return SORT
        case App(Lam(n, limp, body), a, imp) if limp == imp:
            aty = infer(env, ctx, a)
            return instantiate(infer(env, ctx + [(n, aty)], body), a)
        case App():
            return _infer_spine(env, ctx, t)
        case Proj1(p):
            pt = whnf(env, infer(env, ctx, p))
            if not isinstance(pt, Sigma):
                raise NotAPair(f"fst of a term of type {show(pt, [n for n, _ in ctx])}")
            return pt.first
        case Proj2(p):
            pt = whnf(env, infer(env, ctx, p))
            if not isinstance(pt, Sigma):
                raise NotAPair(f"snd of a term of type {show(pt, [n for n, _ in ctx])}")
            return instantiate(pt.second, Proj1(p))
        case Pair(a, b):
            return Sigma("_", infer(env, ctx, a), shift(infer(env, ctx, b), 1))
        case Meta(m):
            raise CannotInfer(f"unsolved metavariable ?{m} in a kernel term")
    raise CannotInfer(f"cannot infer the type of {show(t, [n for n, _ in ctx])}")


def _infer_spine(env: Environment, ctx: list, t: Term) -> Term:
    """Type of an application spine, substituting the arguments into the
    function type in one pass instead of once per argument."""
    head, args = unapply(t)
    names = [n for n, _ in ctx]
    ty = whnf(env, infer(env, ctx, head))
    done: list[Term] = []
    for k, (a, imp) in enumerate(args):
        if not isinstance(ty, Pi):
            ty = whnf(env, subst_many(ty, done))
            done = []
            if not isinstance(ty, Pi):
                f = apply(head, args[:k])
                raise NotAFunction(f"{show(f, names)} is applied but has type {show(ty, names)}")
        if ty.implicit != imp:
            raise TypeMismatch(f"implicitness mismatch applying {show(apply(head, args[:k]), names)}")
        check(env, ctx, a, subst_many(ty.domain, done))
        done.append(a)
        ty = ty.codomain
    return subst_many(ty, done)


def check(env: Environment, ctx: Context, t: Term, expected: Term) -> None:
    ctx = list(ctx)
    cache = _shared.get()
    if cache is None:
        return _check(env, ctx, t, expected)
    reach = _reach(ctx, t, expected)
    key = ("check", id(t), id(expected), *map(id, reach))
    if key not in cache:
        _check(env, ctx, t, expected)
        cache[key] = (t, expected, reach)


def _check(env: Environment, ctx: list, t: Term, expected: Term) -> None:
    match t:
        case Lam(n, imp, body):
            ty = whnf(env, expected)
            if not isinstance(ty, Pi) or ty.implicit != imp:
                shown = show(nf(env, expected), [x for x, _ in ctx])
                kind = "an implicit" if imp else "a"
                raise TypeMismatch(f"{kind} lambda was checked against the non-matching type\n    {shown}", shown, "function")
            check(env, ctx + [(n, ty.domain)], body, ty.codomain)
            return
        case Pair(a, b):
            ty = whnf(env, expected)
            if not isinstance(ty, Sigma):
                raise NotAPair(f"pair checked against {show(ty, [n for n, _ in ctx])}")
            check(env, ctx, a, ty.first)
            check(env, ctx, b, instantiate(ty.second, a))
            return
    actual = infer(env, ctx, t)
    if not conv(env, ctx, actual, expected):
        raise _mismatch(env, ctx, expected, actual)


def eta_expand(env: Environment, ty: Term, t: Term) -> Term:
    """One layer of eta expansion at type ``ty`` (Pi or Sigma), else ``t``."""
    ty = whnf(env, ty)
    if isinstance(ty, Pi):
        return Lam(ty.name, ty.implicit, App(shift(t, 1), Var(0), ty.implicit))
    if isinstance(ty, Sigma):
        return Pair(Proj1(t), Proj2(t))
    return t
