"""Elaboration of surface terms: implicit arguments, metavariables, coherence search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from . import kernel
from .env import CheckError, Environment, NotAFunction, NotAPair, UnboundVariable, UnknownConstant
from .pretty import show
from .syntax import SApp, SEq, SFst, SHole, SLam, SPair, SPi, SSigma, SSnd, SType, SVar, STerm
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
    close_lam,
    close_pi,
    free_vars,
    instantiate,
    metas_of,
    shift,
    unapply,
)

COH = "Coh"


class ElabError(CheckError):
    pass


class UnsolvedMeta(ElabError):
    pass


class UnificationFailure(ElabError):
    pass


class OccursCheck(UnificationFailure):
    pass


class DepthExhausted(ElabError):
    pass


class NoSolution(ElabError):
    pass


def _where(pos) -> str:
    return f"{pos[0]}:{pos[1]}: " if pos else ""


@dataclass
class MetaEntry:
    ctx_len: int
    type: Term  # closed: Pi over the creation context
    pos: Optional[tuple[int, int]] = None


@dataclass
class MetaStore:
    """Metavariables of one elaboration session."""

    entries: dict[int, MetaEntry] = field(default_factory=dict)
    solutions: dict[int, Term] = field(default_factory=dict)
    counter: Iterator[int] = field(default_factory=itertools.count)

    def new(self, entry: MetaEntry) -> int:
        m = next(self.counter)
        self.entries[m] = entry
        return m

    def solve(self, m: int, value: Term) -> None:
        if m in self.solutions:
            raise ElabError(f"metavariable ?{m} is already solved")
        self.solutions[m] = value

    def snapshot(self) -> dict[int, Term]:
        return dict(self.solutions)

    def restore(self, snap: dict[int, Term]) -> None:
        self.solutions = dict(snap)


@dataclass
class Ctx:
    """Elaboration context; ``None`` names cannot be referred to."""

    names: tuple[Optional[str], ...] = ()
    types: tuple[Term, ...] = ()

    def extend(self, name: Optional[str], ty: Term) -> "Ctx":
        if name == "_":
            name = None
        return Ctx(self.names + (name,), self.types + (ty,))

    def __len__(self) -> int:
        return len(self.names)

    def lookup(self, name: str) -> Optional[tuple[int, Term]]:
        for pos in range(len(self.names) - 1, -1, -1):
            if self.names[pos] == name:
                i = len(self.names) - 1 - pos
                return i, shift(self.types[pos], i + 1)
        return None

    def display(self) -> list[str]:
        return [n if n is not None else "_" for n in self.names]

    def kernel(self) -> list[tuple[str, Term]]:
        return list(zip(self.display(), self.types))


@dataclass(frozen=True)
class CohGoal:
    telescope: tuple[tuple[str, bool, Term], ...]
    conclusion: Term  # ``Coh X`` in the telescope's context


def _postponable(s: STerm) -> bool:
    return isinstance(s, (SLam, SPair))


def _surface_spine(s: STerm) -> tuple[STerm, list[tuple[STerm, bool]]]:
    args = []
    while isinstance(s, SApp):
        args.append((s.arg, s.implicit))
        s = s.fn
    args.reverse()
    return s, args


class Elaborator:
    def __init__(self, env: Environment, metas: Optional[MetaStore] = None):
        self.env = env
        self.metas = metas or MetaStore()
        self.postponed: list[tuple[Ctx, Term, Term]] = []

    # ------------------------------------------------------------ metas

    def fresh(self, ctx: Ctx, ty: Term, pos=None) -> Term:
        tele = [(n or "_", False, t) for n, t in zip(ctx.names, ctx.types)]
        m = self.metas.new(MetaEntry(len(ctx), close_pi(tele, ty), pos))
        return apply(Meta(m), [(Var(i), False) for i in range(len(ctx) - 1, -1, -1)])

    def refine_sigma(self, ctx: Ctx, ty: Term, pos=None) -> Term:
        """Solve a flexible type with a Sigma of fresh metas, in the scope of its head."""
        head, args = unapply(ty)
        k = len(ctx)
        entry = self.metas.entries[head.id]
        if [a for a, _ in args] == [Var(k - 1 - j) for j in range(entry.ctx_len)]:
            k = entry.ctx_len
        outer = Ctx(ctx.names[:k], ctx.types[:k])
        first = self.fresh(outer, SORT, pos)
        second = self.fresh(outer.extend("_", first), SORT, pos)
        sigma = shift(Sigma("_", first, second), len(ctx) - k)
        self.unify(ctx, ty, sigma)
        return sigma

    def force(self, t: Term) -> Term:
        return kernel.whnf(self.env, t, self.metas.solutions)

    def force_metas(self, t: Term) -> Term:
        """Unfold solved metavariables at the head, and nothing else."""
        sol = self.metas.solutions
        head, args = unapply(t)
        while isinstance(head, Meta) and head.id in sol:
            t = apply(sol[head.id], args)
            head, args = unapply(t)
            while isinstance(head, Lam) and args:
                t = apply(instantiate(head.body, args[0][0]), args[1:])
                head, args = unapply(t)
        return t

    def zonk(self, t: Term) -> Term:
        sol = self.metas.solutions
        if not sol:
            return t
        head, args = unapply(t)
        if isinstance(head, Meta) and head.id in sol:
            t = apply(sol[head.id], args)
            head, args = unapply(t)
            while isinstance(head, Lam) and args:
                t = apply(instantiate(head.body, args[0][0]), args[1:])
                head, args = unapply(t)
            return self.zonk(t)
        if not args:
            match t:
                case Lam(n, imp, b):
                    return Lam(n, imp, self.zonk(b))
                case Pi(n, imp, a, b):
                    return Pi(n, imp, self.zonk(a), self.zonk(b))
                case Sigma(n, a, b):
                    return Sigma(n, self.zonk(a), self.zonk(b))
                case Pair(a, b):
                    return Pair(self.zonk(a), self.zonk(b))
                case Proj1(p):
                    return Proj1(self.zonk(p))
                case Proj2(p):
                    return Proj2(self.zonk(p))
            return t
        return apply(self.zonk(head), [(self.zonk(a), i) for a, i in args])

    def finish(self, t: Term) -> Term:
        """Zonk and insist that no metavariable is left."""
        self.retry_postponed()
        t = self.zonk(t)
        left = metas_of(t)
        if left:
            m = min(left)
            pos = self.metas.entries[m].pos if m in self.metas.entries else None
            raise UnsolvedMeta(f"{_where(pos)}could not infer the value of ?{m}")
        return t

    # ------------------------------------------------------------ unification

    def fail(self, ctx: Ctx, t: Term, u: Term, why: str = "") -> UnificationFailure:
        names = ctx.display()
        a = show(self.zonk(t), names)
        b = show(self.zonk(u), names)
        return UnificationFailure(f"cannot unify\n    {a}\nwith\n    {b}" + (f"\n({why})" if why else ""))

    def unify(self, ctx: Ctx, t: Term, u: Term) -> None:
        if t == u:
            return
        ht, at = unapply(t)
        hu, au = unapply(u)
        if isinstance(ht, Const) and ht == hu and len(at) == len(au) and at:
            snap = self.metas.snapshot()
            npost = len(self.postponed)
            try:
                for (a, _), (b, _) in zip(at, au):
                    self.unify(ctx, a, b)
                return
            except UnificationFailure:
                self.metas.restore(snap)
                del self.postponed[npost:]
        t = self.force_metas(t)
        u = self.force_metas(u)
        ht, at = unapply(t)
        hu, au = unapply(u)
        if isinstance(ht, Meta) and not (isinstance(hu, Meta) and ht == hu):
            self.solve_flex(ctx, ht.id, at, u)
            return
        if isinstance(hu, Meta) and not isinstance(ht, Meta):
            self.solve_flex(ctx, hu.id, au, t)
            return
        t = self.force(t)
        u = self.force(u)
        if t == u:
            return
        ht, at = unapply(t)
        hu, au = unapply(u)
        if isinstance(ht, Meta):
            if isinstance(hu, Meta) and ht == hu and len(at) == len(au):
                for (a, _), (b, _) in zip(at, au):
                    self.unify(ctx, a, b)
                return
            self.solve_flex(ctx, ht.id, at, u)
            return
        if isinstance(hu, Meta):
            self.solve_flex(ctx, hu.id, au, t)
            return
        match t, u:
            case Sort(), Sort():
                return
            case Pi(n, i1, a1, b1), Pi(_, i2, a2, b2):
                if i1 != i2:
                    raise self.fail(ctx, t, u, "implicitness differs")
                self.unify(ctx, a1, a2)
                self.unify(ctx.extend(n, a1), b1, b2)
                return
            case Sigma(n, a1, b1), Sigma(_, a2, b2):
                self.unify(ctx, a1, a2)
                self.unify(ctx.extend(n, a1), b1, b2)
                return
            case Lam(n, _, b1), Lam(_, _, b2):
                self.unify(ctx.extend(n, SORT), b1, b2)
                return
            case Lam(n, imp, b), _:
                self.unify(ctx.extend(n, SORT), b, App(shift(u, 1), Var(0), imp))
                return
            case _, Lam(n, imp, b):
                self.unify(ctx.extend(n, SORT), App(shift(t, 1), Var(0), imp), b)
                return
            case Pair(a1, b1), Pair(a2, b2):
                self.unify(ctx, a1, a2)
                self.unify(ctx, b1, b2)
                return
            case Pair(a, b), _:
                self.unify(ctx, a, Proj1(u))
                self.unify(ctx, b, Proj2(u))
                return
            case _, Pair(a, b):
                self.unify(ctx, Proj1(t), a)
                self.unify(ctx, Proj2(t), b)
                return
        if len(at) != len(au):
            raise self.fail(ctx, t, u)
        match ht, hu:
            case (Proj1(p), Proj1(q)) | (Proj2(p), Proj2(q)):
                self.unify(ctx, p, q)
            case _:
                if ht != hu:
                    raise self.fail(ctx, t, u)
        for (a, _), (b, _) in zip(at, au):
            self.unify(ctx, a, b)

    def solve_flex(self, ctx: Ctx, m: int, spine: Sequence[tuple[Term, bool]], rhs: Term) -> None:
        """Solve ``?m spine =?= rhs`` when the spine is a Miller pattern."""
        vars_: list[int] = []
        for a, _ in spine:
            a = self.force(a)
            if not isinstance(a, Var) or a.index in vars_:
                self.postponed.append((ctx, apply(Meta(m), spine), rhs))
                return
            vars_.append(a.index)
        rhs = self.zonk(rhs)
        if m in metas_of(rhs):
            raise OccursCheck(f"?{m} occurs in its own solution {show(rhs, ctx.display())}")
        k = len(vars_)
        ren = {v: k - 1 - j for j, v in enumerate(vars_)}
        body = self._rename(ctx, rhs, ren, 0)
        names = []
        for v in vars_:
            n = ctx.names[len(ctx) - 1 - v] if v < len(ctx) else None
            names.append((n or "x", False))
        self.metas.solve(m, close_lam(names, body))

    def _rename(self, ctx: Ctx, t: Term, ren: dict[int, int], depth: int) -> Term:
        match t:
            case Var(i):
                if i < depth:
                    return t
                if i - depth in ren:
                    return Var(ren[i - depth] + depth)
                raise UnificationFailure(
                    f"variable {self._var_name(ctx, i - depth)} escapes the scope of a metavariable"
                )
            case App(f, a, imp):
                return App(self._rename(ctx, f, ren, depth), self._rename(ctx, a, ren, depth), imp)
            case Lam(n, imp, b):
                return Lam(n, imp, self._rename(ctx, b, ren, depth + 1))
            case Pi(n, imp, a, b):
                return Pi(n, imp, self._rename(ctx, a, ren, depth), self._rename(ctx, b, ren, depth + 1))
            case Sigma(n, a, b):
                return Sigma(n, self._rename(ctx, a, ren, depth), self._rename(ctx, b, ren, depth + 1))
            case Pair(a, b):
                return Pair(self._rename(ctx, a, ren, depth), self._rename(ctx, b, ren, depth))
            case Proj1(p):
                return Proj1(self._rename(ctx, p, ren, depth))
            case Proj2(p):
                return Proj2(self._rename(ctx, p, ren, depth))
        return t

    @staticmethod
    def _var_name(ctx: Ctx, i: int) -> str:
        if i < len(ctx):
            return ctx.names[len(ctx) - 1 - i] or f"#{i}"
        return f"#{i}"

    def retry_postponed(self) -> None:
        """Give every postponed constraint exactly one more chance."""
        pending, self.postponed = self.postponed, []
        for ctx, t, u in pending:
            t, u = self.zonk(t), self.zonk(u)
            if kernel.conv(self.env, (), t, u, self.metas.solutions):
                continue
            before = len(self.postponed)
            self.unify(ctx, t, u)
            if len(self.postponed) > before:
                del self.postponed[before:]
                raise self.fail(ctx, t, u, "not a pattern unification problem")

    # ------------------------------------------------------------ elaboration

    def insert(self, ctx: Ctx, t: Term, ty: Term, pos=None) -> tuple[Term, Term]:
        while True:
            f = self.force(ty)
            if not (isinstance(f, Pi) and f.implicit):
                return t, ty
            m = self.fresh(ctx, f.domain, pos)
            t = App(t, m, True)
            ty = instantiate(f.codomain, m)

    def infer(self, ctx: Ctx, s: STerm) -> tuple[Term, Term]:
        match s:
            case SVar(name):
                found = ctx.lookup(name)
                if found is not None:
                    i, ty = found
                    return Var(i), ty
                if name in self.env:
                    return Const(name), self.env.type_of(name)
                if any(n == name for n in ctx.names):
                    raise UnboundVariable(f"{_where(s.pos)}variable {name!r} is not in scope")
                raise UnknownConstant(f"{_where(s.pos)}unknown name {name!r}")
            case SType():
                return SORT, SORT
            case SHole():
                ty = self.fresh(ctx, SORT, s.pos)
                return self.fresh(ctx, ty, s.pos), ty
            case SApp():
                return self.spine(ctx, s, None)
            case SLam(name, imp, body):
                dom = self.fresh(ctx, SORT, s.pos)
                inner = ctx.extend(name, dom)
                b, bty = self.infer(inner, body)
                b, bty = self.insert(inner, b, bty, s.pos)
                return Lam(name, imp, b), Pi(name, imp, dom, bty)
            case SPi(name, imp, dom, cod):
                a = self.check(ctx, dom, SORT)
                b = self.check(ctx.extend(name, a), cod, SORT)
                return Pi(name or "_", imp, a, b), SORT
            case SSigma(name, first, second):
                a = self.check(ctx, first, SORT)
                b = self.check(ctx.extend(name, a), second, SORT)
                return Sigma(name or "_", a, b), SORT
            case SPair(first, second):
                a, aty = self.insert(ctx, *self.infer(ctx, first), s.pos)
                b, bty = self.insert(ctx, *self.infer(ctx, second), s.pos)
                return Pair(a, b), Sigma("_", aty, shift(bty, 1))
            case SFst(p) | SSnd(p):
                t, ty = self.insert(ctx, *self.infer(ctx, p), s.pos)
                ty = self.force(ty)
                if isinstance(unapply(ty)[0], Meta):
                    ty = self.refine_sigma(ctx, ty, s.pos)
                if not isinstance(ty, Sigma):
                    raise NotAPair(f"{_where(s.pos)}projection from a term of type {show(ty, ctx.display())}")
                if isinstance(s, SFst):
                    return Proj1(t), ty.first
                return Proj2(t), instantiate(ty.second, Proj1(t))
            case SEq(lhs, rhs):
                a, aty = self.insert(ctx, *self.infer(ctx, lhs), s.pos)
                b = self.check(ctx, rhs, aty)
                return apply(Const("Id"), [(aty, True), (a, False), (b, False)]), SORT
        raise ElabError(f"cannot elaborate {s!r}")

    def spine(self, ctx: Ctx, s: STerm, expected: Optional[Term]) -> tuple[Term, Term]:
        head_s, args = _surface_spine(s)
        f, fty = self.infer(ctx, head_s)
        later = []
        for arg, imp in args:
            if not imp:
                f, fty = self.insert(ctx, f, fty, s.pos)
            pi = self.force(fty)
            if not isinstance(pi, Pi):
                if isinstance(unapply(pi)[0], Meta):
                    dom = self.fresh(ctx, SORT, s.pos)
                    cod = self.fresh(ctx.extend("x", dom), SORT, s.pos)
                    pi = Pi("x", imp, dom, cod)
                    self.unify(ctx, fty, pi)
                else:
                    raise NotAFunction(
                        f"{_where(s.pos)}{show(self.zonk(f), ctx.display())} is applied to too many arguments; "
                        f"its type is {show(self.zonk(pi), ctx.display())}"
                    )
            if pi.implicit != imp:
                raise ElabError(f"{_where(s.pos)}unexpected implicit argument")
            if _postponable(arg) and metas_of(self.zonk(pi.domain)):
                a = self.fresh(ctx, pi.domain, arg.pos)
                later.append((arg, a, pi.domain))
            else:
                a = self.check(ctx, arg, pi.domain)
            f = App(f, a, imp)
            fty = instantiate(pi.codomain, a)
        if expected is not None:
            exp = self.force(expected)
            if not (isinstance(exp, Pi) and exp.implicit):
                f, fty = self.insert(ctx, f, fty, s.pos)
            self.unify_types(ctx, fty, expected, s)
        for arg, a, dom in later:
            value = self.check(ctx, arg, dom)
            self.unify(ctx, a, value)
        return f, fty

    def unify_types(self, ctx: Ctx, actual: Term, expected: Term, s: STerm) -> None:
        try:
            self.unify(ctx, actual, expected)
        except UnificationFailure as e:
            names = ctx.display()
            got = show(kernel.nf(self.env, self.zonk(actual), self.metas.solutions), names)
            want = show(kernel.nf(self.env, self.zonk(expected), self.metas.solutions), names)
            raise UnificationFailure(
                f"{_where(getattr(s, 'pos', None))}type mismatch\n  expected: {want}\n  actual:   {got}\n{e}"
            ) from None

    def check(self, ctx: Ctx, s: STerm, expected: Term) -> Term:
        exp = self.force(expected)
        match s:
            case SLam(name, imp, body) if isinstance(exp, Pi) and exp.implicit == imp:
                return Lam(name, imp, self.check(ctx.extend(name, exp.domain), body, exp.codomain))
            case SHole():
                return self.fresh(ctx, expected, s.pos)
        if isinstance(exp, Pi) and exp.implicit:
            inner = ctx.extend(None, exp.domain)
            return Lam(exp.name, True, self.check(inner, s, exp.codomain))
        match s:
            case SLam(name, imp, body) if isinstance(unapply(exp)[0], Meta):
                dom = self.fresh(ctx, SORT, s.pos)
                cod = self.fresh(ctx.extend(name, dom), SORT, s.pos)
                self.unify(ctx, exp, Pi(name, imp, dom, cod))
                return Lam(name, imp, self.check(ctx.extend(name, dom), body, cod))
            case SPair(first, second) if isinstance(exp, Sigma):
                a = self.check(ctx, first, exp.first)
                return Pair(a, self.check(ctx, second, instantiate(exp.second, a)))
            case SApp():
                f, _ = self.spine(ctx, s, expected)
                return f
        t, ty = self.infer(ctx, s)
        t, ty = self.insert(ctx, t, ty, getattr(s, "pos", None))
        self.unify_types(ctx, ty, expected, s)
        return t

    # ------------------------------------------------------------ coherence search

    def instance_parts(self, ctx: Ctx, name: str) -> tuple[Term, list[tuple[Term, Term]], Term]:
        """Instantiate an instance: implicit binders become metas, explicit ones premises."""
        t: Term = Const(name)
        ty = self.env.type_of(name)
        premises = []
        while True:
            f = self.force(ty)
            if not isinstance(f, Pi):
                return t, premises, f
            m = self.fresh(ctx, f.domain)
            if not f.implicit:
                premises.append((m, f.domain))
            t = App(t, m, f.implicit)
            ty = instantiate(f.codomain, m)

    def search(self, ctx: Ctx, goal: Term, limit: int, cut: list[bool]) -> Iterator[tuple[Term, int]]:
        """Depth-first search over instances in registration order."""
        if limit <= 0:
            cut[0] = True
            return
        for name in self.env.instances:
            snap = self.metas.snapshot()
            try:
                term, premises, concl = self.instance_parts(ctx, name)
                self.unify(ctx, concl, goal)
            except CheckError:
                self.metas.restore(snap)
                continue
            for sol, depth in self._premises(ctx, term, premises, 0, limit, cut):
                yield sol, depth
            self.metas.restore(snap)

    def _premises(self, ctx, term, premises, i, limit, cut) -> Iterator[tuple[Term, int]]:
        if i == len(premises):
            yield term, 1
            return
        placeholder, ty = premises[i]
        for sub, d in self.search(ctx, self.zonk(ty), limit - 1, cut):
            snap = self.metas.snapshot()
            try:
                self.unify(ctx, placeholder, sub)
            except CheckError:
                self.metas.restore(snap)
                continue
            for sol, d2 in self._premises(ctx, term, premises, i + 1, limit, cut):
                yield sol, max(d + 1, d2)
            self.metas.restore(snap)


def solve_coh_with_depth(env: Environment, goal: CohGoal, depth_limit: int = 32) -> tuple[Term, int]:
    el = Elaborator(env)
    ctx = Ctx()
    for n, _, ty in goal.telescope:
        ctx = ctx.extend(n, ty)
    head, args = unapply(kernel.whnf(env, goal.conclusion))
    if head != Const(COH) or len(args) != 1:
        raise ElabError(f"coherence goal must have the form Coh X, got {show(goal.conclusion, ctx.display())}")
    if not env.instances:
        raise NoSolution("no instances are registered")
    cut = [False]
    for term, depth in el.search(ctx, goal.conclusion, depth_limit, cut):
        try:
            result = el.finish(term)
        except CheckError:
            continue
        kernel.check(env, ctx.kernel(), result, goal.conclusion)
        return result, depth
    if cut[0]:
        raise DepthExhausted(f"no coherence witness within depth {depth_limit}")
    raise NoSolution(f"no instance applies to {show(goal.conclusion, ctx.display())}")


def solve_coh(env: Environment, goal: CohGoal, depth_limit: int = 32) -> Term:
    return solve_coh_with_depth(env, goal, depth_limit)[0]


def coh_goal(env: Environment, ty: Term) -> CohGoal:
    """Split a declared type ``tele -> Coh X`` into a goal."""
    tele = []
    while True:
        f = kernel.whnf(env, ty)
        if isinstance(f, Pi):
            tele.append((f.name, f.implicit, f.domain))
            ty = f.codomain
            continue
        return CohGoal(tuple(tele), f)


def elaborate(env: Environment, ctx: Ctx, s: STerm, expected: Optional[Term] = None) -> Term:
    """Elaborate ``s`` into a metavariable-free core term."""
    el = Elaborator(env)
    if expected is None:
        t, _ = el.infer(ctx, s)
    else:
        t = el.check(ctx, s, expected)
    return el.finish(t)


def unify(env: Environment, metas: MetaStore, t: Term, u: Term, ctx: Optional[Ctx] = None) -> None:
    el = Elaborator(env, metas)
    el.unify(ctx or Ctx(), t, u)
    el.retry_postponed()
