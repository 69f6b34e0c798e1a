"""Checking declarations and files against a growing environment."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import kernel
from .elab import Ctx, ElabError, Elaborator, _surface_spine, coh_goal, solve_coh_with_depth
from .env import DEFAULT_FUEL, CheckError, Declaration, Environment, TypeMismatch, budget
from .pretty import show
from .rewrite import Clause as CoreClause
from .rewrite import RuleError, check_termination, compile_rule
from .syntax import (
    CohDecl,
    Decl,
    Def,
    Import,
    Instance,
    Mutual,
    ParseError,
    Postulate,
    RewritePragma,
    SApp,
    SHole,
    STerm,
    SVar,
    SourceFile,
    parse_file,
)
from .syntax import Clause as SClause
from .terms import SORT, App, Const, Lam, Pair, Pi, Proj1, Proj2, Sigma, Term, Var, apply, close_pi, instantiate, unapply

DEFAULT_COH_DEPTH = 32
_PV = "\x00pv"


class PatternError(CheckError):
    pass


class ImportError_(CheckError):
    pass


@dataclass
class DeclResult:
    name: str
    status: str  # "ok" or "failed"
    millis: float
    steps: int
    depth: Optional[int] = None
    message: str = ""
    file: str = ""

    def as_json(self) -> dict:
        return {"name": self.name, "status": self.status, "millis": self.millis, "steps": self.steps, "depth": self.depth}


def _where(pos) -> str:
    return f"{pos[0]}:{pos[1]}: " if pos else ""


# ---------------------------------------------------------------- types and bodies


def elab_type(env: Environment, s: STerm) -> Term:
    el = Elaborator(env)
    t = el.finish(el.check(Ctx(), s, SORT))
    kernel.check(env, [], t, SORT)
    return t


def elab_body(env: Environment, s: STerm, ty: Term) -> Term:
    el = Elaborator(env)
    t = el.finish(el.check(Ctx(), s, ty))
    kernel.check(env, [], t, ty)
    return t


# ---------------------------------------------------------------- clauses


def _abstract(t: Term, n: int, depth: int = 0) -> Term:
    """Replace pattern placeholders by variables of an ``n``-long context."""
    match t:
        case Const(c) if c.startswith(_PV):
            return Var(depth + n - 1 - int(c[len(_PV):]))
        case App(f, a, imp):
            return App(_abstract(f, n, depth), _abstract(a, n, depth), imp)
        case Lam(x, imp, b):
            return Lam(x, imp, _abstract(b, n, depth + 1))
        case Pi(x, imp, a, b):
            return Pi(x, imp, _abstract(a, n, depth), _abstract(b, n, depth + 1))
        case Sigma(x, a, b):
            return Sigma(x, _abstract(a, n, depth), _abstract(b, n, depth + 1))
        case Pair(a, b):
            return Pair(_abstract(a, n, depth), _abstract(b, n, depth))
        case Proj1(p):
            return Proj1(_abstract(p, n, depth))
        case Proj2(p):
            return Proj2(_abstract(p, n, depth))
    return t


class _Patterns:
    def __init__(self, env: Environment):
        self.env = env
        self.vars: list[tuple[str, Term]] = []

    def var(self, name: str, ty: Term) -> Term:
        if name != "_" and any(n == name for n, _ in self.vars):
            raise PatternError(f"pattern variable {name!r} is bound twice")
        self.vars.append((name, ty))
        return Const(f"{_PV}{len(self.vars) - 1}")

    def pattern(self, s: STerm, ty: Term) -> Term:
        head, args = _surface_spine(s)
        if isinstance(head, SHole) and not args:
            return self.var("_", ty)
        if not isinstance(head, SVar):
            raise PatternError(f"{_where(getattr(s, 'pos', None))}not a pattern")
        if head.name not in self.env:
            if args:
                raise PatternError(f"{_where(s.pos)}unknown constructor {head.name!r}")
            return self.var(head.name, ty)
        c = head.name
        t: Term = Const(c)
        cty = self.env.type_of(c)
        for arg, imp in args:
            pi = kernel.whnf(self.env, cty)
            if not isinstance(pi, Pi):
                raise PatternError(f"{_where(s.pos)}constructor {c} is applied to too many patterns")
            if pi.implicit or imp:
                raise PatternError(f"{_where(s.pos)}constructor patterns with implicit arguments are not supported ({c})")
            p = self.pattern(arg, pi.domain)
            t = App(t, p)
            cty = instantiate(pi.codomain, p)
        pi = kernel.whnf(self.env, cty)
        if isinstance(pi, Pi):
            raise PatternError(f"{_where(s.pos)}constructor {c} is not fully applied")
        if not kernel.conv(self.env, (), cty, ty):
            raise TypeMismatch(
                f"{_where(s.pos)}pattern {c} has type {show(cty)} but {show(ty)} was expected", show(ty), show(cty)
            )
        return t


def elab_clause(env: Environment, name: str, ty: Term, clause: SClause, index: int):
    """Elaborate one clause into (telescope, lhs, rhs), all over the pattern variables."""
    head, args = _surface_spine(clause.lhs)
    if head != SVar(name):
        raise PatternError(f"{_where(getattr(head, 'pos', None))}clause of {name} must start with {name}")
    pats = _Patterns(env)
    spine: list[tuple[Term, bool]] = []
    rest = ty
    queue = list(args)
    while queue:
        pi = kernel.whnf(env, rest)
        if not isinstance(pi, Pi):
            raise PatternError(f"{_where(getattr(clause.lhs, 'pos', None))}too many patterns in a clause of {name}")
        arg, imp = queue[0]
        if pi.implicit and not imp:
            p = pats.var("_", pi.domain)
        else:
            if pi.implicit != imp:
                raise PatternError(f"{_where(getattr(arg, 'pos', None))}unexpected implicit pattern in {name}")
            queue.pop(0)
            p = pats.pattern(arg, pi.domain)
        spine.append((p, pi.implicit))
        rest = instantiate(pi.codomain, p)
    n = len(pats.vars)
    tele = [(x, False, _abstract(t, i)) for i, (x, t) in enumerate(pats.vars)]
    ctx = Ctx()
    for x, _, t in tele:
        ctx = ctx.extend(x, t)
    el = Elaborator(env)
    rhs = el.finish(el.check(ctx, clause.rhs, _abstract(rest, n)))
    lhs = apply(Const(name), [(_abstract(p, n), imp) for p, imp in spine])
    rule = compile_rule(env, tele, lhs, rhs, "compiled-definition", f"{name}.{index}")
    core = CoreClause(name, tuple(_abstract(p, n) for p, _ in spine), rhs, n)
    return rule, core


# ---------------------------------------------------------------- declarations


@dataclass
class Checker:
    """Checks declarations one by one, committing each success."""

    env: Environment = field(default_factory=Environment)
    fuel: int = DEFAULT_FUEL
    coh_depth: int = DEFAULT_COH_DEPTH
    root: Optional[Path] = None
    loaded: dict[str, list[DeclResult]] = field(default_factory=dict)
    results: list[DeclResult] = field(default_factory=list)
    current_file: str = ""

    def _run(self, name: str, action) -> DeclResult:
        start = time.perf_counter()
        with budget(self.fuel) as b:
            try:
                depth = action()
                status, msg = "ok", ""
            except (CheckError, RecursionError) as e:
                depth, status = None, "failed"
                msg = str(e) if not isinstance(e, RecursionError) else "term too deep (recursion limit)"
        millis = round((time.perf_counter() - start) * 1000, 3)
        r = DeclResult(name, status, millis, b.steps, depth, msg, self.current_file)
        self.results.append(r)
        return r

    def declare(self, decl: Decl) -> list[DeclResult]:
        match decl:
            case Postulate(name, ty):
                def go():
                    self.env = self.env.with_postulate(name, elab_type(self.env, ty))
                return [self._run(name, go)]
            case Def(name, ty, body, ()) if body is not None:
                def go():
                    t = elab_type(self.env, ty)
                    self.env = self.env.with_declaration(Declaration(name, "definition", t, elab_body(self.env, body, t)))
                return [self._run(name, go)]
            case Def():
                return self._block([decl])
            case Mutual(decls):
                return self._block(list(decls))
            case RewritePragma(name):
                return [self._run(f"rewrite {name}", lambda: self._rewrite(name))]
            case Instance(name):
                return [self._run(f"instance {name}", lambda: self._instance(name))]
            case CohDecl(name, ty):
                return [self._run(name, lambda: self._coh(name, ty))]
            case Import(module):
                return self.import_module(module, decl.pos)
        raise CheckError(f"unknown declaration {decl!r}")

    def _rewrite(self, name: str) -> None:
        d = self.env.lookup(name)
        if d.kind != "postulate":
            raise RuleError(f"rewrite {name}: only postulated equations can become rewrite rules")
        tele = []
        ty = d.type
        while isinstance(ty, Pi):
            tele.append((ty.name, ty.implicit, ty.domain))
            ty = ty.codomain
        head, args = unapply(ty)
        if head != Const("Id") or len(args) != 3:
            raise RuleError(f"rewrite {name}: the type must end in an equation lhs == rhs, got {show(ty)}")
        rule = compile_rule(self.env, tele, args[1][0], args[2][0], "user-pragma", name)
        self.env = self.env.with_rule(rule)

    def _instance(self, name: str) -> None:
        goal = coh_goal(self.env, self.env.type_of(name))
        head, args = unapply(goal.conclusion)
        if head != Const("Coh") or len(args) != 1:
            raise ElabError(f"instance {name} must have a type ending in Coh X")
        self.env = self.env.with_instance(name)

    def _coh(self, name: str, ty: STerm) -> int:
        t = elab_type(self.env, ty)
        goal = coh_goal(self.env, t)
        witness, depth = solve_coh_with_depth(self.env, goal, self.coh_depth)
        body = witness
        for x, imp, _ in reversed(goal.telescope):
            body = Lam(x, imp, body)
        kernel.check(self.env, [], body, t)
        self.env = self.env.with_declaration(Declaration(name, "definition", t, body))
        return depth

    def _block(self, decls: list[Decl]) -> list[DeclResult]:
        """Signatures first, then clauses, then one termination check."""
        saved = self.env
        out: list[DeclResult] = []
        types: dict[str, Term] = {}
        for d in decls:
            match d:
                case Def(name, ty, body, clauses) if clauses or body is None:
                    def sig(name=name, ty=ty):
                        t = elab_type(self.env, ty)
                        types[name] = t
                        self.env = self.env.with_declaration(Declaration(name, "definition", t))
                    out.append(self._run(name, sig))
                case _:
                    out.extend(self.declare(d))
        core: list[CoreClause] = []
        by_name = {r.name: r for r in out}
        for d in decls:
            if not (isinstance(d, Def) and d.name in types):
                continue

            def clauses(d=d):
                for i, c in enumerate(d.clauses):
                    rule, cc = elab_clause(self.env, d.name, types[d.name], c, i)
                    self.env = self.env.with_rule(rule)
                    core.append(cc)
            r = self._run(d.name, clauses)
            self.results.pop()
            _merge(by_name[d.name], r)
        failed = [r for r in out if r.status != "ok"]
        if not failed:
            r = self._run("<termination>", lambda: check_termination(core) and None)
            self.results.pop()
            if r.status != "ok":
                for x in out:
                    if x.name in types:
                        _merge(x, r)
                failed = [r]
        if failed:
            self.env = saved
            for x in out:
                if x.status == "ok" and x.name in types:
                    x.status = "failed"
                    x.message = x.message or f"mutual block failed: {failed[0].message}"
        return out

    # ------------------------------------------------------------ files

    def check_source(self, src: SourceFile) -> list[DeclResult]:
        prev = self.current_file
        self.current_file = src.path
        out = []
        try:
            for d in src.decls:
                out.extend(self.declare(d))
        finally:
            self.current_file = prev
        return out

    def check_file(self, path: Path) -> list[DeclResult]:
        path = Path(path)
        key = str(path.resolve())
        if key in self.loaded:
            return []
        text = path.read_text(encoding="utf-8")
        src = parse_file(text, str(path))
        self.loaded[key] = []
        if self.root is None:
            self.root = path.parent
        res = self.check_source(src)
        self.loaded[key] = res
        return res

    def import_module(self, module: str, pos=None) -> list[DeclResult]:
        root = self.root or Path(".")
        path = root / (module.replace(".", "/") + ".hit")
        if not path.exists():
            raise ImportError_(f"{_where(pos)}cannot find module {module!r} at {path}")
        self.check_file(path)
        return []


def _merge(into: DeclResult, extra: DeclResult) -> None:
    into.millis = round(into.millis + extra.millis, 3)
    into.steps += extra.steps
    if extra.status != "ok" and into.status == "ok":
        into.status = "failed"
        into.message = extra.message


__all__ = ["Checker", "DeclResult", "ParseError", "elab_clause", "elab_type", "elab_body"]
