"""First-order linear rewrite rules and structural termination checking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence, Union

from .env import CheckError, Environment
from .terms import App, Const, Term, Var, apply, free_vars, subst_many, subterms, shift, unapply


class RuleError(CheckError):
    pass


class NonlinearPattern(RuleError):
    pass


class HigherOrderPattern(RuleError):
    pass


class IllTypedRule(RuleError):
    pass


class HeadNotDeclared(RuleError):
    pass


class UnboundRuleVariable(RuleError):
    pass


class TerminationRejected(CheckError):
    pass


@dataclass(frozen=True)
class PVar:
    """A rule variable; ``id is None`` marks a wildcard (an implicit position)."""

    id: Optional[int]


@dataclass(frozen=True)
class PRigid:
    head: str
    args: tuple[tuple["Pattern", bool], ...]


@dataclass(frozen=True)
class PClosed:
    term: Term


Pattern = Union[PVar, PRigid, PClosed]


@dataclass(frozen=True)
class RewriteRule:
    head: str
    patterns: tuple[tuple[Pattern, bool], ...]
    replacement: Term
    arity: int  # number of rule variables the replacement is scoped over
    origin: Literal["user-pragma", "compiled-definition"] = "user-pragma"
    name: str = ""

    def __str__(self) -> str:
        from .pretty import show

        names = [f"?{i}" for i in range(self.arity)]
        lhs = " ".join([self.head] + [_show_pattern(p, i, names) for p, i in self.patterns])
        return f"{lhs} ~> {show(self.replacement, names)}"


def _show_pattern(p: Pattern, implicit: bool, names: list[str]) -> str:
    from .pretty import show

    match p:
        case PVar(None):
            s = "_"
        case PVar(i):
            s = names[i]
        case PClosed(t):
            s = "(" + show(t) + ")"
        case PRigid(h, args):
            s = h if not args else "(" + " ".join([h] + [_show_pattern(a, j, names) for a, j in args]) + ")"
    return "{" + s + "}" if implicit else s


def pattern_vars(p: Pattern) -> list[int]:
    match p:
        case PVar(None) | PClosed():
            return []
        case PVar(i):
            return [i]
        case PRigid(_, args):
            return [v for a, _ in args for v in pattern_vars(a)]
    return []


# ---------------------------------------------------------------- compiling


def _var_id(index: int, arity: int) -> int:
    return arity - 1 - index


def to_patterns(env: Environment, lhs: Term, arity: int) -> tuple[str, tuple[tuple[Pattern, bool], ...]]:
    """Turn a left-hand side over ``arity`` rule variables into a pattern spine.

    Implicit argument positions are not matched: they become wildcards,
    or bind a rule variable that occurs nowhere explicit.  Explicit
    positions must be linear.
    """
    head, args = unapply(lhs)
    if isinstance(head, Var):
        raise HigherOrderPattern("the head of a rewrite rule cannot be a rule variable")
    if not isinstance(head, Const):
        raise RuleError("the left-hand side of a rule must be a constant applied to arguments")
    if head.name not in env:
        raise HeadNotDeclared(f"rule head {head.name!r} is not declared")

    explicit_count: dict[int, int] = {}

    def count(t: Term, in_implicit: bool) -> None:
        if in_implicit:
            return
        h, sp = unapply(t)
        if isinstance(h, Var):
            if sp:
                raise HigherOrderPattern("rule variable applied to arguments in a pattern")
            explicit_count[h.index] = explicit_count.get(h.index, 0) + 1
            return
        for a, imp in sp:
            count(a, imp)

    for a, imp in args:
        count(a, imp)
    dup = [i for i, n in explicit_count.items() if n > 1]
    if dup:
        raise NonlinearPattern(f"rule variable #{dup[0]} occurs more than once in {head.name}")

    bound: set[int] = set(explicit_count)

    def convert(t: Term, in_implicit: bool) -> Pattern:
        if in_implicit:
            if isinstance(t, Var) and t.index not in bound:
                bound.add(t.index)
                return PVar(_var_id(t.index, arity))
            return PVar(None)
        h, sp = unapply(t)
        if isinstance(h, Var):
            return PVar(_var_id(h.index, arity))
        if isinstance(h, Const) and env.lookup(h.name).body is None:
            return PRigid(h.name, tuple((convert(a, imp), imp) for a, imp in sp))
        if not free_vars(t):
            return PClosed(t)
        raise HigherOrderPattern("only constructors applied to patterns may appear in rigid positions")

    pats = tuple((convert(a, imp), imp) for a, imp in args)
    return head.name, pats


def compile_rule(
    env: Environment,
    telescope: Sequence[tuple[str, bool, Term]],
    lhs: Term,
    rhs: Term,
    origin: Literal["user-pragma", "compiled-definition"] = "user-pragma",
    name: str = "",
    check_types: bool = True,
) -> RewriteRule:
    """Validate ``lhs ~> rhs`` where both live in the context ``telescope``."""
    arity = len(telescope)
    head, pats = to_patterns(env, lhs, arity)
    bound = {v for p, _ in pats for v in pattern_vars(p)}
    for i in free_vars(rhs):
        if _var_id(i, arity) not in bound:
            raise UnboundRuleVariable(
                f"rule variable {telescope[_var_id(i, arity)][0]!r} of the right-hand side is not bound by the pattern"
            )
    if check_types:
        from . import kernel

        ctx = []
        for n, _, ty in telescope:
            ctx.append((n, ty))
        try:
            lt = kernel.infer(env, ctx, lhs)
            kernel.check(env, ctx, rhs, lt)
        except CheckError as e:
            raise IllTypedRule(f"rule for {head} does not preserve types: {e}") from e
    return RewriteRule(head, pats, rhs, arity, origin, name)


# ---------------------------------------------------------------- matching

Whnf = Callable[[Term], Term]
Conv = Callable[[Term, Term], bool]


def _match(p: Pattern, t: Term, sigma: dict[int, Term], whnf: Whnf, conv: Conv) -> bool:
    match p:
        case PVar(None):
            return True
        case PVar(i):
            sigma[i] = t
            return True
        case PClosed(c):
            return conv(c, t)
        case PRigid(h, args):
            head, sp = unapply(t)
            if not (head == Const(h) and len(sp) == len(args)):
                t = whnf(t)
                head, sp = unapply(t)
                if not (head == Const(h) and len(sp) == len(args)):
                    return False
            return all(_match(q, a, sigma, whnf, conv) for (q, _), (a, _) in zip(args, sp))
    return False


def match(rule: RewriteRule, spine: Sequence[tuple[Term, bool]], whnf: Whnf, conv: Conv) -> Optional[dict[int, Term]]:
    """Match ``rule``'s pattern spine against the first arguments of ``spine``."""
    if len(spine) < len(rule.patterns):
        return None
    sigma: dict[int, Term] = {}
    for (p, _), (t, _) in zip(rule.patterns, spine):
        if not _match(p, t, sigma, whnf, conv):
            return None
    return sigma


def instantiate_rule(rule: RewriteRule, sigma: dict[int, Term]) -> Term:
    from .terms import SORT

    values = [sigma.get(i, SORT) for i in range(rule.arity)]
    return subst_many(rule.replacement, values)


def rewrite_spine(
    env: Environment, name: str, spine: Sequence[tuple[Term, bool]], whnf: Whnf, conv: Conv
) -> Optional[Term]:
    for rule in env.rules_for(name):
        sigma = match(rule, spine, whnf, conv)
        if sigma is not None:
            return apply(instantiate_rule(rule, sigma), spine[len(rule.patterns):])
    return None


def head_rewrite(env: Environment, t: Term) -> Optional[Term]:
    """One head rewrite step on a constant-headed term, or ``None``."""
    from . import kernel

    head, spine = unapply(t)
    if not isinstance(head, Const):
        return None
    return rewrite_spine(
        env, head.name, spine, lambda u: kernel.whnf(env, u), lambda a, b: kernel.conv(env, [], a, b)
    )


# ---------------------------------------------------------------- termination


@dataclass(frozen=True)
class Clause:
    """A compiled clause: ``args`` are pattern terms over ``nvars`` pattern variables."""

    head: str
    args: tuple[Term, ...]
    rhs: Term
    nvars: int


def _is_strict_subterm(small: Term, big: Term) -> bool:
    return any(s == small for s, d in subterms(big) if d == 0 and s is not big)


def _calls(rhs: Term, names: set[str]):
    """Yield ``(name, args)`` for every occurrence of a block member in ``rhs``.

    Arguments are shifted back to the clause context; arguments mentioning
    local binders come back as ``None``.  Implicit arguments are type
    annotations added by elaboration and are not searched for calls.
    """
    def visit(t: Term, depth: int):
        head, args = unapply(t)
        if isinstance(head, Const) and head.name in names:
            out = []
            for a, _ in args:
                if any(i < depth for i in free_vars(a)):
                    out.append(None)
                else:
                    out.append(shift(a, -depth, 0) if depth else a)
            yield head.name, out
        else:
            yield from _children(head, depth)
        for a, imp in args:
            if not imp:
                yield from visit(a, depth)

    def _children(t: Term, depth: int):
        from .terms import Lam, Pair, Pi, Proj1, Proj2, Sigma

        match t:
            case Lam(_, _, b):
                yield from visit(b, depth + 1)
            case Pi(_, _, a, b) | Sigma(_, a, b):
                yield from visit(a, depth)
                yield from visit(b, depth + 1)
            case Pair(a, b):
                yield from visit(a, depth)
                yield from visit(b, depth)
            case Proj1(p) | Proj2(p):
                yield from visit(p, depth)

    yield from visit(rhs, 0)


def check_termination(block: Sequence[Clause]) -> int | None:
    """Accept a mutual block if one argument position decreases at every call.

    Returns the decreasing position (``None`` when there are no recursive
    calls at all); raises ``TerminationRejected`` otherwise.
    """
    names = {c.head for c in block}
    calls = [(c, name, args) for c in block for name, args in _calls(c.rhs, names)]
    if not calls:
        return None
    width = min(len(c.args) for c in block)
    first_failure = None
    for pos in range(width):
        for c, name, args in calls:
            if pos >= len(args) or args[pos] is None or not _is_strict_subterm(args[pos], c.args[pos]):
                if first_failure is None or first_failure[0] < pos:
                    first_failure = (pos, c, name, args)
                break
        else:
            return pos
    from .pretty import show

    if first_failure is None:
        raise TerminationRejected(f"no argument position is shared by the block {sorted(names)}")
    _, c, name, args = first_failure
    shown = " ".join(show(a) if a is not None else "<local>" for a in args)
    raise TerminationRejected(f"call {name} {shown} in a clause of {c.head} is not structurally smaller")
