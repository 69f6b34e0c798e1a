"""Breadth-first reference search for coherence goals.

Explores every instance tree level by level, independently of the
solver's depth-first order, and returns all kernel-checked witnesses of
the smallest depth.
"""

from hitcheck import kernel
from hitcheck.elab import CohGoal, Ctx, Elaborator
from hitcheck.env import CheckError
from hitcheck.terms import Const, unapply


def _trees(el: Elaborator, ctx: Ctx, goal, depth: int):
    """All ways to build ``goal`` with instance nesting at most ``depth``."""
    if depth <= 0:
        return
    for name in el.env.instances:
        snap = el.metas.snapshot()
        try:
            term, premises, concl = el.instance_parts(ctx, name)
            el.unify(ctx, concl, goal)
        except CheckError:
            el.metas.restore(snap)
            continue
        yield from _fill(el, ctx, term, premises, depth)
        el.metas.restore(snap)


def _fill(el, ctx, term, premises, depth):
    if not premises:
        yield term
        return
    (placeholder, ty), rest = premises[0], premises[1:]
    for sub in _trees(el, ctx, el.zonk(ty), depth - 1):
        snap = el.metas.snapshot()
        try:
            el.unify(ctx, placeholder, sub)
        except CheckError:
            el.metas.restore(snap)
            continue
        yield from _fill(el, ctx, term, rest, depth)
        el.metas.restore(snap)


def minimal_witnesses(env, goal: CohGoal, max_depth: int = 12):
    """``(depth, witnesses)`` for the shallowest depth that has any."""
    ctx = Ctx()
    for n, _, ty in goal.telescope:
        ctx = ctx.extend(n, ty)
    for d in range(1, max_depth + 1):
        el = Elaborator(env)
        found = []
        for term in _trees(el, ctx, goal.conclusion, d):
            try:
                w = el.finish(term)
                kernel.check(env, ctx.kernel(), w, goal.conclusion)
            except CheckError:
                continue
            if w not in found:
                found.append(w)
        if found:
            return d, found
    return None, []


def skeleton(t) -> str:
    """The instance tree of a witness with implicit arguments erased."""
    head, args = unapply(t)
    explicit = [skeleton(a) for a, imp in args if not imp]
    name = head.name if isinstance(head, Const) else "?"
    return " ".join([name] + [f"({e})" if " " in e else e for e in explicit])
