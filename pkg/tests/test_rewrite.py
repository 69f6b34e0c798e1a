import pytest
from helpers import check_text, statuses
from hypothesis import given, settings
from hypothesis import strategies as st

from hitcheck import kernel
from hitcheck.env import budget
from hitcheck.rewrite import (
    Clause,
    HigherOrderPattern,
    IllTypedRule,
    NonlinearPattern,
    PRigid,
    PVar,
    TerminationRejected,
    check_termination,
    compile_rule,
    instantiate_rule,
    match,
    to_patterns,
)
from hitcheck.terms import App, Const, Var, apply, free_vars, subst_many

SIG = """
import prelude
postulate T : Type
postulate c0 : T
postulate c1 : T -> T
postulate c2 : T -> T -> T
postulate h : T -> T -> T
"""
ARITY = {"c0": 0, "c1": 1, "c2": 2}


@pytest.fixture(scope="module")
def env():
    return check_text(SIG).env


def shapes(max_leaves=6):
    """Pattern shapes: ``None`` is a hole for a rule variable."""
    return st.recursive(
        st.one_of(st.none(), st.just(("c0",))),
        lambda sub: st.one_of(st.tuples(st.just("c1"), sub), st.tuples(st.just("c2"), sub, sub)),
        max_leaves=max_leaves,
    )


def closed_terms():
    return st.recursive(
        st.just(Const("c0")),
        lambda sub: st.one_of(
            st.builds(lambda a: App(Const("c1"), a), sub), st.builds(lambda a, b: App(App(Const("c2"), a), b), sub, sub)
        ),
        max_leaves=8,
    )


def fill(shape, counter: list[int]):
    """Number the holes left to right; returns a term whose holes are placeholders ``("hole", k)``."""
    if shape is None:
        counter[0] += 1
        return ("hole", counter[0] - 1)
    name, *args = shape
    return (name, *[fill(a, counter) for a in args])


def to_term(t, arity: int):
    if t[0] == "hole":
        return Var(arity - 1 - t[1])
    name, *args = t
    return apply(Const(name), [(to_term(a, arity), False) for a in args])


def same(a, b):
    return a == b


@settings(max_examples=1000, deadline=None)
@given(shapes(), shapes(), st.data())
def test_match_recovers_substitution(env, s1, s2, data):
    counter = [0]
    f1, f2 = fill(s1, counter), fill(s2, counter)
    k = counter[0]
    lhs = apply(Const("h"), [(to_term(f1, k), False), (to_term(f2, k), False)])
    head, pats = to_patterns(env, lhs, k)
    assert head == "h"
    values = [data.draw(closed_terms()) for _ in range(k)]
    instance = subst_many(lhs, values)
    spine = [(instance.fn.arg, False), (instance.arg, False)]
    sigma = match(RuleStub(pats, k), spine, lambda t: t, same)
    assert sigma == dict(enumerate(values))
    # the replacement built from the matched variables reproduces the instance
    assert instantiate_rule(RuleStub(pats, k, lhs), sigma) == instance


class RuleStub:
    def __init__(self, patterns, arity, replacement=None):
        self.patterns, self.arity, self.replacement = patterns, arity, replacement


def test_match_fails_on_different_constructor(env):
    head, pats = to_patterns(env, apply(Const("h"), [(App(Const("c1"), Var(0)), False), (Const("c0"), False)]), 1)
    spine = [(Const("c0"), False), (Const("c0"), False)]
    assert match(RuleStub(pats, 1), spine, lambda t: t, same) is None


def test_nonlinear_pattern_rejected(env):
    lhs = apply(Const("h"), [(Var(0), False), (Var(0), False)])
    with pytest.raises(NonlinearPattern):
        to_patterns(env, lhs, 1)


def test_higher_order_pattern_rejected(env):
    lhs = apply(Const("h"), [(App(Var(0), Const("c0")), False), (Const("c0"), False)])
    with pytest.raises(HigherOrderPattern):
        to_patterns(env, lhs, 1)


def test_implicit_positions_are_wildcards(env):
    lhs = apply(Const("h"), [(Var(0), False), (Var(1), False)])
    _, pats = to_patterns(env, lhs, 2)
    assert pats == ((PVar(1), False), (PVar(0), False))
    _, pats = to_patterns(env, App(Const("c1"), App(Const("c1"), Var(0))), 1)
    assert pats == ((PRigid("c1", ((PVar(0), False),)), False),)


def test_unbound_rhs_variable_rejected():
    c = check_text(SIG + "postulate bad : (x y : T) -> c1 x == y\nrewrite bad\n")
    r = [r for r in c.results if r.name == "rewrite bad"][0]
    assert r.status == "failed" and "not bound" in r.message


def test_first_matching_rule_wins():
    c = check_text(SIG + "postulate r1 : (x : T) -> c1 x == c0\nrewrite r1\npostulate r2 : c1 c0 == c2 c0 c0\nrewrite r2\n")
    with budget():
        assert kernel.whnf(c.env, App(Const("c1"), Const("c0"))) == Const("c0")


# ---------------------------------------------------------------- termination

NAT = SIG + "postulate Nat : Type\npostulate O : Nat\npostulate S : Nat -> Nat\n"


def test_structural_recursion_accepted():
    c = check_text(NAT + "def double : Nat -> Nat where\n  | double O = O\n  | double (S n) = S (S (double n))\n")
    assert statuses(c)["double"] == "ok"


def test_mutual_recursion_through_non_decreasing_call_rejected():
    src = NAT + "mutual\n  def f : Nat -> Nat where\n    | f O = O\n    | f (S n) = g n\n  def g : Nat -> Nat where\n    | g n = f n\nend\n"
    c = check_text(src)
    failed = [r for r in c.results if r.status != "ok"]
    assert failed and "structurally smaller" in failed[0].message


def test_non_structural_call_rejected():
    c = check_text(NAT + "def loop : Nat -> Nat where\n  | loop n = loop (S n)\n")
    assert statuses(c)["loop"] == "failed"


def test_check_termination_on_raw_clauses():
    n = Var(0)
    ok = [Clause("f", (App(Const("S"), n),), App(Const("f"), n), 1)]
    assert check_termination(ok) == 0
    bad = [Clause("f", (n,), App(Const("f"), n), 1)]
    with pytest.raises(TerminationRejected):
        check_termination(bad)


def test_calls_in_implicit_arguments_are_ignored():
    n = Var(0)
    rhs = App(App(Const("g"), App(Const("f"), App(Const("S"), n)), True), Const("c0"))
    assert check_termination([Clause("f", (App(Const("S"), n),), rhs, 1)]) is None
    assert free_vars(rhs) == {0}


def test_compile_rule_checks_types(env):
    tele = [("x", False, Const("T"))]
    with budget():
        compile_rule(env, tele, App(Const("c1"), Var(0)), Var(0))
        with pytest.raises(IllTypedRule):
            compile_rule(env, tele, App(Const("c1"), Var(0)), Const("T"))
