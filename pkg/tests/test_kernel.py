import pytest
from helpers import check_text, el, statuses

from hitcheck import kernel
from hitcheck.elab import Ctx
from hitcheck.env import FuelExhausted, TypeMismatch, budget
from hitcheck.terms import SORT, App, Const, Lam, Pair, Pi, Proj1, Proj2, Sigma, Var

BASE = """
import prelude
postulate N : Type
postulate z : N
postulate s : N -> N
postulate P : N -> Type
def two : N = s (s z)
def twice : (N -> N) -> N -> N = \\f x -> f (f x)
"""


@pytest.fixture(scope="module")
def base():
    c = check_text(BASE)
    assert set(statuses(c).values()) == {"ok"}
    return c.env


def test_whnf_beta_and_delta(base):
    t = App(App(Const("twice"), Const("s")), Const("z"))
    with budget():
        assert kernel.nf(base, t) == App(Const("s"), App(Const("s"), Const("z")))
        assert kernel.conv(base, [], t, Const("two"))


def test_whnf_stops_at_postulate(base):
    t = App(Const("s"), Const("z"))
    with budget():
        assert kernel.whnf(base, t) is t


def test_rewrite_rule_fires(base):
    # J-rule P d idp reduces to d
    ctx = Ctx().extend("x", Const("N"))
    t = el(base, ctx, "J-rule {N} {x} (\\b _ -> N) x idp")
    with budget():
        assert kernel.whnf(base, t) == Var(0)


def test_eta_for_functions(base):
    f = Var(0)
    ctx = [("f", Pi("x", False, Const("N"), Const("N")))]
    expanded = Lam("x", False, App(Var(1), Var(0)))
    with budget():
        assert kernel.conv(base, ctx, f, expanded)
        assert kernel.conv(base, ctx, expanded, f)


def test_eta_for_pairs(base):
    p = Var(0)
    with budget():
        assert kernel.conv(base, [("p", Sigma("_", Const("N"), Const("N")))], Pair(Proj1(p), Proj2(p)), p)


def test_check_rejects_wrong_argument(base):
    with budget(), pytest.raises(TypeMismatch):
        kernel.check(base, [], App(Const("s"), Const("N")), Const("N"))


def test_infer_application_spine(base):
    with budget():
        assert kernel.infer(base, [], App(Const("P"), Const("two"))) == SORT
        assert kernel.conv(base, [], kernel.infer(base, [], Const("two")), Const("N"))


def test_looping_rules_run_out_of_fuel():
    c = check_text("import prelude\npostulate N : Type\npostulate loop : N\npostulate loop-eq : loop == loop\nrewrite loop-eq\n")
    assert statuses(c)["rewrite loop-eq"] == "ok"
    with budget(500), pytest.raises(FuelExhausted):
        kernel.whnf(c.env, Const("loop"))


def test_fuel_is_reported_per_declaration():
    c = check_text("import prelude\npostulate N : Type\npostulate z : N\ndef w : N = z\n")
    (r,) = [r for r in c.results if r.name == "w"]
    assert r.status == "ok" and r.steps >= 0
