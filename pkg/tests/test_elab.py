import pytest
from coh_oracle import minimal_witnesses, skeleton
from helpers import check_text, el, statuses

from hitcheck import kernel
from hitcheck.deep import run_deep
from hitcheck.elab import (
    Ctx,
    DepthExhausted,
    Elaborator,
    NoSolution,
    OccursCheck,
    UnificationFailure,
    UnsolvedMeta,
    coh_goal,
    solve_coh_with_depth,
)
from hitcheck.env import budget
from hitcheck.terms import App, Const, Meta, Var


@pytest.fixture(scope="module")
def env():
    c = check_text("import excoh\npostulate N : Type\npostulate z : N\npostulate s : N -> N\n")
    assert set(statuses(c).values()) == {"ok"}
    return c.env


def solve(env, name, depth=32):
    goal = coh_goal(env, env.type_of(name))
    with budget():
        return run_deep(solve_coh_with_depth, env, goal, depth)


def test_implicit_arguments_are_inserted(env):
    with budget():
        t = el(env, Ctx(), "idp {N} {z}")
        u = el(env, Ctx(), "idp", el(env, Ctx(), "z == z"))
    assert t == u


def test_implicit_lambda_binds_user_names(env):
    ty = el(env, Ctx(), "{A : Type} -> A -> A")
    with budget():
        t = el(env, Ctx(), "\\{A} x -> x", ty)
        kernel.check(env, [], t, ty)


def test_unsolvable_hole_reported(env):
    with pytest.raises(UnsolvedMeta), budget():
        el(env, Ctx(), "_")


def test_type_error_reported(env):
    with pytest.raises(UnificationFailure), budget():
        el(env, Ctx(), "s N")


def test_pattern_unification_solves_meta(env):
    e = Elaborator(env)
    ctx = Ctx().extend("x", Const("N"))
    m = e.fresh(ctx, Const("N"))
    with budget():
        e.unify(ctx, m, App(Const("s"), Var(0)))
    assert e.zonk(m) == App(Const("s"), Var(0))


def test_occurs_check(env):
    e = Elaborator(env)
    ctx = Ctx().extend("x", Const("N"))
    m = e.fresh(ctx, Const("N"))
    with pytest.raises(OccursCheck), budget():
        e.unify(ctx, m, App(Const("s"), m))


def test_postponed_constraint_solved_later(env):
    c = check_text("import prelude\npostulate N : Type\npostulate z : N\ndef k : N = (\\x -> x) z\n")
    assert statuses(c)["k"] == "ok"


def test_meta_free_result(env):
    with budget():
        t = el(env, Ctx(), "cat {N} {z} {z} {z} idp idp")
    assert not any(isinstance(x, Meta) for x in [t])


# ---------------------------------------------------------------- coherence


def test_composition_is_two_path_inductions(env):
    w, depth = solve(env, "composition")
    assert skeleton(w) == "J (J idp-Coh)"
    assert depth == 3


@pytest.mark.parametrize("name", ["composition", "excoh"])
def test_solver_matches_breadth_first_minimum(env, name):
    goal = coh_goal(env, env.type_of(name))
    with budget():
        d, ws = run_deep(minimal_witnesses, env, goal, 12)
    w, depth = solve(env, name)
    assert d is not None and depth == d
    assert w in ws


def test_excoh_within_depth_twelve(env):
    w, depth = solve(env, "excoh", 12)
    assert depth <= 12
    assert skeleton(w).startswith("J ")


def test_depth_limit_is_enforced(env):
    with pytest.raises(DepthExhausted):
        solve(env, "excoh", 4)


def test_unprovable_goal_has_no_solution():
    c = check_text("import prelude\npostulate N : Type\npostulate z : N\npostulate w : N\ncoh bad : Coh (z == w)\npostulate goal : Coh (z == w)\n")
    r = [r for r in c.results if r.name == "bad"][0]
    assert r.status == "failed"
    with pytest.raises((NoSolution, DepthExhausted)):
        solve(c.env, "goal", 6)


def test_coh_depth_recorded_in_results():
    c = check_text("import prelude\n")
    depths = {r.name: r.depth for r in c.results}
    assert depths["composition"] == 3
