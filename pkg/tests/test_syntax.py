import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hitcheck.corpus import CORPUS_DIR
from hitcheck.syntax import (
    Clause,
    CohDecl,
    Def,
    Import,
    Instance,
    Mutual,
    ParseError,
    Postulate,
    RewritePragma,
    SApp,
    SEq,
    SFst,
    SHole,
    SLam,
    SourceFile,
    SPair,
    SPi,
    SSigma,
    SSnd,
    SType,
    SVar,
    is_identifier,
    parse_file,
    parse_term,
    print_file,
    print_term,
)

NAMES = ["x", "y", "A", "f", "p", "cat", "!", "ap-idf", "J-rev", "down-=-in", "x1", "P'", "&"]
assert all(is_identifier(n) for n in NAMES)

names = st.sampled_from(NAMES)


def surface_terms(max_leaves: int = 10):
    leaf = st.one_of(st.builds(SVar, names), st.just(SType()), st.just(SHole()))
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.builds(SApp, sub, sub, st.booleans()),
            st.builds(SLam, names, st.booleans(), sub),
            st.builds(SPi, st.one_of(st.none(), names), st.booleans(), sub, sub).filter(
                lambda t: t.name is not None or not t.implicit
            ),
            st.builds(SSigma, st.one_of(st.none(), names), sub, sub),
            st.builds(SPair, sub, sub),
            st.builds(SFst, sub),
            st.builds(SSnd, sub),
            st.builds(SEq, sub, sub),
        ),
        max_leaves=max_leaves,
    )


def clauses():
    lhs = st.builds(
        lambda f, args: _app(SVar(f), args), names, st.lists(st.builds(SVar, names), min_size=1, max_size=3)
    )
    return st.builds(Clause, lhs, surface_terms(6))


def _app(head, args):
    for a in args:
        head = SApp(head, a)
    return head


def simple_decls():
    ty = surface_terms(8)
    return st.one_of(
        st.builds(Postulate, names, ty),
        st.builds(Def, names, ty, surface_terms(8)),
        st.builds(lambda n, t, cs: Def(n, t, None, tuple(cs)), names, ty, st.lists(clauses(), min_size=1, max_size=3)),
        st.builds(RewritePragma, names),
        st.builds(Instance, names),
        st.builds(CohDecl, names, ty),
        st.builds(Import, st.sampled_from(["prelude", "pushout", "a.b"])),
    )


def decls():
    return st.one_of(simple_decls(), st.builds(lambda ds: Mutual(tuple(ds)), st.lists(simple_decls(), min_size=1, max_size=3)))


@settings(max_examples=1000, deadline=None)
@given(surface_terms())
def test_term_round_trip(t):
    assert parse_term(print_term(t)) == t


@settings(max_examples=1000, deadline=None)
@given(st.lists(decls(), max_size=6))
def test_generated_file_round_trip(ds):
    f = SourceFile("<gen>", tuple(ds))
    assert parse_file(print_file(f), "<gen>") == f


@pytest.mark.parametrize("path", sorted(CORPUS_DIR.glob("*.hit")), ids=lambda p: p.name)
def test_corpus_round_trip(path):
    f = parse_file(path.read_text(), str(path))
    printed = print_file(f)
    again = parse_file(printed, str(path))
    assert again == f
    assert print_file(again) == printed


def test_comments_and_layout_are_ignored():
    a = parse_file("-- c\npostulate  A :\n   Type  -- t\n")
    b = parse_file("postulate A : Type")
    assert a.decls == b.decls


def test_unicode_arrow_and_lambda():
    assert parse_term("λ x → x") == parse_term("\\x -> x")


@pytest.mark.parametrize("text", ["(x : A", "\\ -> x", "A ->", "def : Type", "postulate x Type"])
def test_parse_errors_report_position(text):
    with pytest.raises(ParseError) as e:
        parse_file(text) if text.startswith(("def", "postulate")) else parse_term(text)
    assert "line" in str(e.value) or ":" in str(e.value)


def test_arrow_is_right_associative_and_binds_looser_than_eq():
    t = parse_term("a == b -> c -> d")
    assert isinstance(t, SPi) and isinstance(t.domain, SEq) and isinstance(t.codomain, SPi)


def test_sigma_is_right_associative():
    t = parse_term("(x : A) * B * C")
    assert isinstance(t, SSigma) and t.name == "x" and isinstance(t.second, SSigma)
