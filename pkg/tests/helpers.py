"""Shared test helpers."""

from hitcheck.checker import Checker
from hitcheck.corpus import CORPUS_DIR
from hitcheck.deep import run_deep
from hitcheck.elab import Ctx, elaborate
from hitcheck.syntax import parse_file, parse_term


def check_text(text: str, checker: Checker | None = None) -> Checker:
    """Check a source snippet; imports resolve against the corpus."""
    c = checker or Checker(root=CORPUS_DIR)
    run_deep(c.check_source, parse_file(text))
    return c


def statuses(c: Checker) -> dict[str, str]:
    return {r.name: r.status for r in c.results}


def el(env, ctx: Ctx, text: str, ty=None):
    return run_deep(elaborate, env, ctx, parse_term(text), ty)
