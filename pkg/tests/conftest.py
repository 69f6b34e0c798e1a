import time

import pytest

from hitcheck.checker import Checker
from hitcheck.corpus import CORPUS_DIR, DEFAULT_MANIFEST, check_corpus, load_manifest
from hitcheck.deep import run_deep


@pytest.fixture(scope="session")
def prelude() -> Checker:
    c = Checker(root=CORPUS_DIR)
    run_deep(c.check_file, CORPUS_DIR / "prelude.hit")
    assert all(r.status == "ok" for r in c.results)
    return c


@pytest.fixture(scope="session")
def tier1():
    """The tier-1 corpus checked once per session: ``(checker, report, seconds)``."""
    checker = Checker(root=CORPUS_DIR)
    start = time.perf_counter()
    report = run_deep(check_corpus, load_manifest(DEFAULT_MANIFEST), "1", checker=checker)
    return checker, report, time.perf_counter() - start


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
