"""Command line entry point: ``hitcheck <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import kernel
from .checker import DEFAULT_COH_DEPTH, Checker, ImportError_
from .corpus import CheckReport, CorpusError, check_corpus, load_manifest, tier_name
from .deep import run_deep
from .elab import DepthExhausted, NoSolution, coh_goal, solve_coh_with_depth
from .env import DEFAULT_FUEL, CheckError, budget
from .pretty import show
from .setmodel import BijectionFailure, ModelError, verify_model
from .syntax import ParseError
from .terms import Const

OK, FAILURE, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="head-reduction step budget per declaration")
    common.add_argument("--coh-depth", type=int, default=DEFAULT_COH_DEPTH, help="instance search depth limit")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--root", type=Path, default=None, help="directory that imports resolve against")

    p = argparse.ArgumentParser(prog="hitcheck", description="Type checker for postulated HITs with rewrite rules.")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", parents=[common], help="check one file")
    c.add_argument("file", type=Path)
    n = sub.add_parser("nf", parents=[common], help="print the normal form of a definition")
    n.add_argument("file", type=Path)
    n.add_argument("--term", required=True)
    h = sub.add_parser("coh", parents=[common], help="solve a coherence goal")
    h.add_argument("file", type=Path)
    h.add_argument("--goal", required=True)
    k = sub.add_parser("corpus", parents=[common], help="run a manifest tier")
    k.add_argument("manifest", type=Path)
    k.add_argument("--tier", required=True)
    m = sub.add_parser("model", parents=[common], help="verify the set-level model of J_n A")
    m.add_argument("--m", type=int, required=True)
    m.add_argument("--n", type=int, required=True)
    return p


def _checker(args, path: Path) -> Checker:
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    root = args.root or path.parent
    if args.fuel < 1 or args.coh_depth < 0:
        raise UsageError("--fuel must be positive and --coh-depth non-negative")
    c = Checker(fuel=args.fuel, coh_depth=args.coh_depth, root=root)
    c.check_file(path)
    return c


def _report_failures(c: Checker) -> bool:
    failed = [r for r in c.results if r.status != "ok"]
    for r in failed:
        print(f"{r.file}: {r.name}: {r.message}", file=sys.stderr)
    return not failed


def _cmd_check(args) -> int:
    c = _checker(args, args.file)
    own = c.loaded[str(args.file.resolve())]
    report = CheckReport(str(args.file), own)
    print(report.to_json() if args.json else report.to_text())
    _report_failures(c)
    return OK if all(r.status == "ok" for r in c.results) else FAILURE


def _cmd_nf(args) -> int:
    c = _checker(args, args.file)
    clean = _report_failures(c)
    decl = c.env.decls.get(args.term)
    if decl is None:
        raise UsageError(f"{args.term!r} is not declared in {args.file}")
    term = decl.body if decl.body is not None else Const(args.term)
    with budget(args.fuel) as b:
        normal = kernel.nf(c.env, term)
    if args.json:
        print(json.dumps({"name": args.term, "nf": show(normal), "steps": b.steps}))
    else:
        print(show(normal))
    return OK if clean else FAILURE


def _cmd_coh(args) -> int:
    c = _checker(args, args.file)
    clean = _report_failures(c)
    if args.goal not in c.env.decls:
        raise UsageError(f"{args.goal!r} is not declared in {args.file}")
    goal = coh_goal(c.env, c.env.type_of(args.goal))
    names = [x for x, _, _ in goal.telescope]
    try:
        with budget(args.fuel):
            witness, depth = solve_coh_with_depth(c.env, goal, args.coh_depth)
    except (NoSolution, DepthExhausted) as e:
        print(f"{args.goal}: {e}", file=sys.stderr)
        return FAILURE
    text = show(witness, names)
    if args.json:
        print(json.dumps({"name": args.goal, "witness": text, "depth": depth}))
    else:
        print(text)
    return OK if clean else FAILURE


def _cmd_corpus(args) -> int:
    manifest = load_manifest(args.manifest)
    if args.root is not None:
        manifest.root = args.root
    report = check_corpus(manifest, tier_name(args.tier), args.fuel, args.coh_depth)
    print(report.to_json() if args.json else report.to_text())
    for r in report.failures:
        print(f"{r.file}: {r.name}: {r.message}", file=sys.stderr)
    return OK if report.ok else FAILURE


def _cmd_model(args) -> int:
    try:
        r = verify_model(args.m, args.n)
    except BijectionFailure as e:
        if args.json:
            print(json.dumps({"m": args.m, "n": args.n, "bijection": False, "witness": repr(e.witness)}))
        print(str(e), file=sys.stderr)
        return FAILURE
    if args.json:
        print(json.dumps(r.as_json()))
    else:
        print(f"m={r.m} n={r.n}: {r.classes} classes, {r.words} words, bijection")
    return OK


COMMANDS = {"check": _cmd_check, "nf": _cmd_nf, "coh": _cmd_coh, "corpus": _cmd_corpus, "model": _cmd_model}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _parser().parse_args(list(sys.argv[1:] if argv is None else argv))
    except SystemExit as e:
        return USAGE if e.code not in (0, None) else OK
    try:
        return run_deep(COMMANDS[args.command], args)
    except (UsageError, ParseError, CorpusError, ImportError_, OSError) as e:
        print(f"hitcheck: {e}", file=sys.stderr)
        return USAGE
    except ModelError as e:
        print(f"hitcheck: {e}", file=sys.stderr)
        return USAGE
    except CheckError as e:
        print(f"hitcheck: {e}", file=sys.stderr)
        return FAILURE


if __name__ == "__main__":
    sys.exit(main())
