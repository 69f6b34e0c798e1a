"""Manifest-driven corpus runner."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .checker import DEFAULT_COH_DEPTH, Checker, DeclResult
from .env import DEFAULT_FUEL, CheckError
from .syntax import ParseError

CORPUS_DIR = Path(__file__).parent / "corpus"
DEFAULT_MANIFEST = CORPUS_DIR / "manifest.txt"

_HEADER = re.compile(r"^\[(tier-[A-Za-z0-9_-]+)\]$")


class CorpusError(Exception):
    """A problem with the manifest or its files, found before any checking."""


@dataclass
class Manifest:
    tiers: list[tuple[str, list[Path]]]
    root: Path

    def tier(self, name: str) -> list[Path]:
        for t, files in self.tiers:
            if t == name:
                return files
        raise CorpusError(f"manifest has no tier {name!r}; tiers are {', '.join(t for t, _ in self.tiers)}")

    def before(self, name: str) -> list[Path]:
        """Files of all tiers listed ahead of ``name``."""
        out: list[Path] = []
        for t, files in self.tiers:
            if t == name:
                return out
            out.extend(files)
        raise CorpusError(f"manifest has no tier {name!r}")


def tier_name(tier: str) -> str:
    return tier if tier.startswith("tier-") else f"tier-{tier}"


def parse_manifest(text: str, root: Path) -> Manifest:
    tiers: list[tuple[str, list[Path]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            if any(t == m.group(1) for t, _ in tiers):
                raise CorpusError(f"line {lineno}: tier {m.group(1)} appears twice")
            tiers.append((m.group(1), []))
        elif not tiers:
            raise CorpusError(f"line {lineno}: file {line!r} listed before any [tier-N] header")
        else:
            tiers[-1][1].append(root / line)
    return Manifest(tiers, root)


def load_manifest(path: Path) -> Manifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CorpusError(f"cannot read manifest {path}: {e.strerror or e}") from e
    return parse_manifest(text, path.parent)


@dataclass
class CheckReport:
    tier: str
    entries: list[DeclResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.status == "ok" for e in self.entries)

    @property
    def failures(self) -> list[DeclResult]:
        return [e for e in self.entries if e.status != "ok"]

    def as_json(self) -> list[dict]:
        return [e.as_json() for e in self.entries]

    def to_json(self) -> str:
        return json.dumps(self.as_json(), indent=2)

    def to_text(self) -> str:
        lines = []
        for e in self.entries:
            depth = "" if e.depth is None else f" depth={e.depth}"
            lines.append(f"{e.status:6} {e.name}  ({e.millis:.1f} ms, {e.steps} steps{depth})")
            if e.status != "ok":
                lines.extend("       " + m for m in e.message.splitlines())
        total = sum(e.millis for e in self.entries) / 1000
        lines.append(f"{self.tier}: {len(self.entries) - len(self.failures)}/{len(self.entries)} ok in {total:.1f} s")
        return "\n".join(lines)


def check_corpus(
    manifest: Manifest,
    tier: str,
    fuel: int = DEFAULT_FUEL,
    coh_depth: int = DEFAULT_COH_DEPTH,
    checker: Optional[Checker] = None,
) -> CheckReport:
    """Check the files of ``tier`` after those of earlier tiers.

    Only declarations of the requested tier's files are reported; earlier
    tiers just build the environment.  Imports resolve against the manifest's
    directory.
    """
    tier = tier_name(tier)
    files = manifest.tier(tier)
    earlier = manifest.before(tier)
    missing = [p for p in earlier + files if not p.is_file()]
    if missing:
        raise CorpusError(f"manifest references missing file {missing[0]}")
    c = checker or Checker(fuel=fuel, coh_depth=coh_depth, root=manifest.root)
    try:
        for p in earlier:
            c.check_file(p)
        report = CheckReport(tier)
        for p in files:
            c.check_file(p)
            report.entries.extend(c.loaded[str(p.resolve())])
    except (ParseError, CheckError) as e:
        raise CorpusError(str(e)) from e
    return report


__all__ = [
    "CORPUS_DIR",
    "DEFAULT_MANIFEST",
    "CheckReport",
    "CorpusError",
    "Manifest",
    "check_corpus",
    "load_manifest",
    "parse_manifest",
    "tier_name",
]
