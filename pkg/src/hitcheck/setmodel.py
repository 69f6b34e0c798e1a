"""Set-level model of the tower J_n A over a finite pointed alphabet.

Each stage is a finite set of classes.  J_0 is a point, J_1 is A, and
J_(k+2) is the quotient of J_(k+1) + A x J_(k+1) by the images of the top-left
corner of the defining pushout square.  Path constructors of higher
dimension leave no trace at this level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

MAX_CARRIER = 10**7


class ModelError(Exception):
    pass


class ResourceLimit(ModelError):
    pass


class BijectionFailure(ModelError):
    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = witness


@dataclass
class FinQuotient:
    """Union-find over ``range(size)`` with path compression."""

    size: int
    parent: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.size > MAX_CARRIER:
            raise ResourceLimit(f"carrier of {self.size} elements exceeds {MAX_CARRIER}")
        if not self.parent:
            self.parent = list(range(self.size))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        a, b = self.find(i), self.find(j)
        if a != b:
            self.parent[max(a, b)] = min(a, b)

    def roots(self) -> list[int]:
        return [i for i in range(self.size) if self.find(i) == i]

    def class_count(self) -> int:
        return len(self.roots())

    def canonical(self) -> list[int]:
        """Map every element to the index of its class, classes numbered by least member."""
        index = {r: k for k, r in enumerate(self.roots())}
        return [index[self.find(i)] for i in range(self.size)]


@dataclass
class Stage:
    """One stage J_k with its classes and the maps into stage k+1 once known."""

    classes: int
    quotient: FinQuotient
    iota: list[int] = field(default_factory=list)  # class of J_k -> class of J_(k+1)
    alpha: list[list[int]] = field(default_factory=list)  # alpha[a][x] in J_(k+1)


@dataclass
class Tower:
    m: int
    stages: list[Stage]

    @property
    def top(self) -> Stage:
        return self.stages[-1]


def _sum_powers(m: int, n: int) -> int:
    return sum((m - 1) ** k for k in range(n + 1))


def build_tower(m: int, n: int) -> Tower:
    """Stages J_0 .. J_n; stage k < n carries iota_k and alpha_k."""
    if m < 1:
        raise ModelError("the alphabet needs at least its basepoint")
    if n < 0:
        raise ModelError("stage index must be non-negative")
    stages = [Stage(1, FinQuotient(1))]
    if n == 0:
        return Tower(m, stages)
    stages.append(Stage(m, FinQuotient(m)))
    stages[0].iota = [0]
    stages[0].alpha = [[a] for a in range(m)]
    for k in range(n - 1):
        lower, upper = stages[k], stages[k + 1]
        size = upper.classes * (m + 1)
        q = FinQuotient(size)
        inr = lambda y: y  # noqa: E731
        inl = lambda a, y: upper.classes * (1 + a) + y  # noqa: E731
        for a in range(m):
            for x in range(lower.classes):
                q.union(inl(a, lower.iota[x]), inr(lower.alpha[a][x]))
        for y in range(upper.classes):
            q.union(inl(0, y), inr(y))
        canon = q.canonical()
        upper.iota = [canon[inr(y)] for y in range(upper.classes)]
        upper.alpha = [[canon[inl(a, y)] for y in range(upper.classes)] for a in range(m)]
        stages.append(Stage(q.class_count(), q))
    return Tower(m, stages)


def build_jn(m: int, n: int) -> FinQuotient:
    return build_tower(m, n).top.quotient


def enumerate_words(m: int, n: int) -> list[tuple[int, ...]]:
    """Words over the letters 1..m-1 of length at most n, shortest first, then lexicographic."""
    if m < 1:
        raise ModelError("the alphabet needs at least its basepoint")
    if _sum_powers(m, n) > MAX_CARRIER:
        raise ResourceLimit(f"more than {MAX_CARRIER} words")
    letters = range(1, m)
    return [w for k in range(n + 1) for w in itertools.product(letters, repeat=k)]


def word_class(tower: Tower, word: tuple[int, ...], stage: int) -> int:
    """Class in J_stage of a word: fold alpha from the right, then include."""
    x, k = 0, 0
    for a in reversed(word):
        x = tower.stages[k].alpha[a][x]
        k += 1
    while k < stage:
        x = tower.stages[k].iota[x]
        k += 1
    return x


@dataclass
class ModelReport:
    m: int
    n: int
    classes: int
    words: int
    bijection: bool

    def as_json(self) -> dict:
        return {"m": self.m, "n": self.n, "classes": self.classes, "words": self.words, "bijection": self.bijection}


def verify_model(m: int, n: int) -> ModelReport:
    """Check that words of length at most n name the classes of J_n exactly once."""
    tower = build_tower(m, n)
    words = enumerate_words(m, n)
    top = tower.top.classes
    seen: dict[int, tuple[int, ...]] = {}
    for w in words:
        c = word_class(tower, w, n)
        if c in seen:
            raise BijectionFailure(f"words {seen[c]} and {w} name the same class {c}", w)
        seen[c] = w
    missing = [c for c in range(top) if c not in seen]
    if missing:
        raise BijectionFailure(f"class {missing[0]} of J_{n} is not named by any word", missing[0])
    for k in range(n):
        for w in words:
            if len(w) <= k and tower.stages[k].iota[word_class(tower, w, k)] != word_class(tower, w, k + 1):
                raise BijectionFailure(f"word {w} changes class under inclusion into stage {k + 1}", w)
    return ModelReport(m, n, top, len(words), True)


__all__ = [
    "BijectionFailure",
    "FinQuotient",
    "ModelError",
    "ModelReport",
    "ResourceLimit",
    "Stage",
    "Tower",
    "build_jn",
    "build_tower",
    "enumerate_words",
    "verify_model",
    "word_class",
]
