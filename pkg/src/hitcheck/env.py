"""Global environment, error types and the reduction budget."""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field
from typing import Iterator, Literal

from .terms import Term

DEFAULT_FUEL = 10**7


class CheckError(Exception):
    """Base class for all type-checking failures."""


class UnboundVariable(CheckError):
    pass


class UnknownConstant(CheckError):
    pass


class NotAFunction(CheckError):
    pass


class NotAPair(CheckError):
    pass


class TypeMismatch(CheckError):
    def __init__(self, message: str, expected: str = "", actual: str = ""):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class FuelExhausted(CheckError):
    pass


class DuplicateName(CheckError):
    pass


@dataclass
class Budget:
    """Counts head-reduction steps and aborts past ``limit``."""

    limit: int = DEFAULT_FUEL
    steps: int = 0

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.limit:
            raise FuelExhausted(
                f"reduction exceeded {self.limit} head steps; the rewrite rules probably loop"
            )


_budget: contextvars.ContextVar[Budget] = contextvars.ContextVar("budget")


def current_budget() -> Budget:
    try:
        return _budget.get()
    except LookupError:
        b = Budget()
        _budget.set(b)
        return b


@contextlib.contextmanager
def budget(limit: int = DEFAULT_FUEL) -> Iterator[Budget]:
    b = Budget(limit)
    token = _budget.set(b)
    try:
        yield b
    finally:
        _budget.reset(token)


Kind = Literal["postulate", "definition"]


@dataclass(frozen=True)
class Declaration:
    name: str
    kind: Kind
    type: Term
    body: Term | None = None  # only for definitions given by a single body


@dataclass(frozen=True)
class Environment:
    """Append-only map from constant names to their declarations.

    Every ``with_*`` method returns a new environment; committed
    environments are never mutated and may be shared between threads.
    """

    decls: dict[str, Declaration] = field(default_factory=dict)
    rules: dict[str, tuple] = field(default_factory=dict)
    instances: tuple[str, ...] = ()
    order: tuple[str, ...] = ()

    def __contains__(self, name: str) -> bool:
        return name in self.decls

    def lookup(self, name: str) -> Declaration:
        try:
            return self.decls[name]
        except KeyError:
            raise UnknownConstant(f"unknown constant {name!r}") from None

    def type_of(self, name: str) -> Term:
        return self.lookup(name).type

    def rules_for(self, name: str) -> tuple:
        return self.rules.get(name, ())

    def is_defined(self, name: str) -> bool:
        d = self.decls.get(name)
        return d is not None and d.kind == "definition"

    def with_declaration(self, decl: Declaration) -> "Environment":
        if decl.name in self.decls:
            raise DuplicateName(f"{decl.name!r} is already declared")
        decls = dict(self.decls)
        decls[decl.name] = decl
        return Environment(decls, self.rules, self.instances, self.order + (decl.name,))

    def with_postulate(self, name: str, type: Term) -> "Environment":
        return self.with_declaration(Declaration(name, "postulate", type))

    def with_rule(self, rule) -> "Environment":
        if rule.head not in self.decls:
            from .rewrite import HeadNotDeclared

            raise HeadNotDeclared(f"rule head {rule.head!r} is not declared")
        rules = dict(self.rules)
        rules[rule.head] = self.rules.get(rule.head, ()) + (rule,)
        return Environment(self.decls, rules, self.instances, self.order)

    def with_instance(self, name: str) -> "Environment":
        self.lookup(name)
        if name in self.instances:
            return self
        return Environment(self.decls, self.rules, self.instances + (name,), self.order)

    def serialize(self) -> str:
        """Deterministic text dump, used to compare environments byte for byte."""
        from .pretty import show

        lines = []
        for name in self.order:
            d = self.decls[name]
            lines.append(f"{d.kind} {name} : {show(d.type)}")
            if d.body is not None:
                lines.append(f"  = {show(d.body)}")
            for r in self.rules.get(name, ()):
                lines.append(f"  rule {r}")
        for name in self.instances:
            lines.append(f"instance {name}")
        return "\n".join(lines) + "\n"
