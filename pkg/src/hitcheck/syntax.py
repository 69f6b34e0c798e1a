"""Concrete syntax of ``.hit`` files: tokenizer, parser and printer."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

KEYWORDS = frozenset(
    {"postulate", "def", "where", "rewrite", "instance", "coh", "import", "mutual", "end", "Type", "fst", "snd"}
)
SYMBOLS = frozenset({":", "=", "->", "→", "==", "|", "*", "_"})
DECL_KEYWORDS = frozenset({"postulate", "def", "rewrite", "instance", "coh", "import", "mutual", "end"})
_SPECIAL = "(){},\\λ"
_TOKEN = re.compile(r"\s+|--[^\n]*|[(){},\\λ]|[^\s(){},\\λ]+")


# ---------------------------------------------------------------- surface terms


@dataclass(frozen=True)
class SVar:
    name: str
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SType:
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SHole:
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SApp:
    fn: "STerm"
    arg: "STerm"
    implicit: bool = False
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SLam:
    name: str
    implicit: bool
    body: "STerm"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SPi:
    name: Optional[str]  # None for a plain arrow
    implicit: bool
    domain: "STerm"
    codomain: "STerm"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SSigma:
    name: Optional[str]
    first: "STerm"
    second: "STerm"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SPair:
    first: "STerm"
    second: "STerm"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SFst:
    of: "STerm"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SSnd:
    of: "STerm"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SEq:
    lhs: "STerm"
    rhs: "STerm"
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


STerm = Union[SVar, SType, SHole, SApp, SLam, SPi, SSigma, SPair, SFst, SSnd, SEq]


# ---------------------------------------------------------------- declarations


@dataclass(frozen=True)
class Clause:
    lhs: STerm
    rhs: STerm


@dataclass(frozen=True)
class Postulate:
    name: str
    type: STerm
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Def:
    name: str
    type: STerm
    body: Optional[STerm] = None
    clauses: tuple[Clause, ...] = ()
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RewritePragma:
    name: str
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Instance:
    name: str
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CohDecl:
    name: str
    type: STerm
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Import:
    module: str
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Mutual:
    decls: tuple["Decl", ...]
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


Decl = Union[Postulate, Def, RewritePragma, Instance, CohDecl, Import, Mutual]


@dataclass(frozen=True)
class SourceFile:
    path: str
    decls: tuple[Decl, ...]


def decl_names(decl: Decl) -> list[str]:
    match decl:
        case Mutual(ds):
            return [n for d in ds for n in decl_names(d)]
        case Postulate(n) | Def(n) | CohDecl(n):
            return [n]
        case RewritePragma(n):
            return [f"rewrite {n}"]
        case Instance(n):
            return [f"instance {n}"]
        case Import(m):
            return [f"import {m}"]
    return []


# ---------------------------------------------------------------- tokens


class ParseError(Exception):
    def __init__(self, line: int, col: int, expected: set[str], found: str):
        self.line = line
        self.col = col
        self.expected = frozenset(expected)
        self.found = found
        exp = ", ".join(sorted(expected))
        super().__init__(f"{line}:{col}: expected {exp}, found {found!r}")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "sym", "kw", "eof"
    text: str
    line: int
    col: int
    offset: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        s = m.group()
        start = m.start()
        if s[0].isspace() or s.startswith("--"):
            nl = s.count("\n")
            if nl:
                line += nl
                line_start = start + s.rindex("\n") + 1
            continue
        col = start - line_start + 1
        if s in _SPECIAL or s in SYMBOLS:
            kind = "sym"
        elif s in KEYWORDS:
            kind = "kw"
        else:
            kind = "ident"
        tokens.append(Token(kind, s, line, col, start))
    eof_col = len(text) - line_start + 1
    tokens.append(Token("eof", "", line, eof_col, len(text)))
    return tokens


def is_identifier(s: str) -> bool:
    return bool(s) and s not in KEYWORDS and s not in SYMBOLS and not s.startswith("--") and not any(
        c.isspace() or c in _SPECIAL for c in s
    )


# ---------------------------------------------------------------- parser


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, expected: set[str], tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(tok.line, tok.col, expected, tok.text or "end of input")

    def at(self, text: str) -> bool:
        return self.tok.kind in ("sym", "kw") and self.tok.text == text

    def eat(self, text: str) -> Token:
        if not self.at(text):
            raise self.error({text})
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error({"identifier"})
        t = self.tok
        self.i += 1
        return t

    # -- declarations

    def file(self) -> list[Decl]:
        decls = []
        while self.tok.kind != "eof":
            decls.append(self.decl())
        return decls

    def decl(self) -> Decl:
        t = self.tok
        pos = (t.line, t.col)
        if self.at("postulate"):
            self.i += 1
            name = self.ident().text
            colon = self.eat(":")
            return Postulate(name, self.term_after(colon), pos)
        if self.at("coh"):
            self.i += 1
            name = self.ident().text
            colon = self.eat(":")
            return CohDecl(name, self.term_after(colon), pos)
        if self.at("def"):
            self.i += 1
            name = self.ident().text
            colon = self.eat(":")
            ty = self.term_after(colon)
            if self.at("="):
                self.i += 1
                return Def(name, ty, self.term(), (), pos)
            if self.at("where"):
                self.i += 1
                clauses = []
                while self.at("|"):
                    self.i += 1
                    lhs = self.eq()
                    self.eat("=")
                    clauses.append(Clause(lhs, self.term()))
                if not clauses:
                    raise self.error({"|"})
                return Def(name, ty, None, tuple(clauses), pos)
            raise self.error({"=", "where"})
        if self.at("rewrite"):
            self.i += 1
            return RewritePragma(self.ident().text, pos)
        if self.at("instance"):
            self.i += 1
            return Instance(self.ident().text, pos)
        if self.at("import"):
            self.i += 1
            return Import(self.ident().text, pos)
        if self.at("mutual"):
            self.i += 1
            inner = []
            while not self.at("end"):
                if self.tok.kind == "eof" or self.at("mutual"):
                    raise self.error({"end", "def", "postulate"})
                inner.append(self.decl())
            self.i += 1
            return Mutual(tuple(inner), pos)
        raise self.error({"postulate", "def", "rewrite", "instance", "coh", "import", "mutual"})

    # -- terms

    def starts_atom(self) -> bool:
        t = self.tok
        return t.kind == "ident" or (t.kind == "sym" and t.text in ("(", "_")) or (t.kind == "kw" and t.text == "Type")

    def starts_term(self) -> bool:
        t = self.tok
        return self.starts_atom() or (t.kind == "sym" and t.text in ("\\", "λ", "{")) or (
            t.kind == "kw" and t.text in ("fst", "snd")
        )

    def term_after(self, colon: Token) -> STerm:
        if not self.starts_term():
            raise ParseError(colon.line, colon.col, {"term after ':'"}, self.tok.text or "end of input")
        return self.term()

    def term(self) -> STerm:
        if self.at("\\") or self.at("λ"):
            return self.lam()
        return self.arrow()

    def lam(self) -> STerm:
        start = self.tok
        self.i += 1
        binders: list[tuple[str, bool]] = []
        while True:
            if self.at("{"):
                self.i += 1
                names = [self.binder_name()]
                while not self.at("}"):
                    names.append(self.binder_name())
                self.i += 1
                binders.extend((n, True) for n in names)
            elif self.tok.kind == "ident" or self.at("_"):
                binders.append((self.binder_name(), False))
            else:
                break
        if not binders:
            raise self.error({"binder"})
        self.arrow_sym()
        body = self.term()
        for n, imp in reversed(binders):
            body = SLam(n, imp, body, (start.line, start.col))
        return body

    def binder_name(self) -> str:
        if self.at("_"):
            self.i += 1
            return "_"
        return self.ident().text

    def arrow_sym(self) -> None:
        if self.at("->") or self.at("→"):
            self.i += 1
            return
        raise self.error({"->"})

    def at_arrow(self) -> bool:
        return self.at("->") or self.at("→")

    def at_group(self) -> bool:
        """Lookahead for ``(x y : A)`` or ``{x : A}``."""
        if not (self.at("(") or self.at("{")):
            return False
        k = 1
        while True:
            t = self.peek(k)
            if t.kind == "ident" or (t.kind == "sym" and t.text == "_"):
                k += 1
                continue
            return k > 1 and t.kind == "sym" and t.text == ":"

    def groups(self) -> list[tuple[str, bool, STerm, tuple[int, int]]]:
        out = []
        while self.at_group():
            open_tok = self.tok
            implicit = open_tok.text == "{"
            self.i += 1
            names = []
            while not self.at(":"):
                names.append(self.binder_name())
            self.i += 1
            ty = self.term()
            self.eat("}" if implicit else ")")
            out.extend((n, implicit, ty, (open_tok.line, open_tok.col)) for n in names)
        return out

    def arrow(self) -> STerm:
        if self.at_group():
            save = self.i
            gs = self.groups()
            if self.at_arrow():
                self.i += 1
                body = self.term()
                for n, imp, ty, pos in reversed(gs):
                    body = SPi(n, imp, ty, body, pos)
                return body
            if self.at("*") and len(gs) == 1 and not gs[0][1]:
                self.i = save
            else:
                raise self.error({"->", "*"})
        left = self.prod()
        if self.at_arrow():
            self.i += 1
            return SPi(None, False, left, self.term(), left.pos)
        return left

    def prod(self) -> STerm:
        if self.at_group():
            gs = self.groups()
            if len(gs) != 1 or gs[0][1] or not self.at("*"):
                raise self.error({"*"})
            self.i += 1
            n, _, ty, pos = gs[0]
            return SSigma(n, ty, self.prod(), pos)
        left = self.eq()
        if self.at("*"):
            self.i += 1
            return SSigma(None, left, self.prod(), left.pos)
        return left

    def eq(self) -> STerm:
        left = self.app()
        if self.at("=="):
            self.i += 1
            return SEq(left, self.app(), left.pos)
        return left

    def app(self) -> STerm:
        t = self.tok
        pos = (t.line, t.col)
        if self.at("fst") or self.at("snd"):
            self.i += 1
            inner = self.atom()
            head: STerm = SFst(inner, pos) if t.text == "fst" else SSnd(inner, pos)
        else:
            head = self.atom()
        while True:
            if self.starts_atom():
                head = SApp(head, self.atom(), False, pos)
            elif self.at("{") and not self.at_group():
                self.i += 1
                arg = self.term()
                self.eat("}")
                head = SApp(head, arg, True, pos)
            else:
                return head

    def atom(self) -> STerm:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "ident":
            self.i += 1
            return SVar(t.text, pos)
        if self.at("Type"):
            self.i += 1
            return SType(pos)
        if self.at("_"):
            self.i += 1
            return SHole(pos)
        if self.at("("):
            self.i += 1
            inner = self.term()
            if self.at(","):
                self.i += 1
                second = self.term()
                self.eat(")")
                return SPair(inner, second, pos)
            self.eat(")")
            return inner
        raise self.error({"identifier", "Type", "_", "("})


def parse_term(text: str) -> STerm:
    p = Parser(text)
    t = p.term()
    if p.tok.kind != "eof":
        raise p.error({"end of input"})
    return t


def parse_file(text: str, path: str = "<input>") -> SourceFile:
    return SourceFile(path, tuple(Parser(text).file()))


# ---------------------------------------------------------------- printer

_ARROW, _PROD, _EQ, _APP, _ATOM = range(5)


def _wrap(s: str, need: bool) -> str:
    return f"({s})" if need else s


def print_term(t: STerm, prec: int = _ARROW) -> str:
    match t:
        case SVar(n):
            return n
        case SType():
            return "Type"
        case SHole():
            return "_"
        case SLam():
            parts = []
            while isinstance(t, SLam):
                parts.append("{" + t.name + "}" if t.implicit else t.name)
                t = t.body
            return _wrap("\\" + " ".join(parts) + " -> " + print_term(t, _ARROW), prec > _ARROW)
        case SPi(None, _, a, b):
            return _wrap(f"{print_term(a, _PROD)} -> {print_term(b, _ARROW)}", prec > _ARROW)
        case SPi(n, imp, a, b):
            binder = ("{%s : %s}" if imp else "(%s : %s)") % (n, print_term(a, _ARROW))
            return _wrap(f"{binder} -> {print_term(b, _ARROW)}", prec > _ARROW)
        case SSigma(None, a, b):
            return _wrap(f"{print_term(a, _EQ)} * {print_term(b, _PROD)}", prec > _PROD)
        case SSigma(n, a, b):
            return _wrap(f"({n} : {print_term(a, _ARROW)}) * {print_term(b, _PROD)}", prec > _PROD)
        case SEq(a, b):
            return _wrap(f"{print_term(a, _APP)} == {print_term(b, _APP)}", prec > _EQ)
        case SPair(a, b):
            return f"({print_term(a)} , {print_term(b)})"
        case SFst(p):
            return _wrap("fst " + print_term(p, _ATOM), prec > _APP)
        case SSnd(p):
            return _wrap("snd " + print_term(p, _ATOM), prec > _APP)
        case SApp(f, a, imp):
            arg = "{" + print_term(a) + "}" if imp else print_term(a, _ATOM)
            return _wrap(f"{print_term(f, _APP)} {arg}", prec > _APP)
    raise TypeError(f"not a surface term: {t!r}")


def print_decl(d: Decl, indent: str = "") -> str:
    match d:
        case Postulate(n, ty):
            return f"{indent}postulate {n} : {print_term(ty)}"
        case CohDecl(n, ty):
            return f"{indent}coh {n} : {print_term(ty)}"
        case Def(n, ty, body, clauses):
            head = f"{indent}def {n} : {print_term(ty)}"
            if body is not None:
                return f"{head} = {print_term(body)}"
            lines = [head + " where"]
            for c in clauses:
                lines.append(f"{indent}  | {print_term(c.lhs, _EQ)} = {print_term(c.rhs)}")
            return "\n".join(lines)
        case RewritePragma(n):
            return f"{indent}rewrite {n}"
        case Instance(n):
            return f"{indent}instance {n}"
        case Import(m):
            return f"{indent}import {m}"
        case Mutual(ds):
            inner = "\n".join(print_decl(x, indent + "  ") for x in ds)
            return f"{indent}mutual\n{inner}\n{indent}end"
    raise TypeError(f"not a declaration: {d!r}")


def print_file(f: SourceFile) -> str:
    return "\n\n".join(print_decl(d) for d in f.decls) + "\n"
