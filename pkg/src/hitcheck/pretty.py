"""Render core terms using their name hints."""

from __future__ import annotations

from typing import Sequence

from .terms import App, Const, Lam, Meta, Pair, Pi, Proj1, Proj2, Sigma, Sort, Term, Var, free_vars, unapply

# binding strength: 0 binders/arrows, 1 products, 2 equality, 3 application, 4 atoms
_ARROW, _PROD, _EQ, _APP, _ATOM = range(5)


def _fresh(name: str, names: Sequence[str]) -> str:
    if name in ("", "_"):
        name = "x"
    base, n = name, 0
    while name in names:
        n += 1
        name = f"{base}{n}"
    return name


def show(t: Term, names: Sequence[str] = (), implicits: bool = True) -> str:
    """Print ``t`` in context ``names`` (outermost first).

    With ``implicits=False`` implicit applications and implicit lambdas
    are hidden, which is how coherence witnesses are displayed.
    """
    return _show(t, list(names), implicits, _ARROW)


def _paren(s: str, need: bool) -> str:
    return f"({s})" if need else s


def _show(t: Term, names: list[str], imp: bool, prec: int) -> str:
    match t:
        case Var(i):
            if i < len(names):
                return names[len(names) - 1 - i]
            return f"#{i}"
        case Const(c):
            return c
        case Meta(m):
            return f"?{m}"
        case Sort():
            return "Type"
        case Lam(n, implicit, body):
            if implicit and not imp:
                return _show(body, names + [_fresh(n, names)], imp, prec)
            parts = []
            while isinstance(t, Lam):
                if t.implicit and not imp:
                    names = names + [_fresh(t.name, names)]
                    t = t.body
                    continue
                x = _fresh(t.name, names)
                parts.append("{" + x + "}" if t.implicit else x)
                names = names + [x]
                t = t.body
            body_s = _show(t, names, imp, _ARROW)
            if not parts:
                return body_s
            return _paren("\\" + " ".join(parts) + " -> " + body_s, prec > _ARROW)
        case Pi(n, implicit, dom, cod):
            dom_s = _show(dom, names, imp, _ARROW if implicit else _PROD)
            if implicit or 0 in free_vars(cod):
                x = _fresh(n, names)
                binder = ("{%s : %s}" if implicit else "(%s : %s)") % (x, _show(dom, names, imp, _ARROW))
                s = f"{binder} -> {_show(cod, names + [x], imp, _ARROW)}"
            else:
                s = f"{dom_s} -> {_show(cod, names + ['_'], imp, _ARROW)}"
            return _paren(s, prec > _ARROW)
        case Sigma(n, a, b):
            if 0 in free_vars(b):
                x = _fresh(n, names)
                s = f"({x} : {_show(a, names, imp, _ARROW)}) * {_show(b, names + [x], imp, _PROD)}"
            else:
                s = f"{_show(a, names, imp, _EQ)} * {_show(b, names + ['_'], imp, _PROD)}"
            return _paren(s, prec > _PROD)
        case Pair(a, b):
            return f"({_show(a, names, imp, _ARROW)} , {_show(b, names, imp, _ARROW)})"
        case Proj1(p):
            return _paren("fst " + _show(p, names, imp, _ATOM), prec > _APP)
        case Proj2(p):
            return _paren("snd " + _show(p, names, imp, _ATOM), prec > _APP)
        case App():
            head, args = unapply(t)
            explicit = [(a, i) for a, i in args if imp or not i]
            if head == Const("Id") and len(args) == 3 and args[0][1] and not args[1][1] and not args[2][1]:
                s = f"{_show(args[1][0], names, imp, _APP)} == {_show(args[2][0], names, imp, _APP)}"
                return _paren(s, prec > _EQ)
            if not explicit:
                return _show(head, names, imp, prec)
            parts = [_show(head, names, imp, _APP)]
            for a, i in explicit:
                if i:
                    parts.append("{" + _show(a, names, imp, _ARROW) + "}")
                else:
                    parts.append(_show(a, names, imp, _ATOM))
            return _paren(" ".join(parts), prec > _APP)
    raise TypeError(f"not a term: {t!r}")
