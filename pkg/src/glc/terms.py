"""Untyped lambda terms: parsing, alpha-equality and normal-order reduction.

This is the term-level oracle the graph side is checked against. Syntax:
variables are identifiers, ``\\x.M`` or ``λx.M`` binds (body extends as far
right as possible), application is left-associative, parentheses group.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    binder: str
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


Term = Var | Lam | App


class TermSyntaxError(Exception):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class Timeout:
    """Sentinel for fuel exhaustion."""

    def __repr__(self):
        return "Timeout"


TIMEOUT = Timeout()


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def parse(text: str) -> Term:
    pos = 0
    n = len(text)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def parse_ident() -> str:
        nonlocal pos
        start = pos
        if pos >= n or not (text[pos].isalpha() or text[pos] == "_"):
            raise TermSyntaxError("expected identifier", pos)
        while pos < n and _is_ident_char(text[pos]):
            pos += 1
        return text[start:pos]

    def parse_atom() -> Term | None:
        nonlocal pos
        skip_ws()
        if pos >= n:
            return None
        c = text[pos]
        if c == "(":
            open_at = pos
            pos += 1
            t = parse_term()
            skip_ws()
            if pos >= n or text[pos] != ")":
                raise TermSyntaxError("unclosed parenthesis", open_at)
            pos += 1
            return t
        if c in ("\\", "λ"):
            pos += 1
            skip_ws()
            binders = [parse_ident()]
            skip_ws()
            while pos < n and (text[pos].isalpha() or text[pos] == "_"):
                binders.append(parse_ident())
                skip_ws()
            if pos >= n or text[pos] != ".":
                raise TermSyntaxError("expected '.' after binder", pos)
            pos += 1
            body = parse_term()
            for b in reversed(binders):
                body = Lam(b, body)
            return body
        if c.isalpha() or c == "_":
            return Var(parse_ident())
        return None

    def parse_term() -> Term:
        nonlocal pos
        t = parse_atom()
        if t is None:
            raise TermSyntaxError("expected a term", pos)
        while True:
            save = pos
            nxt = parse_atom()
            if nxt is None:
                pos = save
                return t
            t = App(t, nxt)

    result = parse_term()
    skip_ws()
    if pos != n:
        raise TermSyntaxError("trailing input", pos)
    return result


def show(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lam):
        return f"\\{t.binder}.{show(t.body)}"
    fun = show(t.fun)
    if isinstance(t.fun, Lam):
        fun = f"({fun})"
    arg = show(t.arg)
    if isinstance(t.arg, (Lam, App)):
        arg = f"({arg})"
    return f"{fun} {arg}"


def free_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.binder}
    return free_vars(t.fun) | free_vars(t.arg)


def size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    if isinstance(t, Lam):
        return 1 + size(t.body)
    return 1 + size(t.fun) + size(t.arg)


def _debruijn(t: Term, env: tuple[str, ...]) -> tuple:
    """Bound variables as indices, free ones by name."""
    if isinstance(t, Var):
        if t.name in env:
            return ("b", env.index(t.name))
        return ("f", t.name)
    if isinstance(t, Lam):
        return ("l", _debruijn(t.body, (t.binder,) + env))
    return ("a", _debruijn(t.fun, env), _debruijn(t.arg, env))


def alpha_equal(t1: Term, t2: Term) -> bool:
    return _debruijn(t1, ()) == _debruijn(t2, ())


_FRESH = 0


def _fresh_name(base: str, avoid: set[str]) -> str:
    global _FRESH
    while True:
        _FRESH += 1
        cand = f"{base}_{_FRESH}"
        if cand not in avoid:
            return cand


def substitute(t: Term, name: str, value: Term) -> Term:
    """Capture-avoiding t[name := value]."""
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, App):
        return App(substitute(t.fun, name, value), substitute(t.arg, name, value))
    if t.binder == name:
        return t
    if t.binder in free_vars(value) and name in free_vars(t.body):
        fresh = _fresh_name(t.binder, free_vars(t.body) | free_vars(value) | {name})
        body = substitute(t.body, t.binder, Var(fresh))
        return Lam(fresh, substitute(body, name, value))
    return Lam(t.binder, substitute(t.body, name, value))


def _step_normal(t: Term) -> Term | None:
    """One leftmost-outermost beta step, or None at normal form."""
    if isinstance(t, App):
        if isinstance(t.fun, Lam):
            return substitute(t.fun.body, t.fun.binder, t.arg)
        fun = _step_normal(t.fun)
        if fun is not None:
            return App(fun, t.arg)
        arg = _step_normal(t.arg)
        if arg is not None:
            return App(t.fun, arg)
        return None
    if isinstance(t, Lam):
        body = _step_normal(t.body)
        return None if body is None else Lam(t.binder, body)
    return None


def term_normalize(t: Term, strategy: str = "normal", fuel: int = 100) -> Term | Timeout:
    """Normal-order reduction; Timeout once ``fuel`` beta steps are spent."""
    if strategy != "normal":
        raise ValueError(f"unknown strategy {strategy!r}")
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    for _ in range(fuel):
        nxt = _step_normal(t)
        if nxt is None:
            return t
        t = nxt
    return TIMEOUT if _step_normal(t) is not None else t
