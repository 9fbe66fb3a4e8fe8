"""Extended regular expressions over event names.

Supported: concatenation (juxtaposition), union `|`, intersection `&`,
complement `~` (prefix), star/plus/optional postfix, `epsilon`, `empty`,
parentheses. Compilation takes symbol derivatives, canonicalizing as it
goes (union and intersection are flattened sets, so the derivative state
space stays finite), then explores the whole deterministic graph over the
declared alphabet.

Verdicts: Match on states whose word is in the language now; Violation on
states from which no extension can ever match.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from .template import MonitorTemplate, SynthesisError, build_template_from_exploration


class Re:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Empty(Re):
    pass


@dataclass(frozen=True, slots=True)
class Eps(Re):
    pass


@dataclass(frozen=True, slots=True)
class Sym(Re):
    name: str


@dataclass(frozen=True, slots=True)
class Cat(Re):
    parts: tuple[Re, ...]


@dataclass(frozen=True, slots=True)
class Alt(Re):
    parts: frozenset[Re]


@dataclass(frozen=True, slots=True)
class Both(Re):
    parts: frozenset[Re]


@dataclass(frozen=True, slots=True)
class Star(Re):
    inner: Re


@dataclass(frozen=True, slots=True)
class Not(Re):
    inner: Re


EMPTY = Empty()
EPS = Eps()
ANY_LANG = Not(EMPTY)  # the universal language


def cat(parts: list[Re]) -> Re:
    flat: list[Re] = []
    for p in parts:
        if isinstance(p, Empty):
            return EMPTY
        if isinstance(p, Eps):
            continue
        if isinstance(p, Cat):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return EPS
    if len(flat) == 1:
        return flat[0]
    return Cat(tuple(flat))


def alt(parts: list[Re]) -> Re:
    flat: set[Re] = set()
    for p in parts:
        if isinstance(p, Alt):
            flat.update(p.parts)
        elif isinstance(p, Empty):
            continue
        else:
            flat.add(p)
    if ANY_LANG in flat:
        return ANY_LANG
    if not flat:
        return EMPTY
    if len(flat) == 1:
        return next(iter(flat))
    return Alt(frozenset(flat))


def both(parts: list[Re]) -> Re:
    flat: set[Re] = set()
    for p in parts:
        if isinstance(p, Both):
            flat.update(p.parts)
        elif p == ANY_LANG:
            continue
        elif isinstance(p, Empty):
            return EMPTY
        else:
            flat.add(p)
    if not flat:
        return ANY_LANG
    if len(flat) == 1:
        return next(iter(flat))
    return Both(frozenset(flat))


def star(inner: Re) -> Re:
    if isinstance(inner, (Eps, Empty)):
        return EPS
    if isinstance(inner, Star):
        return inner
    return Star(inner)


def negate(inner: Re) -> Re:
    if isinstance(inner, Not):
        return inner.inner
    return Not(inner)


@lru_cache(maxsize=None)
def nullable(r: Re) -> bool:
    match r:
        case Empty() | Sym():
            return False
        case Eps() | Star():
            return True
        case Cat(parts):
            return all(nullable(p) for p in parts)
        case Alt(parts):
            return any(nullable(p) for p in parts)
        case Both(parts):
            return all(nullable(p) for p in parts)
        case Not(inner):
            return not nullable(inner)
    raise AssertionError(f"unhandled node {r!r}")


@lru_cache(maxsize=None)
def derivative(r: Re, sym: str) -> Re:
    match r:
        case Empty() | Eps():
            return EMPTY
        case Sym(name):
            return EPS if name == sym else EMPTY
        case Cat(parts):
            head, rest = parts[0], list(parts[1:])
            d = cat([derivative(head, sym), *rest])
            if nullable(head):
                return alt([d, derivative(cat(rest), sym)])
            return d
        case Alt(parts):
            return alt([derivative(p, sym) for p in parts])
        case Both(parts):
            return both([derivative(p, sym) for p in parts])
        case Star(inner):
            return cat([derivative(inner, sym), r])
        case Not(inner):
            return negate(derivative(inner, sym))
    raise AssertionError(f"unhandled node {r!r}")


_ERE_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|\||&|~|\*|\+|\?|\(|\))")


def parse_ere(formula: str, events: frozenset[str]) -> Re:
    tokens: list[str] = []
    pos = 0
    while pos < len(formula):
        m = _ERE_TOKEN.match(formula, pos)
        if not m:
            rest = formula[pos:].strip()
            if not rest:
                break
            raise SynthesisError(f"bad ere syntax near {rest[:20]!r}")
        tokens.append(m.group(1))
        pos = m.end()

    i = 0

    def peek() -> str | None:
        return tokens[i] if i < len(tokens) else None

    def union() -> Re:
        nonlocal i
        parts = [intersection()]
        while peek() == "|":
            i += 1
            parts.append(intersection())
        return alt(parts)

    def intersection() -> Re:
        nonlocal i
        parts = [concat()]
        while peek() == "&":
            i += 1
            parts.append(concat())
        return both(parts)

    def concat() -> Re:
        nonlocal i
        parts = []
        while peek() is not None and (peek() == "(" or peek() == "~" or _is_name(peek())):
            parts.append(unary())
        if not parts:
            raise SynthesisError("expected an expression")
        return cat(parts)

    def unary() -> Re:
        nonlocal i
        node = atom()
        while peek() in ("*", "+", "?"):
            op = tokens[i]
            i += 1
            if op == "*":
                node = star(node)
            elif op == "+":
                node = cat([node, star(node)])
            else:
                node = alt([node, EPS])
        return node

    def atom() -> Re:
        nonlocal i
        tok = peek()
        if tok == "(":
            i += 1
            node = union()
            if peek() != ")":
                raise SynthesisError("unbalanced parenthesis")
            i += 1
            return node
        if tok == "~":
            i += 1
            return negate(unary())
        if tok is None:
            raise SynthesisError("unexpected end of ere formula")
        if not _is_name(tok):
            raise SynthesisError(f"unexpected token {tok!r}")
        i += 1
        if tok == "epsilon":
            return EPS
        if tok == "empty":
            return EMPTY
        if tok not in events:
            raise SynthesisError(f"symbol {tok!r} is not a declared event")
        return Sym(tok)

    def _is_name(tok: str | None) -> bool:
        return tok is not None and tok[0].isalpha() or (tok is not None and tok[0] == "_")

    node = union()
    if i != len(tokens):
        raise SynthesisError(f"trailing tokens after formula: {tokens[i:]}")
    return node


def compile_ere(formula: str, events: frozenset[str]) -> MonitorTemplate:
    if not events:
        raise SynthesisError("ere needs a nonempty event alphabet")
    root = parse_ere(formula, events)
    return build_template_from_exploration(
        root,
        sorted(events),
        derivative,
        nullable,
        formalism="ere",
        match_requires_all=False,
    )
