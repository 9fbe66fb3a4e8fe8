"""Future-time LTL over event names, finite-trace and three-valued.

Formulas: event atoms, true/false, ! & | -> <->, X (next), U (until),
[] (always), <> (eventually). One event is consumed per step by formula
progression; states are progressed formulas kept canonical (negation
normal form, conjunction/disjunction flattened into an antichain DNF over
temporal literals), so the reachable state set is finite.

The finite-trace reading consumes the next event to discharge X: at the
end of a trace [] holds, while atoms, X, U and <> do not. A state is
Match when every extension satisfies it, Violation when none does; both
are computed on the explored graph, where "satisfied with no more events"
is the recursive empty-trace evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from .template import MonitorTemplate, SynthesisError, build_template_from_exploration


class Ltl:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Const(Ltl):
    value: bool


@dataclass(frozen=True, slots=True)
class Atom(Ltl):
    name: str


@dataclass(frozen=True, slots=True)
class NotL(Ltl):
    inner: Ltl


@dataclass(frozen=True, slots=True)
class AndL(Ltl):
    parts: frozenset[Ltl]


@dataclass(frozen=True, slots=True)
class OrL(Ltl):
    parts: frozenset[Ltl]


@dataclass(frozen=True, slots=True)
class Next(Ltl):
    inner: Ltl


@dataclass(frozen=True, slots=True)
class Until(Ltl):
    left: Ltl
    right: Ltl


@dataclass(frozen=True, slots=True)
class Always(Ltl):
    inner: Ltl


@dataclass(frozen=True, slots=True)
class Eventually(Ltl):
    inner: Ltl


TRUE = Const(True)
FALSE = Const(False)


def neg(f: Ltl) -> Ltl:
    """Negation pushed down to literals (temporal nodes and atoms)."""
    match f:
        case Const(v):
            return Const(not v)
        case NotL(inner):
            return inner
        case AndL(parts):
            return lor([neg(p) for p in parts])
        case OrL(parts):
            return land([neg(p) for p in parts])
        case _:
            return NotL(f)


def land(parts: list[Ltl]) -> Ltl:
    flat: set[Ltl] = set()
    for p in parts:
        if p == FALSE:
            return FALSE
        if p == TRUE:
            continue
        if isinstance(p, AndL):
            flat.update(p.parts)
        else:
            flat.add(p)
    for p in flat:
        if neg(p) in flat:
            return FALSE
    if not flat:
        return TRUE
    if len(flat) == 1:
        return next(iter(flat))
    return AndL(frozenset(flat))


def lor(parts: list[Ltl]) -> Ltl:
    flat: set[Ltl] = set()
    for p in parts:
        if p == TRUE:
            return TRUE
        if p == FALSE:
            continue
        if isinstance(p, OrL):
            flat.update(p.parts)
        else:
            flat.add(p)
    for p in flat:
        if neg(p) in flat:
            return TRUE
    if not flat:
        return FALSE
    if len(flat) == 1:
        return next(iter(flat))
    return OrL(frozenset(flat))


def _dnf(f: Ltl) -> frozenset[frozenset[Ltl]]:
    """Set of conjunction clauses over literals; empty clause = true."""
    match f:
        case Const(True):
            return frozenset([frozenset()])
        case Const(False):
            return frozenset()
        case OrL(parts):
            out: set[frozenset[Ltl]] = set()
            for p in parts:
                out |= _dnf(p)
            return frozenset(out)
        case AndL(parts):
            clauses: frozenset[frozenset[Ltl]] = frozenset([frozenset()])
            for p in parts:
                clauses = frozenset(
                    a | b for a in clauses for b in _dnf(p)
                )
            return clauses
        case _:
            return frozenset([frozenset([f])])


def canonical(f: Ltl) -> Ltl:
    """Antichain DNF: drop contradictory and absorbed clauses, rebuild."""
    clauses = set(_dnf(f))
    cleaned: set[frozenset[Ltl]] = set()
    for cl in clauses:
        if any(neg(lit) in cl for lit in cl):
            continue
        cleaned.add(cl)
    minimal = [
        cl for cl in cleaned if not any(other < cl for other in cleaned)
    ]
    return lor([land(list(cl)) for cl in minimal])


@lru_cache(maxsize=None)
def progress(f: Ltl, event: str) -> Ltl:
    """Residual obligation after consuming one event."""
    match f:
        case Const(_):
            return f
        case Atom(name):
            return TRUE if name == event else FALSE
        case NotL(inner):
            return neg(progress(inner, event))
        case AndL(parts):
            return land([progress(p, event) for p in parts])
        case OrL(parts):
            return lor([progress(p, event) for p in parts])
        case Next(inner):
            return inner
        case Until(left, right):
            return lor([progress(right, event), land([progress(left, event), f])])
        case Always(inner):
            return land([progress(inner, event), f])
        case Eventually(inner):
            return lor([progress(inner, event), f])
    raise AssertionError(f"unhandled node {f!r}")


@lru_cache(maxsize=None)
def holds_at_end(f: Ltl) -> bool:
    """Truth of f over the empty remainder of a trace."""
    match f:
        case Const(v):
            return v
        case Atom(_) | Next(_) | Until(_, _) | Eventually(_):
            return False
        case NotL(inner):
            return not holds_at_end(inner)
        case AndL(parts):
            return all(holds_at_end(p) for p in parts)
        case OrL(parts):
            return any(holds_at_end(p) for p in parts)
        case Always(_):
            return True
    raise AssertionError(f"unhandled node {f!r}")


_LTL_TOKEN = re.compile(
    r"\s*([A-Za-z_][A-Za-z0-9_]*|<->|->|=>|\[\]|<>|!|&&|\|\||&|\||\(|\)|U\b|X\b)"
)


def parse_ltl(formula: str, events: frozenset[str]) -> Ltl:
    tokens: list[str] = []
    pos = 0
    while pos < len(formula):
        m = _LTL_TOKEN.match(formula, pos)
        if not m:
            rest = formula[pos:].strip()
            if not rest:
                break
            raise SynthesisError(f"bad ltl syntax near {rest[:20]!r}")
        tokens.append(m.group(1))
        pos = m.end()

    i = 0

    def peek() -> str | None:
        return tokens[i] if i < len(tokens) else None

    def take() -> str:
        nonlocal i
        tok = tokens[i]
        i += 1
        return tok

    def iff() -> Ltl:
        left = implies()
        while peek() == "<->":
            take()
            right = implies()
            left = land([lor([neg(left), right]), lor([neg(right), left])])
        return left

    def implies() -> Ltl:
        left = disj()
        if peek() in ("->", "=>"):
            take()
            right = implies()
            return lor([neg(left), right])
        return left

    def disj() -> Ltl:
        parts = [conj()]
        while peek() in ("|", "||"):
            take()
            parts.append(conj())
        return lor(parts)

    def conj() -> Ltl:
        parts = [until()]
        while peek() in ("&", "&&"):
            take()
            parts.append(until())
        return land(parts)

    def until() -> Ltl:
        left = unary()
        if peek() == "U":
            take()
            right = until()
            return Until(left, right)
        return left

    def unary() -> Ltl:
        tok = peek()
        if tok is None:
            raise SynthesisError("unexpected end of ltl formula")
        if tok == "!":
            take()
            return neg(unary())
        if tok == "X":
            take()
            return Next(unary())
        if tok == "[]":
            take()
            return Always(unary())
        if tok == "<>":
            take()
            return Eventually(unary())
        if tok == "(":
            take()
            node = iff()
            if peek() != ")":
                raise SynthesisError("unbalanced parenthesis")
            take()
            return node
        if tok == "true":
            take()
            return TRUE
        if tok == "false":
            take()
            return FALSE
        if tok in ("U",):
            raise SynthesisError("U needs a left operand")
        take()
        if tok not in events:
            raise SynthesisError(f"atom {tok!r} is not a declared event")
        return Atom(tok)

    node = iff()
    if i != len(tokens):
        raise SynthesisError(f"trailing tokens after formula: {tokens[i:]}")
    return node


def compile_ftltl(formula: str, events: frozenset[str]) -> MonitorTemplate:
    if not events:
        raise SynthesisError("ltl needs a nonempty event alphabet")
    root = canonical(parse_ltl(formula, events))

    def derive(state: Ltl, ev: str) -> Ltl:
        return canonical(progress(state, ev))

    return build_template_from_exploration(
        root,
        sorted(events),
        derive,
        holds_at_end,
        formalism="ftltl",
        match_requires_all=True,
    )
