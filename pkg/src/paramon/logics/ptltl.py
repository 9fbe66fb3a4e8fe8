"""Past-time LTL over event names.

Formulas: event atoms, true/false, ! & | -> <->, previously φ,
historically φ, φ since ψ. The truth of every subformula after a consumed
prefix is a bit, so a monitor state is the vector of those bits; stepping
recomputes the vector from the previous one and the new event, bottom-up.

The top formula is checked at every position: a state where it is false
is a Violation, true is a Match. The pre-event initial state is
Undetermined (nothing has been checked yet).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .template import (
    MATCH,
    UNDETERMINED,
    VIOLATION,
    MonitorTemplate,
    SynthesisError,
)


class Pltl:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Const(Pltl):
    value: bool


@dataclass(frozen=True, slots=True)
class Atom(Pltl):
    name: str


@dataclass(frozen=True, slots=True)
class NotP(Pltl):
    inner: Pltl


@dataclass(frozen=True, slots=True)
class AndP(Pltl):
    left: Pltl
    right: Pltl


@dataclass(frozen=True, slots=True)
class OrP(Pltl):
    left: Pltl
    right: Pltl


@dataclass(frozen=True, slots=True)
class Previously(Pltl):
    inner: Pltl


@dataclass(frozen=True, slots=True)
class Historically(Pltl):
    inner: Pltl


@dataclass(frozen=True, slots=True)
class Since(Pltl):
    left: Pltl
    right: Pltl


_KEYWORDS = ("previously", "historically", "since", "true", "false")

_P_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|<->|->|=>|!|&&|\|\||&|\||\(|\))")


def parse_ptltl(formula: str, events: frozenset[str]) -> Pltl:
    tokens: list[str] = []
    pos = 0
    while pos < len(formula):
        m = _P_TOKEN.match(formula, pos)
        if not m:
            rest = formula[pos:].strip()
            if not rest:
                break
            raise SynthesisError(f"bad ptltl syntax near {rest[:20]!r}")
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

    def iff() -> Pltl:
        left = implies()
        while peek() == "<->":
            take()
            right = implies()
            left = AndP(OrP(NotP(left), right), OrP(NotP(right), left))
        return left

    def implies() -> Pltl:
        left = disj()
        if peek() in ("->", "=>"):
            take()
            return OrP(NotP(left), implies())
        return left

    def disj() -> Pltl:
        node = conj()
        while peek() in ("|", "||"):
            take()
            node = OrP(node, conj())
        return node

    def conj() -> Pltl:
        node = since()
        while peek() in ("&", "&&"):
            take()
            node = AndP(node, since())
        return node

    def since() -> Pltl:
        left = unary()
        if peek() == "since":
            take()
            return Since(left, since())
        return left

    def unary() -> Pltl:
        tok = peek()
        if tok is None:
            raise SynthesisError("unexpected end of ptltl formula")
        if tok == "!":
            take()
            return NotP(unary())
        if tok == "previously":
            take()
            return Previously(unary())
        if tok == "historically":
            take()
            return Historically(unary())
        if tok == "(":
            take()
            node = iff()
            if peek() != ")":
                raise SynthesisError("unbalanced parenthesis")
            take()
            return node
        if tok == "true":
            take()
            return Const(True)
        if tok == "false":
            take()
            return Const(False)
        take()
        if tok in _KEYWORDS:
            raise SynthesisError(f"{tok!r} cannot start an expression here")
        if tok not in events:
            raise SynthesisError(f"atom {tok!r} is not a declared event")
        return Atom(tok)

    node = iff()
    if i != len(tokens):
        raise SynthesisError(f"trailing tokens after formula: {tokens[i:]}")
    return node


def _subformulas(f: Pltl, acc: list[Pltl]) -> None:
    """Postorder listing, children before parents, no duplicates."""
    if f in acc:
        return
    match f:
        case Const(_) | Atom(_):
            pass
        case NotP(inner) | Previously(inner) | Historically(inner):
            _subformulas(inner, acc)
        case AndP(left, right) | OrP(left, right) | Since(left, right):
            _subformulas(left, acc)
            _subformulas(right, acc)
    acc.append(f)


def _eval_now(
    f: Pltl, event: str, now: dict[Pltl, bool], prev: dict[Pltl, bool] | None
) -> bool:
    """Truth at the current position given this event and the previous bits."""
    match f:
        case Const(v):
            return v
        case Atom(name):
            return name == event
        case NotP(inner):
            return not now[inner]
        case AndP(left, right):
            return now[left] and now[right]
        case OrP(left, right):
            return now[left] or now[right]
        case Previously(inner):
            return prev is not None and prev[inner]
        case Historically(inner):
            return now[inner] and (prev is None or prev[f])
        case Since(left, right):
            return now[right] or (
                now[left] and prev is not None and prev[f]
            )
    raise AssertionError(f"unhandled node {f!r}")


_INIT = "init"


def compile_ptltl(formula: str, events: frozenset[str]) -> MonitorTemplate:
    if not events:
        raise SynthesisError("ptltl needs a nonempty event alphabet")
    root = parse_ptltl(formula, events)
    subs: list[Pltl] = []
    _subformulas(root, subs)
    ordered_events = tuple(sorted(events))

    def advance(bits: tuple[bool, ...] | None, event: str) -> tuple[bool, ...]:
        prev = dict(zip(subs, bits)) if bits is not None else None
        now: dict[Pltl, bool] = {}
        for f in subs:
            now[f] = _eval_now(f, event, now, prev)
        return tuple(now[f] for f in subs)

    # lazy exploration from the pre-event state
    states: list[tuple[bool, ...] | str] = [_INIT]
    index: dict[object, int] = {_INIT: 0}
    transitions: dict[tuple[str, str], str] = {}
    verdicts: dict[str, str] = {}

    def name_of(s: object) -> str:
        return f"q{index[s]}"

    i = 0
    while i < len(states):
        state = states[i]
        i += 1
        bits = None if state == _INIT else state
        for ev in ordered_events:
            nxt = advance(bits, ev)
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
            transitions[(name_of(state), ev)] = name_of(nxt)

    top = len(subs) - 1
    for s in states:
        if s == _INIT:
            verdicts[name_of(s)] = UNDETERMINED
        else:
            verdicts[name_of(s)] = MATCH if s[top] else VIOLATION

    return MonitorTemplate(
        states=tuple(name_of(s) for s in states),
        alphabet=frozenset(events),
        initial_state=name_of(_INIT),
        transitions=transitions,
        verdicts=verdicts,
        formalism="ptltl",
        event_order=ordered_events,
    )
