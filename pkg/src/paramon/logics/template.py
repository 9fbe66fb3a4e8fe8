"""Monitor templates: the finite-state skeleton every formalism compiles to.

A template is a deterministic, total transition structure over the spec's
event alphabet plus a verdict category per state. Grammar-backed monitors
(context-free formulas) cannot pre-enumerate their states, so both shapes
implement the same two-method protocol: initial state and step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Protocol

MATCH = "Match"
VIOLATION = "Violation"
UNDETERMINED = "Undetermined"

SINK = "$sink"


class SynthesisError(Exception):
    """A formula failed to compile: syntax, unknown events, bad references."""


class UnknownEventError(Exception):
    """step() was handed an event outside the template's alphabet."""


class Stepper(Protocol):
    """What the engine needs from any compiled formula."""

    alphabet: frozenset[str]

    def initial(self) -> Hashable: ...

    def step(self, state: Hashable, event: str) -> tuple[Hashable, str]: ...

    def category(self, state: Hashable) -> str: ...


@dataclass(frozen=True)
class MonitorTemplate:
    """Explicit finite-state monitor.

    transitions is total: every (state, event) pair has a target. verdicts
    is total over states. States are kept in a stable listing order so
    dumps and tests are deterministic.
    """

    states: tuple[str, ...]
    alphabet: frozenset[str]
    initial_state: str
    transitions: dict[tuple[str, str], str]
    verdicts: dict[str, str]
    formalism: str = "fsm"
    event_order: tuple[str, ...] = field(default=())

    def initial(self) -> str:
        return self.initial_state

    def step(self, state: str, event: str) -> tuple[str, str]:
        if event not in self.alphabet:
            raise UnknownEventError(f"event {event!r} not in alphabet")
        nxt = self.transitions[(state, event)]
        return nxt, self.verdicts[nxt]

    def category(self, state: str) -> str:
        return self.verdicts[state]

    def categories(self) -> frozenset[str]:
        return frozenset(self.verdicts.values())

    def sorted_events(self) -> tuple[str, ...]:
        return self.event_order if self.event_order else tuple(sorted(self.alphabet))


def restrict_categories(template: MonitorTemplate, handled: frozenset[str]) -> MonitorTemplate:
    """Erase categories without a handler to Undetermined.

    The engine only ever reports handled categories; after restriction the
    verdict range is exactly handled ∪ {Undetermined}, which keeps dumps,
    GC goals and reports consistent.
    """
    verdicts = {
        s: (c if c in handled else UNDETERMINED) for s, c in template.verdicts.items()
    }
    return MonitorTemplate(
        states=template.states,
        alphabet=template.alphabet,
        initial_state=template.initial_state,
        transitions=dict(template.transitions),
        verdicts=verdicts,
        formalism=template.formalism,
        event_order=template.event_order,
    )


def assign_graph_verdicts(
    states: list[Hashable],
    transitions: dict[tuple[Hashable, str], Hashable],
    accepting: set[Hashable],
    *,
    match_requires_all: bool,
) -> dict[Hashable, str]:
    """Verdicts from reachability to accepting states.

    Violation: no accepting state reachable (no extension can ever accept).
    Match: either membership now (match_requires_all=False, the regular-
    language reading) or every reachable state accepting (True, the
    temporal-logic reading where Match must persist).
    """
    # reverse reachability from accepting states
    rev: dict[Hashable, set[Hashable]] = {s: set() for s in states}
    out: dict[Hashable, set[Hashable]] = {s: set() for s in states}
    for (src, _), dst in transitions.items():
        rev[dst].add(src)
        out[src].add(dst)
    can_accept: set[Hashable] = set()
    stack = [s for s in states if s in accepting]
    while stack:
        s = stack.pop()
        if s in can_accept:
            continue
        can_accept.add(s)
        stack.extend(rev[s])

    verdicts: dict[Hashable, str] = {}
    if match_requires_all:
        # states from which some non-accepting state is reachable
        can_miss: set[Hashable] = set()
        stack = [s for s in states if s not in accepting]
        while stack:
            s = stack.pop()
            if s in can_miss:
                continue
            can_miss.add(s)
            stack.extend(rev[s])
        for s in states:
            if s not in can_accept:
                verdicts[s] = VIOLATION
            elif s not in can_miss:
                verdicts[s] = MATCH
            else:
                verdicts[s] = UNDETERMINED
    else:
        for s in states:
            if s in accepting:
                verdicts[s] = MATCH
            elif s not in can_accept:
                verdicts[s] = VIOLATION
            else:
                verdicts[s] = UNDETERMINED
    return verdicts


def build_template_from_exploration(
    initial: Hashable,
    alphabet: list[str],
    derive: "callable",
    accepting: "callable",
    *,
    formalism: str,
    match_requires_all: bool,
    state_limit: int = 20000,
) -> MonitorTemplate:
    """BFS the derivative/progression graph into an explicit template.

    States are named q0, q1, ... in discovery order (alphabet iterated in
    sorted order) so equal formulas always yield byte-equal dumps.
    """
    events = sorted(alphabet)
    order: list[Hashable] = [initial]
    index: dict[Hashable, int] = {initial: 0}
    transitions: dict[tuple[Hashable, str], Hashable] = {}
    i = 0
    while i < len(order):
        state = order[i]
        i += 1
        for ev in events:
            nxt = derive(state, ev)
            if nxt not in index:
                if len(order) >= state_limit:
                    raise SynthesisError(
                        f"state space exceeded {state_limit} states; formula too large"
                    )
                index[nxt] = len(order)
                order.append(nxt)
            transitions[(state, ev)] = nxt

    acc = {s for s in order if accepting(s)}
    verdicts = assign_graph_verdicts(order, transitions, acc, match_requires_all=match_requires_all)

    names = {s: f"q{index[s]}" for s in order}
    return MonitorTemplate(
        states=tuple(names[s] for s in order),
        alphabet=frozenset(events),
        initial_state=names[initial],
        transitions={(names[s], ev): names[t] for (s, ev), t in transitions.items()},
        verdicts={names[s]: v for s, v in verdicts.items()},
        formalism=formalism,
        event_order=tuple(events),
    )
