"""Finite-state-machine formulas.

Textual syntax, one block per state plus aliases naming verdict categories:

    s0 [use -> s1, check -> s2]
    s2 [use -> s3, check -> s2]
    s3 [use -> s3]
    alias Violation = s3

The first block's state is initial. A state that only ever appears as an
edge target self-loops on every event. Inside a block, events without an
edge fall to the implicit sink ($sink, Undetermined) unless a `default`
edge says otherwise. Unaliased states are Undetermined.
"""

from __future__ import annotations

import re
from .template import SINK, UNDETERMINED, MonitorTemplate, SynthesisError

_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|->|\[|\]|,|=)")


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            rest = text[pos:].strip()
            if not rest:
                break
            raise SynthesisError(f"bad fsm syntax near {rest[:20]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def parse_fsm(formula: str, events: frozenset[str]) -> MonitorTemplate:
    tokens = _tokenize(formula)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise SynthesisError("unexpected end of fsm formula")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise SynthesisError(f"expected {expected!r}, found {tok!r}")
        pos += 1
        return tok

    blocks: dict[str, list[tuple[str, str]]] = {}
    aliases: dict[str, str] = {}
    block_order: list[str] = []
    targets: list[str] = []

    while peek() is not None:
        if peek() == "alias":
            take()
            category = take()
            take("=")
            states = [take()]
            while peek() == ",":
                take()
                states.append(take())
            for s in states:
                if s in aliases and aliases[s] != category:
                    raise SynthesisError(f"state {s} aliased twice")
                aliases[s] = category
        else:
            state = take()
            if state in blocks:
                raise SynthesisError(f"duplicate block for state {state}")
            take("[")
            edges: list[tuple[str, str]] = []
            if peek() != "]":
                while True:
                    label = take()
                    take("->")
                    target = take()
                    edges.append((label, target))
                    targets.append(target)
                    if peek() == ",":
                        take()
                        continue
                    break
            take("]")
            blocks[state] = edges
            block_order.append(state)

    if not block_order:
        raise SynthesisError("fsm formula declares no states")

    declared = list(block_order)
    for t in targets:
        if t not in blocks and t not in declared:
            declared.append(t)

    for state, edges in blocks.items():
        seen: set[str] = set()
        for label, target in edges:
            if label != "default" and label not in events:
                raise SynthesisError(f"edge label {label!r} in state {state} is not a declared event")
            if label in seen:
                raise SynthesisError(f"state {state} has two edges for {label!r}")
            seen.add(label)
    for s, category in aliases.items():
        if s not in declared:
            raise SynthesisError(f"alias target {s} is not a state")

    ordered_events = tuple(sorted(events))
    transitions: dict[tuple[str, str], str] = {}
    uses_sink = False
    for state in declared:
        edges = blocks.get(state)
        if edges is None:
            # target-only state: stays put whatever happens
            for ev in ordered_events:
                transitions[(state, ev)] = state
            continue
        edge_map = dict(edges)
        default = edge_map.pop("default", None)
        for ev in ordered_events:
            if ev in edge_map:
                transitions[(state, ev)] = edge_map[ev]
            elif default is not None:
                transitions[(state, ev)] = default
            else:
                transitions[(state, ev)] = SINK
                uses_sink = True

    states = tuple(declared) + ((SINK,) if uses_sink else ())
    if uses_sink:
        for ev in ordered_events:
            transitions[(SINK, ev)] = SINK

    verdicts = {s: aliases.get(s, UNDETERMINED) for s in states}
    return MonitorTemplate(
        states=states,
        alphabet=frozenset(events),
        initial_state=block_order[0],
        transitions=transitions,
        verdicts=verdicts,
        formalism="fsm",
        event_order=ordered_events,
    )
