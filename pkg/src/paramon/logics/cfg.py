"""Context-free formulas, stepped by grammar derivatives.

A formula is a set of BNF rules over declared event names (terminals)
and capitalized-or-not nonterminals, e.g.:

    S -> finish | output S

The monitor state is a whole grammar. Taking the derivative by a terminal
produces a grammar for the residual language (new rules D[N], built from
each production's nullable prefixes), which is then compacted: unproductive
and unreachable symbols dropped, identical nonterminals merged, unit start
rules inlined, names renumbered. Compaction keeps the state small and makes
repeated states hit the step memo; nullability is a fixpoint, so
left-recursive grammars work.

Verdicts: Match when the derived grammar's start is nullable (the word so
far is in the language), Violation when the derived language is empty.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Hashable

from .template import (
    MATCH,
    UNDETERMINED,
    VIOLATION,
    SynthesisError,
    UnknownEventError,
)

# a grammar symbol: ("t", event_name) or ("n", nonterminal_id)
Sym = tuple[str, object]
Prod = tuple[Sym, ...]


@dataclass(frozen=True, slots=True)
class Grammar:
    start: int
    rules: tuple[tuple[int, frozenset[Prod]], ...]

    def rule_map(self) -> dict[int, frozenset[Prod]]:
        return dict(self.rules)


EMPTY_GRAMMAR = Grammar(start=0, rules=((0, frozenset()),))


def nullable_set(rules: dict[int, frozenset[Prod]]) -> set[int]:
    nullable: set[int] = set()
    changed = True
    while changed:
        changed = False
        for nt, prods in rules.items():
            if nt in nullable:
                continue
            for prod in prods:
                if all(kind == "n" and val in nullable for kind, val in prod):
                    nullable.add(nt)
                    changed = True
                    break
    return nullable


def productive_set(rules: dict[int, frozenset[Prod]]) -> set[int]:
    productive: set[int] = set()
    changed = True
    while changed:
        changed = False
        for nt, prods in rules.items():
            if nt in productive:
                continue
            for prod in prods:
                if all(kind == "t" or val in productive for kind, val in prod):
                    productive.add(nt)
                    changed = True
                    break
    return productive


def _reachable(start: int, rules: dict[int, frozenset[Prod]]) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        nt = stack.pop()
        for prod in rules.get(nt, frozenset()):
            for kind, val in prod:
                if kind == "n" and val not in seen:
                    seen.add(val)
                    stack.append(val)
    return seen


def _sort_key(prod: Prod) -> tuple:
    return tuple((kind, str(val)) for kind, val in prod)


def compact(start: int, rules: dict[int, frozenset[Prod]]) -> Grammar:
    rules = {nt: frozenset(p for p in prods if p != (("n", nt),)) for nt, prods in rules.items()}

    productive = productive_set(rules)
    if start not in productive:
        return EMPTY_GRAMMAR
    rules = {
        nt: frozenset(
            prod
            for prod in prods
            if all(kind == "t" or val in productive for kind, val in prod)
        )
        for nt, prods in rules.items()
        if nt in productive
    }

    # merge nonterminals with identical production sets until stable
    while True:
        groups: dict[frozenset[Prod], int] = {}
        rename: dict[int, int] = {}
        for nt in sorted(rules):
            sig = rules[nt]
            if sig in groups:
                rename[nt] = groups[sig]
            else:
                groups[sig] = nt
        if not rename:
            break
        def sub(prod: Prod) -> Prod:
            return tuple((k, rename.get(v, v)) if k == "n" else (k, v) for k, v in prod)
        start = rename.get(start, start)
        rules = {
            nt: frozenset(sub(p) for p in prods)
            for nt, prods in rules.items()
            if nt not in rename
        }

    # start that is a bare unit rule for another symbol
    while True:
        prods = rules[start]
        if len(prods) == 1:
            (only,) = prods
            if len(only) == 1 and only[0][0] == "n" and only[0][1] != start:
                referenced = any(
                    ("n", start) in prod
                    for nt, ps in rules.items()
                    for prod in ps
                )
                if not referenced:
                    old = start
                    start = only[0][1]
                    del rules[old]
                    continue
        break

    reach = _reachable(start, rules)
    rules = {nt: prods for nt, prods in rules.items() if nt in reach}

    # canonical renumber: breadth-first from start, productions in sorted order
    order: list[int] = [start]
    number: dict[int, int] = {start: 0}
    i = 0
    while i < len(order):
        nt = order[i]
        i += 1
        for prod in sorted(rules[nt], key=_sort_key):
            for kind, val in prod:
                if kind == "n" and val not in number:
                    number[val] = len(order)
                    order.append(val)

    def renum(prod: Prod) -> Prod:
        return tuple((k, number[v]) if k == "n" else (k, v) for k, v in prod)

    new_rules = tuple(
        (number[nt], frozenset(renum(p) for p in rules[nt])) for nt in order
    )
    return Grammar(start=0, rules=tuple(sorted(new_rules)))


def derive_grammar(g: Grammar, term: str) -> Grammar:
    if g == EMPTY_GRAMMAR:
        return EMPTY_GRAMMAR
    rules = g.rule_map()
    nullable = nullable_set(rules)
    offset = max(rules) + 1

    new_rules: dict[int, frozenset[Prod]] = {nt: prods for nt, prods in rules.items()}
    for nt, prods in rules.items():
        derived: set[Prod] = set()
        for prod in prods:
            for i, (kind, val) in enumerate(prod):
                if kind == "t":
                    if val == term:
                        derived.add(tuple(prod[i + 1 :]))
                    break
                derived.add((("n", val + offset),) + tuple(prod[i + 1 :]))
                if val not in nullable:
                    break
        new_rules[nt + offset] = frozenset(derived)
    return compact(g.start + offset, new_rules)


_CFG_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|->|\|)")


def parse_cfg(formula: str, events: frozenset[str]) -> Grammar:
    lines = [piece for chunk in formula.splitlines() for piece in chunk.split(";")]
    raw_rules: list[tuple[str, list[list[str]]]] = []
    for line in lines:
        if not line.strip():
            continue
        pos = 0
        tokens: list[str] = []
        while pos < len(line):
            m = _CFG_TOKEN.match(line, pos)
            if not m:
                rest = line[pos:].strip()
                if not rest:
                    break
                raise SynthesisError(f"bad cfg syntax near {rest[:20]!r}")
            tokens.append(m.group(1))
            pos = m.end()
        if len(tokens) < 2 or tokens[1] != "->":
            raise SynthesisError(f"cfg rule needs 'Name -> ...': {line.strip()!r}")
        lhs = tokens[0]
        if lhs in events:
            raise SynthesisError(f"cannot give rules to terminal {lhs!r}")
        alts: list[list[str]] = [[]]
        for tok in tokens[2:]:
            if tok == "|":
                alts.append([])
            else:
                alts[-1].append(tok)
        raw_rules.append((lhs, alts))

    if not raw_rules:
        raise SynthesisError("cfg formula declares no rules")

    names: dict[str, int] = {}
    for lhs, _ in raw_rules:
        if lhs not in names:
            names[lhs] = len(names)

    rules: dict[int, set[Prod]] = {i: set() for i in names.values()}
    for lhs, alts in raw_rules:
        for symbols in alts:
            prod: list[Sym] = []
            for sym in symbols:
                if sym in ("eps", "epsilon"):
                    continue
                if sym in events:
                    prod.append(("t", sym))
                elif sym in names:
                    prod.append(("n", names[sym]))
                else:
                    raise SynthesisError(
                        f"symbol {sym!r} is neither a declared event nor a defined nonterminal"
                    )
            rules[names[lhs]].add(tuple(prod))

    start = names[raw_rules[0][0]]
    return compact(start, {nt: frozenset(ps) for nt, ps in rules.items()})


class DerivativeTemplate:
    """Grammar-backed monitor: same stepping surface as MonitorTemplate,
    but states are grammars produced on demand and memoized."""

    formalism = "cfg"

    def __init__(self, grammar: Grammar, events: frozenset[str]):
        self.alphabet = events
        self.root = grammar
        self._memo: dict[tuple[Grammar, str], Grammar] = {}
        self._categories: dict[Grammar, str] = {}

    def initial(self) -> Grammar:
        return self.root

    def step(self, state: Grammar, event: str) -> tuple[Grammar, str]:
        if event not in self.alphabet:
            raise UnknownEventError(f"event {event!r} not in alphabet")
        key = (state, event)
        nxt = self._memo.get(key)
        if nxt is None:
            nxt = derive_grammar(state, event)
            self._memo[key] = nxt
        return nxt, self.category(nxt)

    def category(self, state: Grammar) -> str:
        cat = self._categories.get(state)
        if cat is None:
            if state == EMPTY_GRAMMAR:
                cat = VIOLATION
            elif state.start in nullable_set(state.rule_map()):
                cat = MATCH
            else:
                cat = UNDETERMINED
            self._categories[state] = cat
        return cat

    def categories(self) -> frozenset[str]:
        return frozenset([MATCH, VIOLATION, UNDETERMINED])

    def sorted_events(self) -> tuple[str, ...]:
        return tuple(sorted(self.alphabet))


def compile_cfg(formula: str, events: frozenset[str]) -> DerivativeTemplate:
    if not events:
        raise SynthesisError("cfg needs a nonempty event alphabet")
    grammar = parse_cfg(formula, events)
    return DerivativeTemplate(grammar, frozenset(events))


def terminals_of(g: Grammar) -> set[str]:
    return {
        val
        for _, prods in g.rules
        for prod in prods
        for kind, val in prod
        if kind == "t"
    }


def render_grammar(g: Grammar) -> str:
    """Stable one-line rendering, N0 as start."""
    if g == EMPTY_GRAMMAR and not any(p for _, p in g.rules):
        return "<empty>"
    parts = []
    for nt, prods in g.rules:
        alts = []
        for prod in sorted(prods, key=_sort_key):
            if not prod:
                alts.append("eps")
            else:
                alts.append(" ".join(val if kind == "t" else f"N{val}" for kind, val in prod))
        parts.append(f"N{nt} -> " + " | ".join(alts))
    return " ; ".join(parts)
