"""Static analyses over compiled monitor templates.

Enable sets answer "which parameter domains can usefully exist before
event e occurs" and gate monitor creation in the most frugal engine
variant. Coenable sets answer "which parameter unions could still drive
this state into a handled category" and justify collecting monitors
whose remaining futures all need an object that is already dead.

Both analyses need the finite transition graph, so they reject the
grammar-backed templates; those get a separate, coarser enable-set
computation from the grammar's precede relation.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .logics import MonitorTemplate, UNDETERMINED
from .logics.cfg import Grammar, productive_set

ParamSet = frozenset[str]
ParamSetFamily = frozenset[ParamSet]


class AnalysisError(Exception):
    pass


def _event_param_table(
    alphabet: Iterable[str], event_params: Mapping[str, Iterable[str]]
) -> dict[str, ParamSet]:
    table: dict[str, ParamSet] = {}
    for event in alphabet:
        if event not in event_params:
            raise AnalysisError(f"no parameter list for event {event!r}")
        table[event] = frozenset(event_params[event])
    return table


def _goal_states(template: MonitorTemplate) -> frozenset[str]:
    return frozenset(
        s for s in template.states if template.category(s) != UNDETERMINED
    )


def _states_reaching(template: MonitorTemplate, targets: frozenset[str]) -> frozenset[str]:
    """Targets plus every state with a path into them."""
    incoming: dict[str, set[str]] = {s: set() for s in template.states}
    for (src, _event), dst in template.transitions.items():
        incoming[dst].add(src)
    reached = set(targets)
    frontier = list(targets)
    while frontier:
        node = frontier.pop()
        for prev in incoming[node]:
            if prev not in reached:
                reached.add(prev)
                frontier.append(prev)
    return frozenset(reached)


def compute_enable_sets(
    template: MonitorTemplate, event_params: Mapping[str, Iterable[str]]
) -> dict[str, ParamSetFamily]:
    """For each event, the parameter domains that can be bound strictly
    before an occurrence of it on some run that still matters.

    A run matters at that occurrence when the state it moves into can
    still reach a handled category (counting the state itself). The
    domains are collected by a fixpoint over (state, bound-set) pairs
    reachable from the initial state with nothing bound.
    """
    if not isinstance(template, MonitorTemplate):
        raise AnalysisError("enable sets need a finite-state template")
    params_of = _event_param_table(template.alphabet, event_params)
    useful = _states_reaching(template, _goal_states(template))

    enable: dict[str, set[ParamSet]] = {e: set() for e in template.alphabet}
    seen: set[tuple[str, ParamSet]] = {(template.initial_state, frozenset())}
    frontier = [(template.initial_state, frozenset())]
    while frontier:
        state, bound = frontier.pop()
        for event in template.alphabet:
            target = template.transitions.get((state, event))
            if target is None:
                continue
            if target in useful:
                enable[event].add(bound)
            nxt = (target, bound | params_of[event])
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return {e: frozenset(domains) for e, domains in enable.items()}


def compute_coenable_sets(
    template: MonitorTemplate, event_params: Mapping[str, Iterable[str]]
) -> dict[str, ParamSetFamily]:
    """For each state, the parameter unions of paths of length one or
    more that end by entering a handled-category state.

    An empty family means no future of the state can ever fire a
    handler, so a monitor sitting there is always collectible. A state
    keeps itself alive when a handled state is re-enterable from it,
    which preserves exact report counts under collection.
    """
    if not isinstance(template, MonitorTemplate):
        raise AnalysisError("coenable sets need a finite-state template")
    params_of = _event_param_table(template.alphabet, event_params)
    goals = _goal_states(template)

    co: dict[str, set[ParamSet]] = {s: set() for s in template.states}
    changed = True
    while changed:
        changed = False
        for (src, event), dst in template.transitions.items():
            additions: set[ParamSet] = set()
            if dst in goals:
                additions.add(params_of[event])
            for suffix in co[dst]:
                additions.add(params_of[event] | suffix)
            if not additions <= co[src]:
                co[src] |= additions
                changed = True
    return {s: frozenset(family) for s, family in co.items()}


# ---------------------------------------------------------------------------
# grammar-backed enable sets


def _terminal_closure(grammar: Grammar) -> dict[int, frozenset[str]]:
    """Terminals appearing in any productive derivation of each nonterminal."""
    rule_map = grammar.rule_map()
    productive = productive_set(rule_map)
    terms: dict[int, set[str]] = {nt: set() for nt in rule_map}
    changed = True
    while changed:
        changed = False
        for nt, prods in rule_map.items():
            for prod in prods:
                if any(kind == "n" and name not in productive for kind, name in prod):
                    continue
                gathered: set[str] = set()
                for kind, name in prod:
                    if kind == "t":
                        gathered.add(name)
                    else:
                        gathered |= terms[name]
                if not gathered <= terms[nt]:
                    terms[nt] |= gathered
                    changed = True
    return {nt: frozenset(ts) for nt, ts in terms.items()}


def precede_relation(grammar: Grammar) -> dict[str, frozenset[str]]:
    """precede[u] is every terminal that can occur before u in some
    derived word. Computed production-locally: within N -> X1..Xk, all
    terminals derivable from Xi precede all derivable from Xj for i < j;
    nesting is covered because every nonterminal's own productions are
    visited too.
    """
    closure = _terminal_closure(grammar)

    def any_of(sym) -> frozenset[str]:
        kind, name = sym
        return frozenset([name]) if kind == "t" else closure.get(name, frozenset())

    pre: dict[str, set[str]] = {}
    for _nt, prods in grammar.rules:
        for prod in prods:
            for j in range(1, len(prod)):
                later = any_of(prod[j])
                if not later:
                    continue
                earlier: set[str] = set()
                for i in range(j):
                    earlier |= any_of(prod[i])
                for u in later:
                    pre.setdefault(u, set()).update(earlier)
    return {u: frozenset(ts) for u, ts in pre.items()}


def _powerset(items: ParamSet) -> ParamSetFamily:
    members = sorted(items)
    out = []
    for mask in range(1 << len(members)):
        out.append(frozenset(members[i] for i in range(len(members)) if mask >> i & 1))
    return frozenset(out)


def compute_enable_sets_cfg(
    grammar: Grammar, event_params: Mapping[str, Iterable[str]]
) -> dict[str, ParamSetFamily]:
    """Grammar variant: every subset of the parameters bound by events
    that can precede e. Deliberately an over-approximation; creation
    gating stays sound, just less aggressive than the automaton case.
    """
    pre = precede_relation(grammar)
    out: dict[str, ParamSetFamily] = {}
    for event in event_params:
        bound_before: set[str] = set()
        for other in pre.get(event, frozenset()):
            bound_before |= set(event_params.get(other, ()))
        out[event] = _powerset(frozenset(bound_before))
    return out


# ---------------------------------------------------------------------------
# stable renderings for goldens and the command line


def render_param_set(ps: ParamSet) -> str:
    return "{" + ",".join(sorted(ps)) + "}"


def render_family(family: ParamSetFamily) -> str:
    ordered = sorted(family, key=lambda ps: (len(ps), tuple(sorted(ps))))
    return ", ".join(render_param_set(ps) for ps in ordered) if ordered else "(none)"


def dump_enable_sets(enable: Mapping[str, ParamSetFamily]) -> str:
    lines = [f"{event}: {render_family(enable[event])}" for event in sorted(enable)]
    return "\n".join(lines) + "\n"


def dump_coenable_sets(coenable: Mapping[str, ParamSetFamily]) -> str:
    lines = [f"{state}: {render_family(coenable[state])}" for state in sorted(coenable)]
    return "\n".join(lines) + "\n"
