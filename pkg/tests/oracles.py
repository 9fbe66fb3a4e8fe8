"""Independent re-implementations used as reference answers in tests.

Everything here recomputes something the package also computes, by a
deliberately different route: slices by the textbook recursion instead of
a single pass, regular languages through an explicit automaton instead of
derivatives, grammars through CYK on a normal form instead of grammar
derivatives, temporal formulas by recursion over the whole trace instead
of formula progression. Tests compare the two sides. Nothing in the
package imports this module.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from paramon.logics.cfg import Grammar, Prod
from paramon.logics.ere import Alt, Both, Cat, Empty, Eps, Not, Re, Star, Sym
from paramon.logics.ltl import (
    Always,
    AndL,
    Atom,
    Const,
    Eventually,
    Ltl,
    Next,
    NotL,
    OrL,
    Until,
)
from paramon.logics import ptltl as pt
from paramon.logics.template import MATCH, UNDETERMINED, VIOLATION, Stepper

Binding = Mapping[str, object]
NamedEvent = tuple[str, Binding]


# -- slicing ----------------------------------------------------------------


def submap(small: Binding, big: Binding) -> bool:
    return all(k in big and big[k] == v for k, v in small.items())


def slice_names(events: Sequence[NamedEvent], theta: Binding) -> list[str]:
    """The inductive slice definition, taken literally: the empty trace
    slices to the empty word, and tau followed by e slices to slice(tau)
    extended with e exactly when e's binding is part of theta."""
    if not events:
        return []
    head = slice_names(events[:-1], theta)
    name, binding = events[-1]
    if submap(binding, theta):
        head.append(name)
    return head


def merge(a: Binding, b: Binding) -> Optional[dict]:
    out = dict(a)
    for k, v in b.items():
        if k in out and out[k] != v:
            return None
        out[k] = v
    return out


def _key(binding: Binding) -> tuple:
    return tuple(sorted(binding.items()))


def closure_bindings(events: Sequence[NamedEvent]) -> list[dict]:
    """Every binding reachable from the trace: the observed ones plus all
    their pairwise-compatible unions, to a fixpoint. Includes the empty
    binding."""
    seen: dict[tuple, dict] = {(): {}}
    frontier: list[dict] = [{}]
    for _, b in events:
        k = _key(b)
        if k not in seen:
            d = dict(b)
            seen[k] = d
            frontier.append(d)
    while frontier:
        cur = frontier.pop()
        for other in list(seen.values()):
            joined = merge(cur, other)
            if joined is None:
                continue
            k = _key(joined)
            if k not in seen:
                seen[k] = joined
                frontier.append(joined)
    return list(seen.values())


# -- slice-then-check -------------------------------------------------------


def binding_sort_key(binding: Binding) -> tuple:
    return tuple((p, o.type_tag, o.token) for p, o in sorted(binding.items()))


def check_reports(
    spec_name: str,
    stepper: Stepper,
    handled: frozenset[str],
    events: Sequence[NamedEvent],
    creation: frozenset[str],
    label=lambda state: state,
) -> list[tuple]:
    """One fresh template run per distinct creation-event binding, over that
    binding's full slice. Every landing in a handled category counts as one
    occurrence; occurrences collapse per (binding, state). Returns the same
    shape as EngineResult.report_multiset()."""
    instances: list[dict] = []
    seen: set[tuple] = set()
    for name, binding in events:
        if name in creation:
            k = _key(binding)
            if k not in seen:
                seen.add(k)
                instances.append(dict(binding))
    rows: list[tuple] = []
    for theta in instances:
        state = stepper.initial()
        counts: dict[tuple, int] = {}
        order: list[tuple] = []
        for name in slice_names(events, theta):
            state, category = stepper.step(state, name)
            if category in handled:
                key = (label(state), category)
                if key not in counts:
                    counts[key] = 0
                    order.append(key)
                counts[key] += 1
        for state_label, category in order:
            rows.append(
                (
                    spec_name,
                    binding_sort_key(theta),
                    state_label,
                    category,
                    counts[(state_label, category)],
                )
            )
    return sorted(rows)


# -- regular expressions via an explicit automaton ---------------------------


class Dfa:
    """Complete DFA over a fixed alphabet; states are 0..n-1."""

    __slots__ = ("n", "start", "accepts", "delta", "alphabet")

    def __init__(self, n, start, accepts, delta, alphabet):
        self.n = n
        self.start = start
        self.accepts = frozenset(accepts)
        self.delta = delta
        self.alphabet = tuple(alphabet)

    def run(self, word: Iterable[str]) -> int:
        q = self.start
        for sym in word:
            q = self.delta[(q, sym)]
        return q

    def live_states(self) -> frozenset[int]:
        """States from which an accepting state is reachable."""
        back: dict[int, set[int]] = defaultdict(set)
        for (q, _), q2 in self.delta.items():
            back[q2].add(q)
        live = set(self.accepts)
        stack = list(live)
        while stack:
            q = stack.pop()
            for p in back[q]:
                if p not in live:
                    live.add(p)
                    stack.append(p)
        return frozenset(live)


class _Nfa:
    def __init__(self):
        self.count = 0
        self.eps: dict[int, set[int]] = defaultdict(set)
        self.trans: dict[tuple[int, str], set[int]] = defaultdict(set)

    def fresh(self) -> int:
        self.count += 1
        return self.count - 1


def _thompson(nfa: _Nfa, node: Re, alphabet: tuple[str, ...]) -> tuple[int, int]:
    """Fragment with one start and one accept state. Complement and
    intersection have no direct NFA construction, so those subtrees are
    determinized recursively and the resulting DFA is embedded."""
    start, accept = nfa.fresh(), nfa.fresh()
    match node:
        case Empty():
            pass
        case Eps():
            nfa.eps[start].add(accept)
        case Sym(name):
            nfa.trans[(start, name)].add(accept)
        case Cat(parts):
            cur = start
            for p in parts:
                s, a = _thompson(nfa, p, alphabet)
                nfa.eps[cur].add(s)
                cur = a
            nfa.eps[cur].add(accept)
        case Alt(parts):
            for p in sorted(parts, key=repr):
                s, a = _thompson(nfa, p, alphabet)
                nfa.eps[start].add(s)
                nfa.eps[a].add(accept)
        case Star(inner):
            s, a = _thompson(nfa, inner, alphabet)
            nfa.eps[start].add(s)
            nfa.eps[start].add(accept)
            nfa.eps[a].add(s)
            nfa.eps[a].add(accept)
        case Not(inner):
            sub = ere_dfa(inner, alphabet)
            flipped = Dfa(
                sub.n,
                sub.start,
                frozenset(range(sub.n)) - sub.accepts,
                sub.delta,
                alphabet,
            )
            _embed_dfa(nfa, flipped, start, accept)
        case Both(parts):
            subs = [ere_dfa(p, alphabet) for p in sorted(parts, key=repr)]
            _embed_dfa(nfa, _product(subs, alphabet), start, accept)
        case _:
            raise AssertionError(f"unhandled regex node {node!r}")
    return start, accept


def _embed_dfa(nfa: _Nfa, dfa: Dfa, start: int, accept: int) -> None:
    base = nfa.count
    nfa.count += dfa.n
    nfa.eps[start].add(base + dfa.start)
    for (q, sym), q2 in dfa.delta.items():
        nfa.trans[(base + q, sym)].add(base + q2)
    for q in dfa.accepts:
        nfa.eps[base + q].add(accept)


def _product(dfas: list[Dfa], alphabet: tuple[str, ...]) -> Dfa:
    states: list[tuple] = [tuple(d.start for d in dfas)]
    index = {states[0]: 0}
    delta: dict[tuple[int, str], int] = {}
    i = 0
    while i < len(states):
        cur = states[i]
        for sym in alphabet:
            nxt = tuple(d.delta[(q, sym)] for d, q in zip(dfas, cur))
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
            delta[(i, sym)] = index[nxt]
        i += 1
    accepts = {
        index[s] for s in states if all(q in d.accepts for d, q in zip(dfas, s))
    }
    return Dfa(len(states), 0, accepts, delta, alphabet)


def _closure(nfa: _Nfa, states: frozenset[int]) -> frozenset[int]:
    out = set(states)
    stack = list(states)
    while stack:
        q = stack.pop()
        for q2 in nfa.eps[q]:
            if q2 not in out:
                out.add(q2)
                stack.append(q2)
    return frozenset(out)


def ere_dfa(node: Re, alphabet: Iterable[str]) -> Dfa:
    """Thompson construction plus subset construction. The empty subset is
    kept as an ordinary state, so the result is complete over alphabet."""
    alphabet = tuple(sorted(alphabet))
    nfa = _Nfa()
    start, accept = _thompson(nfa, node, alphabet)
    first = _closure(nfa, frozenset([start]))
    subsets: list[frozenset[int]] = [first]
    index = {first: 0}
    delta: dict[tuple[int, str], int] = {}
    i = 0
    while i < len(subsets):
        cur = subsets[i]
        for sym in alphabet:
            moved = frozenset(q2 for q in cur for q2 in nfa.trans[(q, sym)])
            nxt = _closure(nfa, moved)
            if nxt not in index:
                index[nxt] = len(subsets)
                subsets.append(nxt)
            delta[(i, sym)] = index[nxt]
        i += 1
    accepts = {index[s] for s in subsets if accept in s}
    return Dfa(len(subsets), 0, accepts, delta, alphabet)


def dfa_category(dfa: Dfa, state: int, live: frozenset[int] | None = None) -> str:
    if live is None:
        live = dfa.live_states()
    if state in dfa.accepts:
        return MATCH
    if state not in live:
        return VIOLATION
    return UNDETERMINED


def ere_word_category(node: Re, word: Sequence[str], alphabet: Iterable[str]) -> str:
    dfa = ere_dfa(node, tuple(alphabet))
    return dfa_category(dfa, dfa.run(word))


# -- context-free formulas via CNF, CYK, and a product construction ----------


class Cnf:
    """Chomsky normal form: terminal rules, binary rules, and a flag for
    whether the empty word is in the language."""

    __slots__ = ("start", "term", "binary", "empty_ok")

    def __init__(self, start, term, binary, empty_ok):
        self.start = start
        self.term = term  # set[(nt, terminal)]
        self.binary = binary  # set[(nt, nt, nt)]
        self.empty_ok = empty_ok


def to_cnf(grammar: Grammar) -> Cnf:
    rules: dict[int, set[Prod]] = {
        nt: set(prods) for nt, prods in grammar.rules
    }
    fresh = max(rules, default=0) + 1

    def new_nt() -> int:
        nonlocal fresh
        fresh += 1
        return fresh - 1

    start = new_nt()
    rules[start] = {(("n", grammar.start),)} if grammar.start in rules else set()

    # TERM: terminals only in length-1 productions
    term_nt: dict[str, int] = {}
    for nt in list(rules):
        fixed: set[Prod] = set()
        for prod in rules[nt]:
            if len(prod) >= 2:
                out = []
                for kind, val in prod:
                    if kind == "t":
                        if val not in term_nt:
                            t = new_nt()
                            term_nt[val] = t
                            rules[t] = {(("t", val),)}
                        out.append(("n", term_nt[val]))
                    else:
                        out.append((kind, val))
                fixed.add(tuple(out))
            else:
                fixed.add(prod)
        rules[nt] = fixed

    # BIN: split long productions into binary chains
    for nt in list(rules):
        fixed = set()
        for prod in rules[nt]:
            while len(prod) > 2:
                head = new_nt()
                rules[head] = {prod[-2:]}
                prod = prod[:-2] + (("n", head),)
            fixed.add(prod)
        rules[nt] = fixed

    # DEL: drop nullable occurrences; the empty word becomes a flag
    nullable: set[int] = set()
    changed = True
    while changed:
        changed = False
        for nt, prods in rules.items():
            if nt in nullable:
                continue
            for prod in prods:
                if all(k == "n" and v in nullable for k, v in prod):
                    nullable.add(nt)
                    changed = True
                    break
    empty_ok = start in nullable
    for nt in list(rules):
        fixed = set()
        for prod in rules[nt]:
            variants = [()]
            for sym in prod:
                kind, val = sym
                keep = [v + (sym,) for v in variants]
                if kind == "n" and val in nullable:
                    keep.extend(variants)
                variants = keep
            for v in variants:
                if v:
                    fixed.add(v)
        rules[nt] = fixed

    # UNIT: inline chains of single-nonterminal productions
    unit: dict[int, set[int]] = {nt: {nt} for nt in rules}
    changed = True
    while changed:
        changed = False
        for nt in rules:
            for target in list(unit[nt]):
                for prod in rules.get(target, ()):
                    if len(prod) == 1 and prod[0][0] == "n":
                        if prod[0][1] not in unit[nt]:
                            unit[nt].add(prod[0][1])
                            changed = True

    term: set[tuple[int, str]] = set()
    binary: set[tuple[int, int, int]] = set()
    for nt in rules:
        for target in unit[nt]:
            for prod in rules.get(target, ()):
                if len(prod) == 1 and prod[0][0] == "t":
                    term.add((nt, prod[0][1]))
                elif len(prod) == 2:
                    binary.add((nt, prod[0][1], prod[1][1]))
    return Cnf(start, term, binary, empty_ok)


def cyk_member(cnf: Cnf, word: Sequence[str]) -> bool:
    n = len(word)
    if n == 0:
        return cnf.empty_ok
    table: dict[tuple[int, int], set[int]] = {}
    for i, sym in enumerate(word):
        table[(i, 1)] = {nt for nt, t in cnf.term if t == sym}
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            cell: set[int] = set()
            for split in range(1, span):
                left = table[(i, split)]
                right = table[(i + split, span - split)]
                for nt, b, c in cnf.binary:
                    if b in left and c in right:
                        cell.add(nt)
            table[(i, span)] = cell
    return cnf.start in table[(0, n)]


def residual_nonempty(cnf: Cnf, word: Sequence[str], alphabet: Iterable[str]) -> bool:
    """Whether some extension of word (the empty one included) lands in the
    language: intersect with the automaton for word-then-anything and test
    emptiness by the productive-triples fixpoint."""
    n = len(word)
    if n == 0 and cnf.empty_ok:
        return True

    def advance(q: int, sym: str) -> Optional[int]:
        if q < n:
            return q + 1 if sym == word[q] else None
        return n

    triples: set[tuple[int, int, int]] = set()
    for q in range(n + 1):
        for nt, t in cnf.term:
            q2 = advance(q, t)
            if q2 is not None:
                triples.add((q, nt, q2))
    changed = True
    while changed:
        changed = False
        by_left: dict[tuple[int, int], set[int]] = defaultdict(set)
        for q, nt, q2 in triples:
            by_left[(q, nt)].add(q2)
        for nt, b, c in cnf.binary:
            for q in range(n + 1):
                for mid in by_left[(q, b)]:
                    for q2 in by_left[(mid, c)]:
                        if (q, nt, q2) not in triples:
                            triples.add((q, nt, q2))
                            changed = True
    return (0, cnf.start, n) in triples


def cfg_word_category(grammar: Grammar, word: Sequence[str], alphabet: Iterable[str]) -> str:
    cnf = to_cnf(grammar)
    if cyk_member(cnf, word):
        return MATCH
    if not residual_nonempty(cnf, word, alphabet):
        return VIOLATION
    return UNDETERMINED


# -- temporal formulas by recursion over the trace ----------------------------


def ltl_holds(f: Ltl, trace: Sequence[str], i: int = 0) -> bool:
    """Finite-trace semantics at position i; i == len(trace) is the end,
    where always holds and atoms, next, until, eventually do not."""
    n = len(trace)
    match f:
        case Const(v):
            return v
        case Atom(name):
            return i < n and trace[i] == name
        case NotL(inner):
            return not ltl_holds(inner, trace, i)
        case AndL(parts):
            return all(ltl_holds(p, trace, i) for p in parts)
        case OrL(parts):
            return any(ltl_holds(p, trace, i) for p in parts)
        case Next(inner):
            return i < n and ltl_holds(inner, trace, i + 1)
        case Always(inner):
            if i == n:
                return True
            return ltl_holds(inner, trace, i) and ltl_holds(f, trace, i + 1)
        case Eventually(inner):
            if i == n:
                return False
            return ltl_holds(inner, trace, i) or ltl_holds(f, trace, i + 1)
        case Until(left, right):
            if i == n:
                return False
            if ltl_holds(right, trace, i):
                return True
            return ltl_holds(left, trace, i) and ltl_holds(f, trace, i + 1)
    raise AssertionError(f"unhandled formula node {f!r}")


def ptltl_holds(f: pt.Pltl, trace: Sequence[str], i: int) -> bool:
    """Past-time semantics at position i of a nonempty trace."""
    match f:
        case pt.Const(v):
            return v
        case pt.Atom(name):
            return trace[i] == name
        case pt.NotP(inner):
            return not ptltl_holds(inner, trace, i)
        case pt.AndP(left, right):
            return ptltl_holds(left, trace, i) and ptltl_holds(right, trace, i)
        case pt.OrP(left, right):
            return ptltl_holds(left, trace, i) or ptltl_holds(right, trace, i)
        case pt.Previously(inner):
            return i > 0 and ptltl_holds(inner, trace, i - 1)
        case pt.Historically(inner):
            return ptltl_holds(inner, trace, i) and (
                i == 0 or ptltl_holds(f, trace, i - 1)
            )
        case pt.Since(left, right):
            if ptltl_holds(right, trace, i):
                return True
            return (
                i > 0
                and ptltl_holds(left, trace, i)
                and ptltl_holds(f, trace, i - 1)
            )
    raise AssertionError(f"unhandled formula node {f!r}")


def words_upto(alphabet: Sequence[str], length: int) -> Iterable[tuple[str, ...]]:
    stack: list[tuple[str, ...]] = [()]
    while stack:
        w = stack.pop()
        yield w
        if len(w) < length:
            for sym in alphabet:
                stack.append(w + (sym,))
    return
