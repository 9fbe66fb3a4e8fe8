"""Random well-formed specs and traces for cross-algorithm comparisons.

The equivalence tests compare report multisets of the online algorithms
against a slice-then-check reference that only materializes instances
bound by creation-event occurrences. That comparison is fair only for
specs shaped so that creation blindness cannot show through in reports.
Four rules guarantee it:

* the initial state's category is not handled, so a monitor sitting at
  the initial state never reports;
* every non-creation event loops at the initial state, so stepping a
  monitor before its first creation event leaves it exactly where a
  later-created monitor starts;
* creation events bind every declared parameter, so the instances a
  creation-aware algorithm materializes are exactly the full bindings of
  creation occurrences;
* there is exactly one creation event name, so the enable-set gate
  cannot skip one creation event and then admit a different one whose
  continuation diverges.

Under these rules the blind table scan still creates extra monitors
(partial bindings, and joins whose slices contain no creation event), but
every one of them only ever receives initial-state loops and so reports
nothing. The enable-set gate only skips instances whose template path can
never reach a handled category. Specs that break these rules on purpose
are covered by the hand-written engine tests instead.

Traces draw objects from small per-type pools so bindings collide often,
which is what makes the instance lattice interesting.
"""

from __future__ import annotations

import json
import random

from paramon.slicing import ObjectId
from paramon.specs import Spec, parse_spec, synthesize
from paramon.traceio import TraceEvent

_PARAM_NAMES = ("p", "q", "r")
_NONCREATION = ("a", "b", "c", "d")
_CATEGORIES = ("Violation", "Match")


def _pick_shape(rng: random.Random) -> tuple[list[str], dict[str, list[str]]]:
    """Parameter list and a params-subset per non-creation event."""
    params = list(_PARAM_NAMES[: rng.randint(1, 3)])
    names = list(_NONCREATION[: rng.randint(1, 3)])
    event_params: dict[str, list[str]] = {}
    for name in names:
        k = rng.randint(0, len(params))
        event_params[name] = sorted(rng.sample(params, k))
    return params, event_params


def _spec_doc(
    formalism: str,
    formula: str,
    params: list[str],
    event_params: dict[str, list[str]],
    handled: list[str],
) -> str:
    events: dict[str, dict] = {"After": {}}
    events["After"]["make"] = {"params": params}
    for name, ps in event_params.items():
        events["After"][name] = {"params": ps}
    doc = {
        "Formalism": formalism,
        "Formula": formula,
        "Parameters": [[p, p + "T"] for p in params],
        "Creation_Events": ["make"],
        "Events": events,
        "Handlers": {cat: cat + " hit" for cat in handled},
    }
    return json.dumps(doc)


def random_fsm_spec(rng: random.Random, tag: str) -> Spec:
    params, event_params = _pick_shape(rng)
    noncreation = sorted(event_params)
    others = [f"s{i}" for i in range(1, rng.randint(2, 4))]
    states = ["start"] + others

    lines = []
    start_edges = [f"{name} -> start" for name in noncreation]
    start_edges.append(f"make -> {rng.choice(states)}")
    lines.append("start [" + ", ".join(start_edges) + "]")
    for state in others:
        edges = []
        for name in noncreation + ["make"]:
            if rng.random() < 0.6:
                edges.append(f"{name} -> {rng.choice(states)}")
        if not edges:
            edges.append(f"make -> {state}")
        lines.append(f"{state} [" + ", ".join(edges) + "]")

    n_alias = min(len(others), rng.randint(1, 2))
    aliased = rng.sample(others, n_alias)
    cats = list(_CATEGORIES[:n_alias])
    for state, cat in zip(aliased, cats):
        lines.append(f"alias {cat} = {state}")
    # the first alias is always handled; a report-free spec tests nothing
    handled = [cats[0]] + [c for c in cats[1:] if rng.random() < 0.8]

    text = _spec_doc("fsm", "\n".join(lines), params, event_params, handled)
    return parse_spec(text, name=tag)


def _random_regex(rng: random.Random, alphabet: list[str], depth: int) -> str:
    if depth == 0 or rng.random() < 0.4:
        unit = rng.choice(alphabet)
    else:
        unit = "(" + _random_regex(rng, alphabet, depth - 1) + ")"
    suffix = rng.choice(["", "", "*", "+", "?"])
    out = unit + suffix
    if depth > 0 and rng.random() < 0.35:
        out += " " + _random_regex(rng, alphabet, depth - 1)
    if depth > 0 and rng.random() < 0.25:
        out += " | " + _random_regex(rng, alphabet, depth - 1)
    return out


def random_ere_spec(rng: random.Random, tag: str) -> Spec:
    params, event_params = _pick_shape(rng)
    noncreation = sorted(event_params)
    tail = _random_regex(rng, noncreation + ["make"], 2)
    prefix = "(" + " | ".join(noncreation) + ")* " if noncreation else ""
    formula = f"{prefix}make ({tail})"
    handled = ["Match"] if rng.random() < 0.5 else ["Violation"]
    if rng.random() < 0.5:
        handled = ["Match", "Violation"]
    text = _spec_doc("ere", formula, params, event_params, handled)
    spec = parse_spec(text, name=tag)
    # loop-at-start is load-bearing for the generator's contract; the
    # derivative canonicalizer is what makes it hold, so check it here
    stepper = synthesize(spec)
    init = stepper.initial()
    for name in noncreation:
        assert stepper.step(init, name)[0] == init, (tag, name)
    return spec


def random_spec(rng: random.Random, tag: str) -> Spec:
    if rng.random() < 0.5:
        return random_fsm_spec(rng, tag)
    return random_ere_spec(rng, tag)


def object_pools(spec: Spec, max_objects: int) -> dict[str, list[ObjectId]]:
    params = list(spec.parameter_names)
    per = max(1, max_objects // len(params))
    types = dict(spec.parameters)
    return {
        p: [ObjectId(types[p], str(i)) for i in range(per)] for p in params
    }


def random_trace(
    rng: random.Random,
    spec: Spec,
    max_events: int,
    max_objects: int,
    include_creation: bool = True,
) -> list[TraceEvent]:
    pools = object_pools(spec, max_objects)
    decls = [
        d for d in spec.events if include_creation or d.name not in spec.creation_events
    ]
    out: list[TraceEvent] = []
    for seq in range(1, rng.randint(1, max_events) + 1):
        decl = rng.choice(decls)
        binding = {p: rng.choice(pools[p]) for p in decl.params}
        out.append(
            TraceEvent(seq=seq, name=decl.name, params=tuple(sorted(binding.items())))
        )
    return out


def raw_pairs(records: list[TraceEvent]) -> list[tuple[str, dict]]:
    return [(r.name, dict(r.params)) for r in records]
