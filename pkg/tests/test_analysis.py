"""Enable and coenable tables against hand-enumerated expectations.

The tables must agree with the engine's per-landing report semantics: a
self-loop on a handled state re-fires, so paths that end in such a loop
count. That is why the sequence example below has {a,b} in enable(e1)
on top of the obvious {}.
"""

from importlib import resources

import pytest

from paramon.analysis import (
    AnalysisError,
    compute_coenable_sets,
    compute_enable_sets,
    compute_enable_sets_cfg,
    dump_coenable_sets,
    dump_enable_sets,
    render_family,
    render_param_set,
)
from paramon.logics.cfg import parse_cfg
from paramon.logics.fsm import parse_fsm
from paramon.logics.template import restrict_categories
from paramon.specs import parse_spec, synthesize


def violation_fsm(formula: str, events: frozenset[str]):
    tpl = parse_fsm(formula, events)
    return restrict_categories(tpl, frozenset({"Violation"}))


@pytest.fixture(scope="module")
def toctou_template():
    text = resources.files("paramon.catalog").joinpath("toctou.json").read_text()
    spec = parse_spec(text, name="toctou")
    return synthesize(spec), spec.event_params()


def test_toctou_enable_table(toctou_template):
    tpl, event_params = toctou_template
    enable = compute_enable_sets(tpl, event_params)
    assert enable["use"] == frozenset({frozenset({"f"})})
    # a second check can still lead to a violation, hence {f} next to {}
    assert enable["check"] == frozenset({frozenset(), frozenset({"f"})})
    assert dump_enable_sets(enable) == "check: {}, {f}\nuse: {f}\n"


def test_toctou_coenable_table(toctou_template):
    tpl, event_params = toctou_template
    co = compute_coenable_sets(tpl, event_params)
    assert co["checked"] == frozenset({frozenset({"f"})})
    assert co["start"] == frozenset({frozenset({"f"})})
    # the violation state still fires on its use self-loop
    assert co["violated"] == frozenset({frozenset({"f"})})
    assert co["$sink"] == frozenset()
    assert dump_coenable_sets(co).splitlines()[0] == "$sink: (none)"


def test_two_step_sequence_enable():
    tpl = violation_fsm(
        "s0 [e1 -> s1] s1 [e2 -> s2] alias Violation = s2",
        frozenset({"e1", "e2"}),
    )
    enable = compute_enable_sets(tpl, {"e1": {"a", "b"}, "e2": {"b"}})
    assert enable["e2"] == frozenset({frozenset({"a", "b"})})
    assert frozenset() in enable["e1"]


def test_unreachable_goal_empties_every_enable_set():
    tpl = violation_fsm(
        "s0 [e1 -> s1] s2 [e1 -> s2] alias Violation = s2",
        frozenset({"e1"}),
    )
    enable = compute_enable_sets(tpl, {"e1": {"a"}})
    assert enable["e1"] == frozenset()


def test_coenable_empty_family_means_no_future_report():
    """Cross-check against plain graph reachability: a state has an empty
    coenable family exactly when no handled state is reachable by one or
    more steps."""
    tpl = violation_fsm(
        "s0 [go -> s1, stop -> s3] s1 [go -> s2] s3 [stop -> s3] alias Violation = s2",
        frozenset({"go", "stop"}),
    )
    co = compute_coenable_sets(tpl, {"go": {"p"}, "stop": {"q"}})

    handled = {s for s in tpl.states if tpl.verdicts[s] == "Violation"}
    def reaches_handled(start: str) -> bool:
        seen, stack = set(), [start]
        while stack:
            cur = stack.pop()
            for ev in tpl.alphabet:
                nxt = tpl.transitions[(cur, ev)]
                if nxt in handled:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    for state in tpl.states:
        assert (co[state] == frozenset()) == (not reaches_handled(state)), state


def test_cfg_enable_is_a_sound_overapproximation():
    g = parse_cfg("S -> a b", frozenset({"a", "b"}))
    enable = compute_enable_sets_cfg(g, {"a": {"p"}, "b": {"q"}})
    assert enable["a"] == frozenset({frozenset()})
    assert frozenset({"p"}) in enable["b"]

    nested = parse_cfg("S -> a S b | eps", frozenset({"a", "b"}))
    enable = compute_enable_sets_cfg(nested, {"a": {"p"}, "b": {"q"}})
    assert frozenset({"p"}) in enable["b"]

    single = parse_cfg("S -> a", frozenset({"a"}))
    assert compute_enable_sets_cfg(single, {"a": {"p"}})["a"] == frozenset({frozenset()})


def test_renderers_are_stable():
    assert render_param_set(frozenset()) == "{}"
    assert render_param_set(frozenset({"b", "a"})) == "{a,b}"
    family = frozenset({frozenset(), frozenset({"b", "a"}), frozenset({"a"})})
    assert render_family(family) == "{}, {a}, {a,b}"
    assert render_family(frozenset()) == "(none)"


def test_enable_rejects_missing_event_params(toctou_template):
    tpl, _ = toctou_template
    with pytest.raises(AnalysisError):
        compute_enable_sets(tpl, {"check": {"f"}})
