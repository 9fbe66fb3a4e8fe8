"""In-process instrumentation against the sacrificial patchee module.

Trace files are validated with the checker's own reader: the point of
the emitter is that the other side parses every line.
"""

import gc
import json
import threading

import pytest
from paramon.traceio import TraceDeath, TraceEvent, load_trace

import patchee
from paratrace import PatchTarget, Session


def target(attr, event, position, bindings):
    return PatchTarget(
        module="patchee", attr=attr, event=event, position=position, bindings=bindings
    )


GRAB_AFTER = target("acquire", "grab", "After", (("r", "resource", 0),))
GRAB_BEFORE = target("acquire", "grab", "Before", (("r", "resource", 0),))
DROP_AFTER = target("release", "drop", "After", (("r", "resource", 0),))


def run_session(tmp_path, targets, body):
    out = tmp_path / "out.jsonl"
    with Session(targets, str(out)) as session:
        body(session)
    meta, records, issues = load_trace(str(out))
    assert issues.skipped == 0
    return meta, records


def events_of(records):
    return [r for r in records if isinstance(r, TraceEvent)]


def test_before_and_after_emission(tmp_path):
    res = patchee.Resource("db")

    def body(_):
        assert patchee.acquire(res, mode="w") == "db:w"

    meta, records = run_session(tmp_path, [GRAB_BEFORE, GRAB_AFTER], body)
    assert meta.producer == "paratrace"
    assert [(e.name, e.position) for e in events_of(records)] == [
        ("grab", "Before"),
        ("grab", "After"),
    ]
    before, after = events_of(records)
    assert before.params == after.params
    ((param, obj),) = before.params
    assert param == "r" and obj.type_tag == "resource"
    assert before.source is not None and before.source[0].endswith("test_session.py")


def test_same_object_same_token_across_events(tmp_path):
    res = patchee.Resource("db")

    def body(_):
        patchee.acquire(res)
        patchee.release(res)

    _, records = run_session(tmp_path, [GRAB_AFTER, DROP_AFTER], body)
    grab, drop = events_of(records)
    assert grab.params == drop.params


def test_return_value_binding(tmp_path):
    res = patchee.Resource("db")
    handle = target(
        "acquire", "grab", "After", (("r", "resource", 0), ("h", "handle", "ret"))
    )
    out = tmp_path / "out.jsonl"
    with Session([handle], str(out)) as session:
        got = patchee.acquire(res)
        tag_token = session.registry.identity(got, "handle")
    _, records, issues = load_trace(str(out))
    assert issues.skipped == 0
    (event,) = events_of(records)
    bound = dict(event.params)
    assert bound["h"].type_tag == "handle"
    assert (bound["h"].type_tag, bound["h"].token) == tag_token


def test_exceptions_pass_through_with_before_but_no_after(tmp_path):
    def body(_):
        with pytest.raises(ValueError, match="nothing to acquire"):
            patchee.acquire(None)

    _, records = run_session(tmp_path, [GRAB_BEFORE, GRAB_AFTER], body)
    assert [(e.name, e.position) for e in events_of(records)] == [("grab", "Before")]


def test_traced_calls_return_exactly_what_untraced_calls_return(tmp_path, capsys):
    res = patchee.Resource("db")
    plain = (patchee.acquire(res, mode="x"), patchee.announce(res), patchee.chained(res))
    plain_out = capsys.readouterr().out

    targets = [
        GRAB_BEFORE,
        GRAB_AFTER,
        DROP_AFTER,
        target("announce", "speak", "After", (("r", "resource", 0),)),
        target("chained", "chain", "Before", (("r", "resource", 0),)),
    ]
    traced = None

    def body(_):
        nonlocal traced
        traced = (
            patchee.acquire(res, mode="x"),
            patchee.announce(res),
            patchee.chained(res),
        )

    _, records = run_session(tmp_path, targets, body)
    assert traced == plain
    assert capsys.readouterr().out == plain_out
    # chained() calls release() internally; the nested call is traced too
    assert [e.name for e in events_of(records)] == [
        "grab",
        "grab",
        "speak",
        "chain",
        "drop",
    ]


def test_instrument_returns_a_running_session(tmp_path):
    from paratrace import instrument

    res = patchee.Resource("db")
    out = tmp_path / "out.jsonl"
    session = instrument([GRAB_AFTER], str(out))
    try:
        patchee.acquire(res)
    finally:
        session.stop()
    _, records, _ = load_trace(str(out))
    assert [e.name for e in events_of(records)] == ["grab"]


def test_stop_restores_the_original_callables(tmp_path):
    original = patchee.acquire
    out = tmp_path / "out.jsonl"
    session = Session([GRAB_AFTER], str(out))
    session.start()
    assert patchee.acquire is not original
    session.stop()
    assert patchee.acquire is original
    patchee.acquire(patchee.Resource("late"))
    _, records, _ = load_trace(str(out))
    assert len(events_of(records)) == 0


def test_unpatchable_target_is_skipped_and_recorded(tmp_path):
    res = patchee.Resource("db")
    readonly = PatchTarget(
        module="builtins",
        attr="str.upper",
        event="shout",
        position="After",
        bindings=(("r", "resource", "self"),),
    )
    out = tmp_path / "out.jsonl"
    with pytest.warns(UserWarning, match="cannot patch builtins.str.upper"):
        session = Session([readonly, GRAB_AFTER], str(out))
    with session:
        assert "x".upper() == "X"
        patchee.acquire(res)
    header = json.loads(out.read_text().splitlines()[0])
    assert header["skipped_targets"] == [
        ["builtins", "str.upper", "read-only attribute slot"]
    ]
    _, records, issues = load_trace(str(out))
    assert issues.skipped == 0
    assert [e.name for e in events_of(records)] == ["grab"]


def test_missing_module_and_attr_are_skipped(tmp_path):
    out = tmp_path / "out.jsonl"
    ghosts = [
        PatchTarget("no_such_module_anywhere", "f", "e1", "After", ()),
        PatchTarget("patchee", "not_there", "e2", "After", ()),
        PatchTarget("patchee", "Resource.label", "e3", "After", ()),
    ]
    with pytest.warns(UserWarning):
        session = Session(ghosts, str(out))
    session.start()
    session.stop()
    assert sorted(m for m, _, _ in session.skipped) == [
        "no_such_module_anywhere",
        "patchee",
        "patchee",
    ]


def test_no_targets_yields_a_parseable_header_only_trace(tmp_path):
    out = tmp_path / "out.jsonl"
    with Session([], str(out)):
        pass
    meta, records, issues = load_trace(str(out))
    assert issues.skipped == 0
    assert records == []


def test_collected_object_produces_a_death_record(tmp_path):
    def body(_):
        res = patchee.Resource("fleeting")
        patchee.acquire(res)
        del res
        gc.collect()

    _, records = run_session(tmp_path, [GRAB_AFTER], body)
    (event,) = events_of(records)
    deaths = [r for r in records if isinstance(r, TraceDeath)]
    assert len(deaths) == 1
    assert deaths[0].dead == (dict(event.params)["r"],)
    assert deaths[0].seq > event.seq


def test_stop_flushes_pending_deaths(tmp_path):
    res = patchee.Resource("held")
    # stop() runs a collection before closing the sink, so a reference
    # dropped mid-session still gets its death written
    out = tmp_path / "out.jsonl"
    session = Session([GRAB_AFTER], str(out))
    session.start()
    patchee.acquire(res)
    del res
    session.stop()
    _, records, _ = load_trace(str(out))
    assert [type(r).__name__ for r in records] == ["TraceEvent", "TraceDeath"]


def test_many_threads_share_one_writer(tmp_path):
    resources = [patchee.Resource(f"r{i}") for i in range(8)]

    def body(_):
        def work(res):
            for _ in range(25):
                patchee.acquire(res)

        threads = [threading.Thread(target=work, args=(r,)) for r in resources]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

    _, records = run_session(tmp_path, [GRAB_AFTER], body)
    events = events_of(records)
    assert len(events) == 8 * 25
    seqs = [r.seq for r in records]
    assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)
    tokens = {dict(e.params)["r"].token for e in events}
    assert len(tokens) == 8
