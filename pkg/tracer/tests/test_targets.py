import json

import pytest

from paratrace import PatchTarget, TargetError, derive_targets, load_spec_docs


def doc(events, params=None):
    return {
        "Parameters": params if params is not None else [["r", "resource"]],
        "Events": events,
    }


def test_list_form_binds_all_params_in_declaration_order():
    targets = derive_targets(
        doc(
            {"Before": {"grab": [["patchee", "acquire"]]}},
            params=[["r", "resource"], ["m", "mode"]],
        ),
        "s",
    )
    assert targets == [
        PatchTarget(
            module="patchee",
            attr="acquire",
            event="grab",
            position="Before",
            bindings=(("r", "resource", 0), ("m", "mode", 1)),
        )
    ]


def test_dict_form_restricts_bound_params():
    (target,) = derive_targets(
        doc(
            {
                "After": {
                    "drop": {
                        "selectors": [["patchee", "release"]],
                        "params": ["m"],
                    }
                }
            },
            params=[["r", "resource"], ["m", "mode"]],
        ),
        "s",
    )
    assert target.bindings == (("m", "mode", 0),)


def test_argmap_origins():
    (target,) = derive_targets(
        doc(
            {
                "After": {
                    "grab": [
                        [
                            "patchee",
                            "acquire",
                            {"r": "self", "m": "ret", "k": "kw:mode", "i": 2},
                        ]
                    ]
                }
            },
            params=[["r", "a"], ["m", "b"], ["k", "c"], ["i", "d"]],
        ),
        "s",
    )
    assert dict((p, o) for p, _, o in target.bindings) == {
        "r": "self",
        "m": "ret",
        "k": ("kw", "mode"),
        "i": 2,
    }


def test_argmap_may_bind_a_subset():
    (target,) = derive_targets(
        doc(
            {"Before": {"grab": [["patchee", "acquire", {"r": 0}]]}},
            params=[["r", "a"], ["m", "b"]],
        ),
        "s",
    )
    assert [p for p, _, _ in target.bindings] == ["r"]


def test_one_event_many_selectors():
    targets = derive_targets(
        doc({"Before": {"grab": [["patchee", "acquire"], ["patchee", "release"]]}}),
        "s",
    )
    assert [t.attr for t in targets] == ["acquire", "release"]
    assert all(t.event == "grab" for t in targets)


@pytest.mark.parametrize(
    "events,message",
    [
        ({"Before": {"grab": [["patchee", "acquire", {"r": "ret"}]]}}, "not bound yet"),
        ({"Before": {"grab": [["patchee", "acquire", {"r": -1}]]}}, "negative"),
        ({"Before": {"grab": [["patchee", "acquire", {"r": True}]]}}, "not a position"),
        ({"Before": {"grab": [["patchee", "acquire", {"r": "kw:"}]]}}, "bad argmap"),
        ({"Before": {"grab": [["patchee"]]}}, "selector must be"),
        ({"Before": {"grab": [["patchee", "acquire", []]]}}, "argmap must be"),
        ({"During": {"grab": [["patchee", "acquire"]]}}, "unknown position"),
        (
            {"Before": {"grab": {"selectors": [], "params": ["ghost"]}}},
            "undeclared",
        ),
        (
            {"Before": {"grab": [["patchee", "acquire", {"ghost": 0}]]}},
            "argmap names",
        ),
    ],
)
def test_malformed_declarations_are_rejected(events, message):
    with pytest.raises(TargetError, match=message):
        derive_targets(doc(events), "s")


def test_missing_events_block_is_rejected():
    with pytest.raises(TargetError, match="no Events block"):
        derive_targets({"Parameters": [["r", "resource"]]}, "s")


def test_load_spec_docs_single_file_and_directory(tmp_path):
    one = {"Parameters": [], "Events": {}}
    (tmp_path / "alpha.json").write_text(json.dumps(one))
    (tmp_path / "beta.json").write_text(json.dumps(one))
    assert [name for name, _ in load_spec_docs(str(tmp_path))] == ["alpha", "beta"]
    assert load_spec_docs(str(tmp_path / "alpha.json")) == [("alpha", one)]


def test_load_spec_docs_rejects_damaged_json(tmp_path):
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(TargetError, match="cannot read"):
        load_spec_docs(str(tmp_path / "bad.json"))


def test_load_spec_docs_rejects_empty_directory(tmp_path):
    with pytest.raises(TargetError, match="no spec files"):
        load_spec_docs(str(tmp_path))
