"""Trace file schema: strict keys, tagged values, round-trips."""

import pytest

from cplkit.trace import TraceFormatError, dump_trace, load_trace

from oracles import chart, ev, vars_of


def good():
    return chart(
        ["A", "B"],
        [
            ev(0, "A", "send", vars_of(x=1, s="hi", b=True), to="B"),
            ev(1, "B", "recv", vars_of(x=2)),
        ],
        succ=[],
        messages=[(0, 1)],
    )


def test_round_trip():
    m = load_trace(good())
    assert dump_trace(m) == good()
    assert load_trace(dump_trace(m)) == m


def test_unknown_top_level_key_rejected():
    data = good()
    data["frobnicate"] = 1
    with pytest.raises(TraceFormatError, match="unknown trace keys"):
        load_trace(data)


def test_unknown_event_key_rejected():
    data = good()
    data["events"][0]["color"] = "red"
    with pytest.raises(TraceFormatError, match="unknown keys"):
        load_trace(data)


def test_missing_key_rejected():
    data = good()
    del data["messages"]
    with pytest.raises(TraceFormatError, match="missing trace key"):
        load_trace(data)


def test_duplicate_event_id_rejected():
    data = good()
    data["events"][1]["id"] = 0
    with pytest.raises(TraceFormatError, match="duplicate event id"):
        load_trace(data)


def test_undeclared_lifeline_rejected():
    data = good()
    data["events"][0]["lifeline"] = "Z"
    with pytest.raises(TraceFormatError, match="undeclared lifeline"):
        load_trace(data)


def test_receiver_rules():
    data = chart(["A"], [ev(0, "A", "act")])
    data["events"][0]["receiver"] = "A"
    with pytest.raises(TraceFormatError, match="receiver only allowed"):
        load_trace(data)
    data = chart(["A", "B"], [{"id": 0, "lifeline": "A", "kind": "send", "vars": {}}])
    with pytest.raises(TraceFormatError, match="declared receiver"):
        load_trace(data)


def test_value_tags_are_strict():
    for bad in [
        {"int": True},          # bool is not an int
        {"bool": 1},
        {"str": 7},
        {"int": 1, "str": "x"},
        {"float": 1.5},
        "bare",
    ]:
        data = chart(["A"], [ev(0, "A", "act", {"x": bad})])
        with pytest.raises(TraceFormatError):
            load_trace(data)


def test_int_values_are_64_bit():
    data = chart(["A"], [ev(0, "A", "act", {"x": {"int": 2**63}})])
    with pytest.raises(TraceFormatError, match="64-bit"):
        load_trace(data)
    ok = chart(["A"], [ev(0, "A", "act", {"x": {"int": -(2**63)}})])
    assert load_trace(ok).val[0]["x"] == -(2**63)


def test_pair_lists_are_checked():
    data = good()
    data["succ"] = [[0, 99]]
    with pytest.raises(TraceFormatError, match="unknown event id"):
        load_trace(data)
    data = good()
    data["messages"] = [[0, 1], [0, 1]]
    with pytest.raises(TraceFormatError, match="duplicate source"):
        load_trace(data)
