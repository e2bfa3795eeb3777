"""JSON trace files.

A trace is one chart serialized as::

    {
      "lifelines": ["A", "B"],
      "events": [
        {"id": 0, "lifeline": "A", "kind": "send", "receiver": "B",
         "vars": {"x": {"int": 1}}},
        {"id": 1, "lifeline": "B", "kind": "recv", "vars": {}}
      ],
      "succ": [[from, to], ...],
      "messages": [[send, recv], ...]
    }

Key names are exact and unknown keys are rejected. Variable values are
tagged objects with exactly one of ``int`` (signed 64-bit), ``str``, or
``bool``. Event ids are unique naturals with no semantic ordering.
"""

from __future__ import annotations

import json
from pathlib import Path

from .msc import EventKind, Msc, Valuation, Value

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

_TRACE_KEYS = {"lifelines", "events", "succ", "messages"}
_EVENT_KEYS = {"id", "lifeline", "kind", "receiver", "vars"}


class TraceFormatError(Exception):
    """Raised when a trace file does not match the documented schema."""


def decode_value(obj: object) -> Value:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise TraceFormatError(f"value must be a one-key tagged object, got {obj!r}")
    (tag, raw), = obj.items()
    if tag == "int":
        if type(raw) is not int:
            raise TraceFormatError(f"int value must be an integer, got {raw!r}")
        if not INT64_MIN <= raw <= INT64_MAX:
            raise TraceFormatError(f"int value out of 64-bit range: {raw}")
        return raw
    if tag == "str":
        if type(raw) is not str:
            raise TraceFormatError(f"str value must be a string, got {raw!r}")
        return raw
    if tag == "bool":
        if type(raw) is not bool:
            raise TraceFormatError(f"bool value must be a boolean, got {raw!r}")
        return raw
    raise TraceFormatError(f"unknown value tag {tag!r}")


def encode_value(v: Value) -> dict[str, Value]:
    if type(v) is bool:
        return {"bool": v}
    if type(v) is int:
        return {"int": v}
    if type(v) is str:
        return {"str": v}
    raise TypeError(f"not a storable value: {v!r}")


def decode_valuation(obj: object, where: str) -> Valuation:
    if not isinstance(obj, dict):
        raise TraceFormatError(f"{where}: vars must be an object")
    out: Valuation = {}
    for name, raw in obj.items():
        if not isinstance(name, str) or not name:
            raise TraceFormatError(f"{where}: bad variable name {name!r}")
        out[name] = decode_value(raw)
    return out


def parse_trace(data: object) -> Msc:
    """Build a chart from already-parsed JSON; strict about the schema."""
    if not isinstance(data, dict):
        raise TraceFormatError("trace must be a JSON object")
    unknown = set(data) - _TRACE_KEYS
    if unknown:
        raise TraceFormatError(f"unknown trace keys: {sorted(unknown)}")
    for key in _TRACE_KEYS:
        if key not in data:
            raise TraceFormatError(f"missing trace key {key!r}")

    lifelines = data["lifelines"]
    if not isinstance(lifelines, list) or not all(
        isinstance(b, str) and b for b in lifelines
    ):
        raise TraceFormatError("lifelines must be a list of nonempty strings")
    if len(set(lifelines)) != len(lifelines):
        raise TraceFormatError("duplicate lifeline names")
    lifeline_set = set(lifelines)

    if not isinstance(data["events"], list):
        raise TraceFormatError("events must be a list")
    kind: dict[int, EventKind] = {}
    pid: dict[int, str] = {}
    val: dict[int, Valuation] = {}
    ids: list[int] = []
    for i, ev in enumerate(data["events"]):
        where = f"events[{i}]"
        if not isinstance(ev, dict):
            raise TraceFormatError(f"{where}: must be an object")
        unknown = set(ev) - _EVENT_KEYS
        if unknown:
            raise TraceFormatError(f"{where}: unknown keys {sorted(unknown)}")
        for key in ("id", "lifeline", "kind", "vars"):
            if key not in ev:
                raise TraceFormatError(f"{where}: missing key {key!r}")
        eid = ev["id"]
        if type(eid) is not int or eid < 0:
            raise TraceFormatError(f"{where}: id must be a natural number")
        if eid in kind:
            raise TraceFormatError(f"{where}: duplicate event id {eid}")
        if ev["lifeline"] not in lifeline_set:
            raise TraceFormatError(f"{where}: undeclared lifeline {ev['lifeline']!r}")
        tag = ev["kind"]
        if tag not in ("act", "recv", "choice", "send"):
            raise TraceFormatError(f"{where}: unknown kind {tag!r}")
        receiver = ev.get("receiver")
        if tag == "send":
            if not isinstance(receiver, str) or receiver not in lifeline_set:
                raise TraceFormatError(f"{where}: send needs a declared receiver")
        elif receiver is not None:
            raise TraceFormatError(f"{where}: receiver only allowed on send events")
        kind[eid] = EventKind(tag, receiver)
        pid[eid] = ev["lifeline"]
        val[eid] = decode_valuation(ev["vars"], where)
        ids.append(eid)

    succ = _decode_pairs(data["succ"], "succ", set(ids))
    msg = _decode_pairs(data["messages"], "messages", set(ids))

    return Msc(
        lifelines=tuple(lifelines),
        events=tuple(ids),
        kind=kind,
        pid=pid,
        val=val,
        succ=succ,
        msg=msg,
    )


def _decode_pairs(obj: object, name: str, ids: set[int]) -> dict[int, int]:
    if not isinstance(obj, list):
        raise TraceFormatError(f"{name} must be a list of [from, to] pairs")
    out: dict[int, int] = {}
    for i, pair in enumerate(obj):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or any(type(x) is not int for x in pair)
        ):
            raise TraceFormatError(f"{name}[{i}]: must be a pair of event ids")
        src, dst = pair
        if src not in ids or dst not in ids:
            raise TraceFormatError(f"{name}[{i}]: unknown event id")
        if src in out:
            raise TraceFormatError(f"{name}[{i}]: duplicate source id {src}")
        out[src] = dst
    return out


def load_trace(source: str | Path | dict) -> Msc:
    """Load a chart from a file path or an already-parsed JSON object."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise TraceFormatError(f"invalid JSON: {exc}") from exc
        return parse_trace(data)
    return parse_trace(source)


def dump_trace(m: Msc) -> dict:
    """Serialize a chart back to the trace schema (stably ordered)."""
    events = []
    for eid in sorted(m.events):
        k = m.kind[eid]
        ev: dict = {"id": eid, "lifeline": m.pid[eid], "kind": k.tag}
        if k.receiver is not None:
            ev["receiver"] = k.receiver
        ev["vars"] = {x: encode_value(v) for x, v in sorted(m.val[eid].items())}
        events.append(ev)
    return {
        "lifelines": list(m.lifelines),
        "events": events,
        "succ": sorted([s, d] for s, d in m.succ.items()),
        "messages": sorted([s, d] for s, d in m.msg.items()),
    }
