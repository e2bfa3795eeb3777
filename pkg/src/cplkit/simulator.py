"""Deterministic asynchronous replay, random generation, differential checks.

The simulator replays a chart along a sampled schedule (any total order
consistent with the causal order), drives one monitor per lifeline, routes
message payloads along the matched send/receive edges, records guard
verdicts at choice events, and optionally appends branch continuations
chosen by those verdicts.

The differential harness replays a chart the same way and, at every
event, compares every subformula value the monitor computed against the
denotational table, checks state coherence before each evaluation phase,
and re-derives the clock/view invariants from a BFS reachability oracle
that shares no code with the vector-timestamp machinery.

All randomness flows through :class:`~cplkit.rng.SplitMix64`, so every
run replays exactly from its seed.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .denot import sat_table
from .lang import (
    And,
    At,
    Atom,
    AtField,
    Formula,
    GuardSet,
    Lit,
    LocalVar,
    Not,
    Or,
    PastAny,
    PastAt,
    Seen,
    Since,
    Truth,
    Yesterday,
    close_guards,
    expand_derived,
    parse_guard,
    pretty,
)
from .monitor import (
    EventDescriptor,
    MessagePayload,
    MonitorState,
    begin_event,
    check_coherence,
    finish_event,
    init_monitor,
)
from .msc import EventKind, Msc, Valuation, Value, validate_msc, values_equal
from .rng import SplitMix64
from .trace import TraceFormatError, dump_trace, encode_value, parse_trace


class ScenarioError(Exception):
    """Raised for scenario files or continuations that cannot be executed."""


# ---------------------------------------------------------------------- #
# Scenarios
# ---------------------------------------------------------------------- #

@dataclass
class Fragment:
    """A branch continuation: extra events appended to the owner lifeline.

    Events are chained in list order after the owner's current last event.
    They may send (the messages stay in transit within the run) but may
    not receive, since no payload could be routed to them.
    """

    events: list[dict]  # raw event objects in the trace schema


@dataclass
class Scenario:
    """A chart plus guard texts at choice events and optional branches."""

    msc: Msc
    guard_texts: dict[int, str]
    branches: dict[int, tuple[Fragment, Fragment]] = field(default_factory=dict)

    def guard_formulas(self) -> tuple[list[Formula], dict[int, int]]:
        """Parse and expand the guards; returns the formula list (ordered by
        choice event id) and the event-id -> guard-index mapping."""
        formulas: list[Formula] = []
        indices: dict[int, int] = {}
        for eid in sorted(self.guard_texts):
            f = parse_guard(self.guard_texts[eid], set(self.msc.lifelines))
            formulas.append(expand_derived(f, self.msc.lifelines))
            indices[eid] = len(formulas) - 1
        return formulas, indices

    def guard_set(self) -> GuardSet:
        formulas, _ = self.guard_formulas()
        return close_guards(formulas)


_SCENARIO_KEYS = {"lifelines", "events", "succ", "messages", "guards", "branches"}


def load_scenario(source) -> Scenario:
    """Load a scenario file: the trace schema plus ``guards`` and
    optional ``branches``."""
    if isinstance(source, dict):
        data = source
    else:
        with open(source, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ScenarioError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")

    try:
        msc = parse_trace({k: data[k] for k in ("lifelines", "events", "succ", "messages")})
    except KeyError as exc:
        raise ScenarioError(f"missing scenario key {exc}") from exc
    except TraceFormatError as exc:
        raise ScenarioError(str(exc)) from exc

    guard_texts: dict[int, str] = {}
    for i, entry in enumerate(data.get("guards", [])):
        if (
            not isinstance(entry, dict)
            or set(entry) != {"choice_event_id", "guard"}
            or type(entry["choice_event_id"]) is not int
            or not isinstance(entry["guard"], str)
        ):
            raise ScenarioError(f"guards[{i}]: expected {{choice_event_id, guard}}")
        eid = entry["choice_event_id"]
        if eid in guard_texts:
            raise ScenarioError(f"guards[{i}]: duplicate guard for event {eid}")
        guard_texts[eid] = entry["guard"]

    branches: dict[int, tuple[Fragment, Fragment]] = {}
    for i, entry in enumerate(data.get("branches", [])):
        if (
            not isinstance(entry, dict)
            or set(entry) != {"choice_event_id", "then", "else"}
        ):
            raise ScenarioError(
                f"branches[{i}]: expected {{choice_event_id, then, else}}"
            )
        eid = entry["choice_event_id"]
        if eid not in guard_texts:
            raise ScenarioError(f"branches[{i}]: event {eid} has no guard")
        branches[eid] = (
            _parse_fragment(entry["then"], i, "then"),
            _parse_fragment(entry["else"], i, "else"),
        )

    sc = Scenario(msc=msc, guard_texts=guard_texts, branches=branches)
    _check_scenario(sc)
    return sc


def _parse_fragment(obj, i: int, arm: str) -> Fragment:
    if not isinstance(obj, dict) or set(obj) - {"events"}:
        raise ScenarioError(f"branches[{i}].{arm}: expected {{events}}")
    events = obj.get("events", [])
    if not isinstance(events, list):
        raise ScenarioError(f"branches[{i}].{arm}: events must be a list")
    for ev in events:
        if isinstance(ev, dict) and ev.get("kind") == "recv":
            raise ScenarioError(
                f"branches[{i}].{arm}: receive events are not allowed in continuations"
            )
    return Fragment(events=list(events))


def _check_scenario(sc: Scenario) -> None:
    report = validate_msc(sc.msc)
    if not report.ok:
        raise ScenarioError(f"scenario chart is not well-formed: {report.violations}")
    for eid in sc.guard_texts:
        if eid not in sc.msc.kind:
            # Guards may also target events declared inside branch fragments.
            if not any(
                any(ev.get("id") == eid for ev in frag.events)
                for arms in sc.branches.values()
                for frag in arms
            ):
                raise ScenarioError(f"guard references unknown event {eid}")
        elif sc.msc.kind[eid].tag != "choice":
            raise ScenarioError(f"guard on non-choice event {eid}")


# ---------------------------------------------------------------------- #
# Schedules
# ---------------------------------------------------------------------- #

def sample_linear_extension(m: Msc, seed: int) -> list[int]:
    """One schedule of the chart, uniform among ready events at each step,
    deterministic per seed."""
    rng = SplitMix64(seed)
    indeg = {e: 0 for e in m.events}
    out: dict[int, list[int]] = {e: [] for e in m.events}
    for src, dst in list(m.succ.items()) + list(m.msg.items()):
        out[src].append(dst)
        indeg[dst] += 1
    ready = sorted(e for e in m.events if indeg[e] == 0)
    order: list[int] = []
    while ready:
        e = ready.pop(rng.randint(0, len(ready) - 1))
        order.append(e)
        grew = False
        for f in out[e]:
            indeg[f] -= 1
            if indeg[f] == 0:
                ready.append(f)
                grew = True
        if grew:
            ready.sort()
    if len(order) != len(m.events):
        raise ScenarioError("chart is cyclic; cannot schedule")
    return order


# ---------------------------------------------------------------------- #
# Replay
# ---------------------------------------------------------------------- #

@dataclass
class RunLog:
    """Everything one replay produced."""

    order: list[int]
    records: list[dict]
    snapshots: dict[str, dict]
    msc: Msc  # the executed chart, including appended continuations

    def to_dict(self) -> dict:
        return {
            "order": list(self.order),
            "records": self.records,
            "snapshots": {b: self.snapshots[b] for b in sorted(self.snapshots)},
        }

    def to_json(self, pretty_output: bool = False) -> str:
        if pretty_output:
            return json.dumps(self.to_dict(), sort_keys=True, indent=2)
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _descriptor(m: Msc, e: int, guard_index: int | None, payloads) -> EventDescriptor:
    kind = m.kind[e]
    incoming = None
    if kind.tag == "recv":
        send = m.matching_send(e)
        incoming = payloads[send]
    return EventDescriptor(
        kind=kind,
        store_after=dict(m.val[e]),
        guard_index=guard_index,
        incoming=incoming,
    )


def _snapshot(s: MonitorState) -> dict:
    return {
        "vc": dict(sorted(s.vc.items())),
        "view": [
            [b, i, v] for b in sorted(s.view) for i, v in enumerate(s.view[b])
        ],
        "var": [
            [b, x, encode_value(v)]
            for b in sorted(s.var)
            for x, v in sorted(s.var[b].items())
        ],
        "store": {x: encode_value(v) for x, v in sorted(s.store.items())},
    }


def run_scenario(
    sc: Scenario, g: GuardSet, seed: int, mutation: str | None = None
) -> RunLog:
    """Replay a scenario: one monitor per lifeline, payloads delivered along
    message edges, verdicts recorded at guarded choice events, and branch
    continuations appended according to those verdicts.

    ``g`` must be the scenario's own guard set (``sc.guard_set()``); it is
    a separate argument because every monitor in a run must share one
    closed set and callers may have built it already.
    """
    formulas, guard_index_of = sc.guard_formulas()
    for i, f in enumerate(formulas):
        if f not in g.index:
            raise ScenarioError(f"guard {i} is not part of the supplied guard set")

    m = sc.msc
    schedule = sample_linear_extension(m, seed)
    monitors = {b: init_monitor(b, g, m.lifelines) for b in m.lifelines}
    payloads: dict[int, MessagePayload] = {}
    records: list[dict] = []
    order: list[int] = []
    branches = dict(sc.branches)

    queue = list(schedule)
    pos = 0
    while pos < len(queue):
        e = queue[pos]
        pos += 1
        order.append(e)
        owner = m.pid[e]
        gidx = guard_index_of.get(e)
        desc = _descriptor(m, e, gidx, payloads)
        state = monitors[owner]
        begin_event(state, desc, mutation)
        payload = finish_event(state, desc, mutation)
        record: dict = {"event": e, "lifeline": owner, "kind": m.kind[e].tag}
        if payload is not None:
            payloads[e] = payload
            record["payload_bytes"] = len(
                json.dumps(payload.to_wire(), sort_keys=True, separators=(",", ":"))
            )
        if gidx is not None:
            verdict = state.last_vals[gidx]
            record["verdict"] = verdict
            if e in branches:
                then_frag, else_frag = branches.pop(e)
                frag = then_frag if verdict else else_frag
                m, new_ids = _append_fragment(m, owner, frag)
                queue.extend(new_ids)
        records.append(record)

    log = RunLog(
        order=order,
        records=records,
        snapshots={b: _snapshot(monitors[b]) for b in m.lifelines},
        msc=m,
    )
    if not m.is_linear_extension(log.order):
        raise ScenarioError("internal error: executed order is not a schedule")
    return log


def _append_fragment(m: Msc, owner: str, frag: Fragment) -> tuple[Msc, list[int]]:
    """Compose a continuation onto the owner lifeline; returns the new chart
    and the appended event ids in local order."""
    data = dump_trace(m)
    new_ids: list[int] = []
    last_owner = None
    chain = [e for e in data["events"] if e["lifeline"] == owner]
    if chain:
        owner_ids = [e["id"] for e in chain]
        tails = [i for i in owner_ids if all(pair[0] != i for pair in data["succ"])]
        last_owner = tails[0] if tails else None

    for ev in frag.events:
        if not isinstance(ev, dict):
            raise ScenarioError("continuation event must be an object")
        if ev.get("lifeline") != owner:
            raise ScenarioError("continuation event is not on the owner lifeline")
        data["events"].append(ev)
        eid = ev.get("id")
        if type(eid) is not int:
            raise ScenarioError("continuation event needs an integer id")
        if last_owner is not None:
            data["succ"].append([last_owner, eid])
        last_owner = eid
        new_ids.append(eid)

    try:
        composed = parse_trace(data)
    except TraceFormatError as exc:
        raise ScenarioError(f"continuation breaks the trace format: {exc}") from exc
    report = validate_msc(composed)
    if not report.ok:
        raise ScenarioError(
            f"continuation breaks chart well-formedness: {report.violations}"
        )
    return composed, new_ids


# ---------------------------------------------------------------------- #
# Random charts and formulas
# ---------------------------------------------------------------------- #

@dataclass(frozen=True)
class FuzzParams:
    """Knobs for random chart/formula generation. Counts are maxima; the
    generator draws sizes up to them."""

    lifelines: int = 3
    events_per_lifeline: int = 6
    message_prob: float = 0.35
    var_alphabet: int = 3
    value_alphabet: tuple[Value, ...] = (0, 1, 2, "a", "b", True, False)
    formula_depth: int = 3
    formula_count: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if min(
            self.lifelines,
            self.events_per_lifeline,
            self.var_alphabet,
            self.formula_count,
        ) < 1 or self.formula_depth < 0 or not self.value_alphabet:
            raise ValueError("counts must be at least 1 (depth may be 0)")
        if not 0.0 <= self.message_prob <= 1.0:
            raise ValueError("message_prob must be in [0, 1]")


def _random_valuation(rng: SplitMix64, p: FuzzParams) -> Valuation:
    out: Valuation = {}
    for i in range(p.var_alphabet):
        if rng.random() < 0.7:
            out[f"x{i}"] = rng.choice(p.value_alphabet)
    return out


def gen_random_msc(p: FuzzParams) -> Msc:
    """A well-formed random chart, deterministic per seed.

    Built by simulating an execution: creation order is a schedule, so the
    result is acyclic by construction. Receives consume a uniformly random
    in-flight message, which yields non-FIFO deliveries; messages left in
    flight at the end become unmatched sends.
    """
    rng = SplitMix64(p.seed)
    lifelines = tuple(f"L{i + 1}" for i in range(p.lifelines))
    budget = {b: rng.randint(0, p.events_per_lifeline) for b in lifelines}

    kind: dict[int, EventKind] = {}
    pid: dict[int, str] = {}
    val: dict[int, Valuation] = {}
    succ: dict[int, int] = {}
    msg: dict[int, int] = {}
    last: dict[str, int | None] = {b: None for b in lifelines}
    in_flight: list[tuple[int, str]] = []  # (send event, receiver)
    next_id = 0

    while True:
        open_lifelines = [b for b in lifelines if budget[b] > 0]
        if not open_lifelines:
            break
        b = rng.choice(open_lifelines)
        budget[b] -= 1
        eid = next_id
        next_id += 1

        deliverable = [x for x in in_flight if x[1] == b]
        if deliverable and rng.random() < 0.5:
            send_eid, _ = rng.choice(deliverable)
            in_flight.remove((send_eid, b))
            kind[eid] = EventKind("recv")
            msg[send_eid] = eid
            val[eid] = _random_valuation(rng, p)
        else:
            r = rng.random()
            others = [x for x in lifelines if x != b]
            if r < p.message_prob and others:
                to = rng.choice(others)
                kind[eid] = EventKind("send", to)
                in_flight.append((eid, to))
                prev = last[b]
                val[eid] = dict(val[prev]) if prev is not None else {}
            elif r < p.message_prob + 0.15:
                kind[eid] = EventKind("choice")
                prev = last[b]
                val[eid] = dict(val[prev]) if prev is not None else {}
            else:
                kind[eid] = EventKind("act")
                val[eid] = _random_valuation(rng, p)

        pid[eid] = b
        if last[b] is not None:
            succ[last[b]] = eid
        last[b] = eid

    return Msc(
        lifelines=lifelines,
        events=tuple(range(next_id)),
        kind=kind,
        pid=pid,
        val=val,
        succ=succ,
        msg=msg,
    )


_FORMULA_STREAM = 0x6A09E667F3BCC909  # offsets formula seeds from chart seeds


def random_formula(
    rng: SplitMix64, depth: int, lifelines: tuple[str, ...], p: FuzzParams
) -> Formula:
    """One random formula (derived forms included) of at most this depth."""

    def term():
        name = f"x{rng.randint(0, p.var_alphabet - 1)}"
        if rng.random() < 0.5:
            return AtField(rng.choice(lifelines), name)
        return LocalVar(name)

    def atom() -> Formula:
        op = rng.choice(("==", "!=", "<", "<=", ">", ">="))
        if rng.random() < 0.6:
            left, right = term(), Lit(rng.choice(p.value_alphabet))
        elif rng.random() < 0.5:
            left, right = Lit(rng.choice(p.value_alphabet)), term()
        else:
            left, right = term(), term()
        return Atom(op, left, right)

    def gen(d: int) -> Formula:
        leafs = ("atom", "atom", "true", "seen")
        inner = (
            "atom",
            "not",
            "and",
            "or",
            "yesterday",
            "since",
            "at",
            "past_at",
            "past_any",
            "seen",
            "true",
        )
        pick = rng.choice(leafs if d == 0 else inner)
        if pick == "atom":
            return atom()
        if pick == "true":
            return Truth()
        if pick == "seen":
            return Seen(rng.choice(lifelines))
        if pick == "not":
            return Not(gen(d - 1))
        if pick == "and":
            return And(gen(d - 1), gen(d - 1))
        if pick == "or":
            return Or(gen(d - 1), gen(d - 1))
        if pick == "yesterday":
            return Yesterday(gen(d - 1))
        if pick == "since":
            return Since(gen(d - 1), gen(d - 1))
        if pick == "at":
            return At(rng.choice(lifelines), gen(d - 1))
        if pick == "past_at":
            return PastAt(rng.choice(lifelines), gen(d - 1))
        return PastAny(gen(d - 1))

    return gen(depth)


def gen_random_formulas(p: FuzzParams, lifelines: tuple[str, ...]) -> GuardSet:
    """A random guard set (expanded and closed), deterministic per seed and
    independent of the chart stream for the same seed."""
    rng = SplitMix64(p.seed ^ _FORMULA_STREAM)
    formulas = [
        expand_derived(
            random_formula(rng, rng.randint(0, p.formula_depth), lifelines, p),
            lifelines,
        )
        for _ in range(p.formula_count)
    ]
    return close_guards(formulas)


# ---------------------------------------------------------------------- #
# Differential checking
# ---------------------------------------------------------------------- #

def causal_past_sets(m: Msc) -> dict[int, set[int]]:
    """Reflexive causal past of every event via BFS over reversed edges.

    Deliberately independent of the vector-timestamp machinery: this is
    the reachability oracle the clock invariants are checked against.
    """
    preds: dict[int, list[int]] = {e: [] for e in m.events}
    for src, dst in list(m.succ.items()) + list(m.msg.items()):
        preds[dst].append(src)
    past: dict[int, set[int]] = {}
    for e in m.events:
        seen = {e}
        frontier = [e]
        while frontier:
            cur = frontier.pop()
            for q in preds[cur]:
                if q not in seen:
                    seen.add(q)
                    frontier.append(q)
        past[e] = seen
    return past


@dataclass
class DifferentialReport:
    """All divergences one replay produced (empty lists mean agreement)."""

    mismatches: list[dict] = field(default_factory=list)
    coherence_failures: list[dict] = field(default_factory=list)
    invariant_failures: list[dict] = field(default_factory=list)
    events_checked: int = 0
    pairs_checked: int = 0

    @property
    def ok(self) -> bool:
        return not (
            self.mismatches or self.coherence_failures or self.invariant_failures
        )

    def to_dict(self) -> dict:
        return {
            "mismatches": self.mismatches,
            "coherence_failures": self.coherence_failures,
            "invariant_failures": self.invariant_failures,
            "events_checked": self.events_checked,
            "pairs_checked": self.pairs_checked,
        }


def differential_check(
    m: Msc,
    g: GuardSet,
    extension: list[int],
    mutation: str | None = None,
    fail_fast: bool = False,
) -> DifferentialReport:
    """Replay the chart along ``extension`` and verify, at every event:

    * every subformula value the monitor computed equals the denotational
      truth at that event (exact Boolean equality),
    * the monitor state was coherent before the evaluation phase,
    * after the update, clocks match BFS causal-past counts, view/value
      rows exist exactly for causally seen lifelines, and describe the
      latest visible event of each.
    """
    report = DifferentialReport()
    if not extension and not m.events:
        return report
    if not m.is_linear_extension(extension):
        raise ScenarioError("supplied order is not a linear extension")

    rows = sat_table(m, g)
    past = causal_past_sets(m)
    counts: dict[int, dict[str, int]] = {
        e: {b: 0 for b in m.lifelines} for e in m.events
    }
    for e in m.events:
        for f in past[e]:
            counts[e][m.pid[f]] += 1
    by_lifeline = {b: m.events_of(b) for b in m.lifelines}

    monitors = {b: init_monitor(b, g, m.lifelines) for b in m.lifelines}
    payloads: dict[int, MessagePayload] = {}
    nsub = len(g.sub)

    for e in extension:
        owner = m.pid[e]
        state = monitors[owner]
        desc = _descriptor(m, e, None, payloads)
        begin_event(state, desc, mutation)

        coherence = check_coherence(state, m, e, denot_rows=rows, counts=counts[e])
        if not coherence.ok:
            report.coherence_failures.append(
                {"event": e, "failures": coherence.failures()}
            )
            if fail_fast:
                return report

        payload = finish_event(state, desc, mutation)
        if payload is not None:
            payloads[e] = payload

        report.events_checked += 1
        report.pairs_checked += nsub
        expected = rows[e]
        if state.vals != expected:
            for i in range(nsub):
                if state.vals[i] != expected[i]:
                    report.mismatches.append(
                        {
                            "event": e,
                            "formula": pretty(g.sub[i]),
                            "sub_index": i,
                            "monitor": state.vals[i],
                            "oracle": expected[i],
                        }
                    )
            if fail_fast:
                return report

        bad = _post_update_invariants(state, m, e, counts[e], rows, by_lifeline, g)
        if bad:
            report.invariant_failures.append({"event": e, "failures": bad})
            if fail_fast:
                return report

    return report


def _post_update_invariants(
    state: MonitorState,
    m: Msc,
    e: int,
    counts: dict[str, int],
    rows: dict[int, tuple[bool, ...]],
    by_lifeline: dict[str, tuple[int, ...]],
    g: GuardSet,
) -> list[str]:
    """Post-update invariants: exact clocks, presence rule, row contents."""
    bad: list[str] = []
    for b in m.lifelines:
        k = state.vc.get(b, 0)
        if k != counts[b]:
            bad.append(f"clock[{b}] = {k}, causal past has {counts[b]}")
            continue
        if k == 0:
            if b in state.view or b in state.var:
                bad.append(f"rows present for unseen lifeline {b}")
            continue
        if b not in state.view or b not in state.var:
            bad.append(f"rows absent for seen lifeline {b}")
            continue
        target = by_lifeline[b][k - 1]
        if state.view[b] != rows[target]:
            bad.append(f"view row for {b} differs from event {target}")
        expected_vars = {
            x: m.val[target][x] for x in g.cross_vars if x in m.val[target]
        }
        row = state.var[b]
        if set(row) != set(expected_vars) or not all(
            values_equal(row[x], expected_vars[x]) for x in row
        ):
            bad.append(f"value row for {b} differs from event {target}")
    return bad


# ---------------------------------------------------------------------- #
# Fuzz sweeps
# ---------------------------------------------------------------------- #

@dataclass
class FuzzSummary:
    instances: int = 0
    runs: int = 0
    events_checked: int = 0
    pairs_checked: int = 0
    mismatches: list[dict] = field(default_factory=list)
    coherence_failures: list[dict] = field(default_factory=list)
    invariant_failures: list[dict] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not (
            self.mismatches or self.coherence_failures or self.invariant_failures
        )

    def to_dict(self) -> dict:
        return {
            "instances": self.instances,
            "runs": self.runs,
            "events_checked": self.events_checked,
            "pairs_checked": self.pairs_checked,
            "mismatch_count": len(self.mismatches),
            "coherence_failure_count": len(self.coherence_failures),
            "invariant_failure_count": len(self.invariant_failures),
            "mismatches": self.mismatches[:20],
            "coherence_failures": self.coherence_failures[:20],
            "invariant_failures": self.invariant_failures[:20],
            "elapsed_seconds": round(self.elapsed, 3),
            "ok": self.ok,
        }


def fuzz_instance(
    p: FuzzParams, extensions: int, mutation: str | None = None,
    fail_fast: bool = True,
) -> FuzzSummary:
    """One generated chart + guard set, checked along several schedules."""
    summary = FuzzSummary(instances=1)
    m = gen_random_msc(p)
    g = gen_random_formulas(p, m.lifelines)
    schedule_rng = SplitMix64(p.seed ^ 0xA5A5A5A5A5A5A5A5)
    for _ in range(extensions):
        ext = sample_linear_extension(m, schedule_rng.next_u64())
        rep = differential_check(m, g, ext, mutation, fail_fast=fail_fast)
        summary.runs += 1
        summary.events_checked += rep.events_checked
        summary.pairs_checked += rep.pairs_checked
        for rec in rep.mismatches:
            summary.mismatches.append({"seed": p.seed, **rec})
        for rec in rep.coherence_failures:
            summary.coherence_failures.append({"seed": p.seed, **rec})
        for rec in rep.invariant_failures:
            summary.invariant_failures.append({"seed": p.seed, **rec})
        if fail_fast and not summary.ok:
            break
    return summary


def fuzz_sweep(
    base: FuzzParams,
    seeds: int,
    extensions: int,
    mutation: str | None = None,
    keep_going: bool = False,
    jobs: int = 1,
) -> FuzzSummary:
    """Differential sweep over ``seeds`` generated instances.

    Seeds are derived from ``base.seed`` by a split stream, so any failing
    instance replays exactly. Stops at the first divergence unless
    ``keep_going``; ``jobs > 1`` distributes instances over processes
    (results are aggregated in seed order either way).
    """
    started = time.monotonic()
    seed_rng = SplitMix64(base.seed)
    derived = [seed_rng.next_u64() for _ in range(seeds)]
    total = FuzzSummary()

    if jobs > 1 and seeds > 1:
        from concurrent.futures import ProcessPoolExecutor

        args = [
            (_params_with_seed(base, s), extensions, mutation, not keep_going)
            for s in derived
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_fuzz_instance_star, args))
        for part in results:
            _merge(total, part)
            if not keep_going and not total.ok:
                break
    else:
        for s in derived:
            part = fuzz_instance(
                _params_with_seed(base, s), extensions, mutation, not keep_going
            )
            _merge(total, part)
            if not keep_going and not total.ok:
                break

    total.elapsed = time.monotonic() - started
    return total


def _params_with_seed(base: FuzzParams, seed: int) -> FuzzParams:
    return FuzzParams(
        lifelines=base.lifelines,
        events_per_lifeline=base.events_per_lifeline,
        message_prob=base.message_prob,
        var_alphabet=base.var_alphabet,
        value_alphabet=base.value_alphabet,
        formula_depth=base.formula_depth,
        formula_count=base.formula_count,
        seed=seed,
    )


def _fuzz_instance_star(args) -> FuzzSummary:
    return fuzz_instance(*args)


def _merge(total: FuzzSummary, part: FuzzSummary) -> None:
    total.instances += part.instances
    total.runs += part.runs
    total.events_checked += part.events_checked
    total.pairs_checked += part.pairs_checked
    total.mismatches.extend(part.mismatches)
    total.coherence_failures.extend(part.coherence_failures)
    total.invariant_failures.extend(part.invariant_failures)
