"""Per-lifeline online monitor.

Each lifeline keeps a vector clock, latest-value views of every lifeline,
its current store, and a snapshot of the previous event's subformula
values. Messages piggyback the sender's clock and views, so a receiver
can adopt whatever the sender knew more recently than itself.

Processing one event runs in two phases:

  1. ``begin_event`` — on a receive, copy the view/value rows of every
     lifeline the message is strictly ahead on, then join the clocks;
     snapshot the previous subformula values; tick the local clock
     component; install the post-event store and mirror monitored
     variables into the local value row.
  2. ``finish_event`` — evaluate every subformula bottom-up against the
     updated state, publish the results as the local view row, and (on a
     send) emit a payload carrying deep snapshots of clock and views.

The copy-then-join order in phase 1 matters: joining first would destroy
the "is the sender ahead?" test. ``mutation`` arguments deliberately break
one such detail each, to prove the differential harness notices; see
:data:`MUTATIONS`.

View rows are tuples aligned with the guard set's subformula list, value
rows are small dicts; a row for lifeline ``B`` exists exactly when the
clock component for ``B`` is positive. Each state is owned by one logical
lifeline and is mutated only by its own event processing; everything that
crosses monitors is an immutable payload snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .denot import compare_values, sat_table
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
    Since,
    Truth,
    Yesterday,
)
from .msc import EventKind, Msc, Valuation, Value, values_equal
from .trace import decode_value, encode_value

Row = tuple[bool, ...]

#: Deliberate algorithm defects selectable in fuzzing, each breaking one
#: detail the correct update fixes:
#:   swap-merge-order — join vector clocks before copying rows, so the
#:       ahead-test never fires and remote views go stale;
#:   strict-at        — evaluate at(Me, f) at the previous local event
#:       instead of the current one;
#:   live-old         — let Y read this event's freshly computed values
#:       instead of the previous-event snapshot.
MUTATIONS = ("swap-merge-order", "strict-at", "live-old")


class MonitorError(Exception):
    """Raised on misuse: bad descriptors, formulas outside the guard set."""


@dataclass
class MessagePayload:
    """Metadata piggybacked on one message: the sender's clock and both
    latest-value tables, snapshotted at send time, plus opaque data."""

    vc: dict[str, int]
    view: dict[str, Row]
    var: dict[str, dict[str, Value]]
    payload: str = ""

    def to_wire(self) -> dict:
        """JSON encoding: view/var tables as (lifeline, key, value) triples."""
        return {
            "vc": dict(sorted(self.vc.items())),
            "view": [
                [b, i, v]
                for b in sorted(self.view)
                for i, v in enumerate(self.view[b])
            ],
            "var": [
                [b, x, encode_value(v)]
                for b in sorted(self.var)
                for x, v in sorted(self.var[b].items())
            ],
            "payload": self.payload,
        }

    @classmethod
    def from_wire(cls, data: dict, subformula_count: int) -> "MessagePayload":
        vc = {str(b): int(n) for b, n in data["vc"].items()}
        rows: dict[str, list[bool | None]] = {}
        for b, i, v in data["view"]:
            rows.setdefault(b, [None] * subformula_count)[i] = bool(v)
        view: dict[str, Row] = {}
        for b, row in rows.items():
            if any(v is None for v in row):
                raise MonitorError(f"incomplete view row for lifeline {b!r}")
            view[b] = tuple(row)
        var: dict[str, dict[str, Value]] = {}
        for b, x, v in data["var"]:
            var.setdefault(b, {})[x] = decode_value(v)
        payload = cls(vc=vc, view=view, var=var, payload=data.get("payload", ""))
        for b in set(view) | set(var):
            if payload.vc.get(b, 0) == 0:
                raise MonitorError(f"payload has entries for unseen lifeline {b!r}")
        return payload


@dataclass
class EventDescriptor:
    """What the monitor is told about one event of its own lifeline.

    ``store_after`` is the local store after the event (sends and choice
    events conventionally leave the store unchanged). ``guard_index``
    points into the guard list and may only be set on choice events;
    ``incoming`` carries the matched message's payload on receives.
    """

    kind: EventKind
    store_after: Valuation
    guard_index: int | None = None
    incoming: MessagePayload | None = None
    payload: str = ""


@dataclass
class MonitorState:
    """Runtime state of one lifeline's monitor."""

    me: str
    guards: GuardSet
    lifelines: tuple[str, ...]
    vc: dict[str, int]
    view: dict[str, Row] = field(default_factory=dict)
    var: dict[str, dict[str, Value]] = field(default_factory=dict)
    store: Valuation = field(default_factory=dict)
    old: Row = ()
    vals: Row | None = None

    @property
    def last_vals(self) -> dict[int, bool]:
        """Most recent verdict per guard (by position in the guard list)."""
        if self.vals is None:
            return {}
        return {
            i: self.vals[self.guards.index[f]]
            for i, f in enumerate(self.guards.formulas)
        }


def init_monitor(
    me: str, guards: GuardSet, lifelines: tuple[str, ...] | list[str]
) -> MonitorState:
    """Fresh monitor: zero clock, no view/value rows, empty store."""
    if me not in lifelines:
        raise MonitorError(f"{me!r} is not a declared lifeline")
    return MonitorState(
        me=me,
        guards=guards,
        lifelines=tuple(lifelines),
        vc={b: 0 for b in lifelines},
        old=(False,) * len(guards.sub),
    )


def begin_event(
    s: MonitorState, d: EventDescriptor, mutation: str | None = None
) -> None:
    """Phase 1 of the event update: merge, snapshot, tick, install store."""
    if mutation is not None and mutation not in MUTATIONS:
        raise MonitorError(f"unknown mutation {mutation!r}")
    _check_descriptor(s, d)
    if d.kind.tag == "recv":
        mu = d.incoming
        if mutation == "swap-merge-order":
            for b in s.lifelines:
                s.vc[b] = max(s.vc[b], mu.vc.get(b, 0))
        for b in s.lifelines:
            if mu.vc.get(b, 0) > s.vc[b]:
                # The sender is strictly ahead on b: adopt its rows wholesale
                # (entries the sender lacks must disappear here too).
                s.view[b] = mu.view[b]
                s.var[b] = dict(mu.var.get(b, {}))
        for b in s.lifelines:
            s.vc[b] = max(s.vc[b], mu.vc.get(b, 0))

    me_row = s.view.get(s.me)
    s.old = me_row if me_row is not None else (False,) * len(s.guards.sub)

    s.vc[s.me] += 1
    s.store = dict(d.store_after)
    s.var[s.me] = {
        x: s.store[x] for x in s.guards.cross_vars if x in s.store
    }


def finish_event(
    s: MonitorState, d: EventDescriptor, mutation: str | None = None
) -> MessagePayload | None:
    """Phase 2: evaluate all subformulas, publish the local row, emit."""
    memo: dict[int, bool] = {}
    for f in s.guards.sub:
        eval_local(s, f, s.old, memo, mutation)
    s.vals = tuple(memo[i] for i in range(len(s.guards.sub)))
    s.view[s.me] = s.vals

    if d.kind.tag == "send":
        return MessagePayload(
            vc=dict(s.vc),
            view=dict(s.view),
            var={b: dict(row) for b, row in s.var.items()},
            payload=d.payload,
        )
    return None


def on_event(
    s: MonitorState, d: EventDescriptor, mutation: str | None = None
) -> tuple[MonitorState, MessagePayload | None]:
    """Process one event of this monitor's lifeline; returns the (mutated)
    state and, for sends, the payload to attach to the outgoing message."""
    begin_event(s, d, mutation)
    return s, finish_event(s, d, mutation)


def _check_descriptor(s: MonitorState, d: EventDescriptor) -> None:
    if d.kind.tag == "recv" and d.incoming is None:
        raise MonitorError("receive event without an incoming payload")
    if d.kind.tag != "recv" and d.incoming is not None:
        raise MonitorError("incoming payload on a non-receive event")
    if d.kind.tag == "send" and d.kind.receiver == s.me:
        raise MonitorError("send event addressed to its own lifeline")
    if d.guard_index is not None and d.kind.tag != "choice":
        raise MonitorError("guard attached to a non-choice event")


def eval_local(
    s: MonitorState,
    f: Formula,
    old: Row,
    memo: dict[int, bool] | None = None,
    mutation: str | None = None,
) -> bool:
    """Truth of one guard-set subformula against the mid-update state.

    Call between :func:`begin_event` and :func:`finish_event` (or rely on
    :func:`on_event`, which records all results). ``old`` holds the
    previous event's subformula values, indexed like the guard set.
    """
    idx = s.guards.index.get(f)
    if idx is None:
        raise MonitorError("formula is not in the closed guard set")
    if memo is not None and idx in memo:
        return memo[idx]

    if isinstance(f, Truth):
        v = True
    elif isinstance(f, Atom):
        v = compare_values(f.op, _operand(s, f.left), _operand(s, f.right))
    elif isinstance(f, Not):
        v = not eval_local(s, f.body, old, memo, mutation)
    elif isinstance(f, And):
        v = eval_local(s, f.left, old, memo, mutation) and eval_local(
            s, f.right, old, memo, mutation
        )
    elif isinstance(f, Or):
        v = eval_local(s, f.left, old, memo, mutation) or eval_local(
            s, f.right, old, memo, mutation
        )
    elif isinstance(f, Yesterday):
        v = s.vc[s.me] > 1 and _old_value(s, f.body, old, memo, mutation)
    elif isinstance(f, At):
        if f.lifeline == s.me:
            if mutation == "strict-at":
                v = s.vc[s.me] > 1 and _old_value(s, f.body, old, memo, mutation)
            else:
                v = eval_local(s, f.body, old, memo, mutation)
        elif s.vc.get(f.lifeline, 0) == 0:
            v = False
        else:
            row = s.view.get(f.lifeline)
            # Row presence follows the clock in every reachable state; a
            # mutated monitor can get here with no row, which must surface
            # as a wrong verdict rather than a crash.
            v = row is not None and row[s.guards.index[f.body]]
    elif isinstance(f, Since):
        prev = s.vc[s.me] > 1 and old[idx]
        v = eval_local(s, f.second, old, memo, mutation) or (
            eval_local(s, f.first, old, memo, mutation) and prev
        )
    else:
        raise MonitorError(f"formula is not core: {f!r}")

    if memo is not None:
        memo[idx] = v
    return v


def _old_value(
    s: MonitorState,
    f: Formula,
    old: Row,
    memo: dict[int, bool] | None,
    mutation: str | None,
) -> bool:
    idx = s.guards.index[f]
    if mutation == "live-old" and memo is not None and idx in memo:
        return memo[idx]
    return old[idx]


def _operand(s: MonitorState, x: Lit | LocalVar | AtField) -> Value | None:
    if isinstance(x, Lit):
        return x.value
    if isinstance(x, LocalVar):
        return s.store.get(x.name)
    row = s.var.get(x.lifeline)
    if row is None:
        return None
    return row.get(x.name)


# ---------------------------------------------------------------------- #
# Coherence diagnostics
# ---------------------------------------------------------------------- #

@dataclass(frozen=True)
class CoherenceReport:
    """Outcome of the four coherence conditions, with failure details."""

    conditions: dict[str, tuple[bool, str]]  # "i".."iv" -> (ok, detail)

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.conditions.values())

    def failures(self) -> list[str]:
        return [
            f"({name}) {detail}"
            for name, (ok, detail) in self.conditions.items()
            if not ok
        ]


def check_coherence(
    s: MonitorState,
    m: Msc,
    e: int | None,
    denot_rows: dict[int, tuple[bool, ...]] | None = None,
    counts: dict[str, int] | None = None,
) -> CoherenceReport:
    """Does this state correctly describe the causal past of ``e``?

    The state is expected mid-update, after :func:`begin_event` for ``e``
    and before :func:`finish_event` (the clock already counts ``e``).
    Checks, per condition:

      (i)   each clock component equals the number of that lifeline's
            events causally below ``e``;
      (ii)  for every other lifeline, view/value rows exist exactly when
            the clock is positive and then describe its latest visible
            event;
      (iii) the store induces the event's valuation on monitored
            variables, and the local value row mirrors it;
      (iv)  the previous-event snapshot holds the subformula values at the
            previous local event (all false when there is none).

    ``e=None`` checks the empty-prefix base case of a fresh monitor.
    ``denot_rows``/``counts`` let callers reuse precomputed oracle data.
    """
    gs = s.guards
    if e is None:
        zero = all(n == 0 for n in s.vc.values())
        empty = not s.view and not s.var
        blank = not any(s.old)
        return CoherenceReport(
            {
                "i": (zero, "" if zero else "clock nonzero before any event"),
                "ii": (empty, "" if empty else "view/value rows before any event"),
                "iii": (not s.store, "" if not s.store else "store set before any event"),
                "iv": (blank, "" if blank else "previous-event snapshot not all-false"),
            }
        )

    if m.pid[e] != s.me:
        raise MonitorError(f"event {e} is not on lifeline {s.me!r}")
    if counts is None:
        counts = {
            b: sum(1 for f in m.events_of(b) if m.causal_leq(f, e))
            for b in m.lifelines
        }
    if denot_rows is None:
        denot_rows = sat_table(m, gs)

    i_bad = [
        f"{b}: clock {s.vc.get(b, 0)} != causal past {counts[b]}"
        for b in m.lifelines
        if s.vc.get(b, 0) != counts[b]
    ]

    ii_bad: list[str] = []
    for b in m.lifelines:
        if b == s.me:
            continue
        k = s.vc.get(b, 0)
        has_view, has_var = b in s.view, b in s.var
        if k == 0:
            if has_view or has_var:
                ii_bad.append(f"{b}: rows present at clock 0")
            continue
        if not has_view or not has_var:
            ii_bad.append(f"{b}: rows absent at clock {k}")
            continue
        target = m.events_of(b)[k - 1]
        if s.view[b] != denot_rows[target]:
            ii_bad.append(f"{b}: view row differs from event {target}")
        if not _var_row_matches(s.var[b], m.val[target], gs.cross_vars):
            ii_bad.append(f"{b}: value row differs from event {target}")

    iii_bad: list[str] = []
    nu = m.val[e]
    for x in sorted(gs.local_vars | gs.cross_vars):
        if not values_equal(s.store.get(x), nu.get(x)):
            iii_bad.append(f"store[{x}] != valuation at {e}")
    if not _var_row_matches(s.var.get(s.me, {}), nu, gs.cross_vars):
        iii_bad.append("local value row does not mirror the valuation")

    prev = m.last_loc(e)
    expected_old = denot_rows[prev] if prev is not None else (False,) * len(gs.sub)
    iv_bad = [] if s.old == expected_old else ["previous-event snapshot is wrong"]

    return CoherenceReport(
        {
            "i": (not i_bad, "; ".join(i_bad)),
            "ii": (not ii_bad, "; ".join(ii_bad)),
            "iii": (not iii_bad, "; ".join(iii_bad)),
            "iv": (not iv_bad, "; ".join(iv_bad)),
        }
    )


def _var_row_matches(
    row: dict[str, Value], valuation: Valuation, cross_vars: frozenset[str]
) -> bool:
    expected = {x: valuation[x] for x in cross_vars if x in valuation}
    if set(row) != set(expected):
        return False
    return all(values_equal(row[x], expected[x]) for x in row)
