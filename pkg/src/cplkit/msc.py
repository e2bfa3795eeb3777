"""Message sequence charts: events on lifelines, message matching, causal order.

A chart is a finite partially ordered execution. Each lifeline owns a
linearly ordered sequence of events (the ``succ`` chain); matched
send/receive pairs add cross-lifeline edges. The causal order ``<=_M`` is
the reflexive transitive closure of both edge kinds, and is a partial
order whenever the chart is well-formed.

Charts are immutable after validation; every query here is read-only and
safe to call from any number of threads. Causal queries are answered from
per-event vector timestamps computed once per chart: component ``B`` of an
event's timestamp counts the ``B``-events in its causal past (including
the event itself on its own lifeline), so ``e <=_M f`` reduces to one
integer comparison.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

#: Stored values are plain tagged scalars. Tags never coerce: an integer 1
#: and a boolean true are different values, so every comparison goes
#: through exact ``type()`` checks, never isinstance (bool subclasses int).
Value = int | str | bool

#: A valuation maps variable names to values; a missing key is the
#: distinguished "undefined" outcome, not an error.
Valuation = dict[str, Value]

EVENT_TAGS = ("act", "recv", "choice", "send")


class MscError(Exception):
    """Raised for queries with unknown events/lifelines or malformed charts."""


def values_equal(a: Value | None, b: Value | None) -> bool:
    """Tag-exact equality; also true when both sides are undefined (None)."""
    if a is None or b is None:
        return a is None and b is None
    return type(a) is type(b) and a == b


@dataclass(frozen=True)
class EventKind:
    """Classification of one event; ``receiver`` is set exactly for sends."""

    tag: str
    receiver: str | None = None

    def __post_init__(self) -> None:
        if self.tag not in EVENT_TAGS:
            raise MscError(f"unknown event kind {self.tag!r}")
        if (self.receiver is not None) != (self.tag == "send"):
            raise MscError("receiver must be present exactly on send events")


@dataclass
class Msc:
    """One execution: events, local succession, message matching, valuations.

    Fields mirror the chart structure directly:

    * ``lifelines`` — declared participants, in declaration order.
    * ``events`` — event ids (unique naturals; ids carry no meaning).
    * ``kind`` / ``pid`` / ``val`` — per-event classification, owner
      lifeline, and post-event valuation.
    * ``succ`` — immediate local successor (partial map).
    * ``msg`` — send id -> receive id for delivered messages; sends
      missing from this map are still in transit.
    """

    lifelines: tuple[str, ...]
    events: tuple[int, ...]
    kind: dict[int, EventKind]
    pid: dict[int, str]
    val: dict[int, Valuation]
    succ: dict[int, int]
    msg: dict[int, int]

    # Lazy per-chart analysis, built on first causal query (valid charts only).
    _by_lifeline: dict[str, list[int]] | None = field(
        default=None, repr=False, compare=False
    )
    _local_idx: dict[int, int] | None = field(default=None, repr=False, compare=False)
    _vts: dict[int, dict[str, int]] | None = field(
        default=None, repr=False, compare=False
    )
    _msg_rev: dict[int, int] | None = field(default=None, repr=False, compare=False)

    # ------------------------------------------------------------------ #
    # Navigation and order queries
    # ------------------------------------------------------------------ #

    def causal_leq(self, e: int, f: int) -> bool:
        """True iff ``e <=_M f`` (reflexive)."""
        self._check_event(e)
        self._check_event(f)
        self._ensure_analysis()
        if e == f:
            return True
        # f's causal past contains e iff it contains at least local_index(e)
        # events of e's lifeline (causal pasts are local prefixes).
        return self._vts[f].get(self.pid[e], 0) >= self._local_idx[e]

    def last_loc(self, e: int) -> int | None:
        """The immediate local predecessor of ``e``, or None if ``e`` is first."""
        self._check_event(e)
        self._ensure_analysis()
        k = self._local_idx[e]
        if k == 1:
            return None
        return self._by_lifeline[self.pid[e]][k - 2]

    def last_visible(self, e: int, b: str) -> int | None:
        """The latest event of lifeline ``b`` in the causal past of ``e``.

        Non-strict: when ``e`` is on ``b``, the answer is ``e`` itself.
        None when no ``b``-event is causally visible.
        """
        self._check_event(e)
        self._check_lifeline(b)
        self._ensure_analysis()
        k = self._vts[e].get(b, 0)
        if k == 0:
            return None
        return self._by_lifeline[b][k - 1]

    def local_index(self, e: int) -> int:
        """Position of ``e`` on its own lifeline, counting from 1."""
        self._check_event(e)
        self._ensure_analysis()
        return self._local_idx[e]

    def events_of(self, b: str) -> tuple[int, ...]:
        """Events of lifeline ``b`` in local order."""
        self._check_lifeline(b)
        self._ensure_analysis()
        return tuple(self._by_lifeline[b])

    def matching_send(self, r: int) -> int | None:
        """The send matched to receive event ``r``, if any."""
        self._check_event(r)
        self._ensure_analysis()
        return self._msg_rev.get(r)

    def is_linear_extension(self, seq: list[int]) -> bool:
        """True iff ``seq`` is a permutation of the events respecting ``<=_M``.

        Checking the generating edges (succ and msg) suffices, since the
        causal order is their reflexive transitive closure.
        """
        if sorted(seq) != sorted(self.events):
            return False
        pos = {e: i for i, e in enumerate(seq)}
        for src, dst in self.succ.items():
            if pos[src] >= pos[dst]:
                return False
        for src, dst in self.msg.items():
            if pos[src] >= pos[dst]:
                return False
        return True

    def vector_timestamp(self, e: int) -> dict[str, int]:
        """Per-lifeline causal-past counts of ``e`` (a copy)."""
        self._check_event(e)
        self._ensure_analysis()
        ts = self._vts[e]
        return {b: ts.get(b, 0) for b in self.lifelines}

    # ------------------------------------------------------------------ #
    # Internals
    # ------------------------------------------------------------------ #

    def _check_event(self, e: int) -> None:
        if e not in self.kind:
            raise MscError(f"no such event: {e}")

    def _check_lifeline(self, b: str) -> None:
        if b not in self.lifelines:
            raise MscError(f"no such lifeline: {b!r}")

    def _ensure_analysis(self) -> None:
        if self._vts is not None:
            return
        by_lifeline = self._local_chains()
        local_idx: dict[int, int] = {}
        for chain in by_lifeline.values():
            for i, e in enumerate(chain):
                local_idx[e] = i + 1
        msg_rev = {r: s for s, r in self.msg.items()}

        vts: dict[int, dict[str, int]] = {}
        for e in self._topo_order():
            ts: dict[str, int] = {}
            prev = None
            k = local_idx[e]
            if k > 1:
                prev = by_lifeline[self.pid[e]][k - 2]
                ts.update(vts[prev])
            if self.kind[e].tag == "recv" and e in msg_rev:
                for b, n in vts[msg_rev[e]].items():
                    if n > ts.get(b, 0):
                        ts[b] = n
            ts[self.pid[e]] = k
            vts[e] = ts

        self._by_lifeline = by_lifeline
        self._local_idx = local_idx
        self._msg_rev = msg_rev
        self._vts = vts

    def _local_chains(self) -> dict[str, list[int]]:
        """Reconstruct each lifeline's event chain from ``succ``; raises on
        charts where the chain structure is broken (validate first)."""
        members: dict[str, list[int]] = {b: [] for b in self.lifelines}
        for e in self.events:
            members[self.pid[e]].append(e)
        has_pred = set(self.succ.values())
        chains: dict[str, list[int]] = {}
        for b, evs in members.items():
            if not evs:
                chains[b] = []
                continue
            heads = [e for e in evs if e not in has_pred]
            if len(heads) != 1:
                raise MscError(f"lifeline {b!r} is not a single chain")
            chain = [heads[0]]
            seen = {heads[0]}
            while chain[-1] in self.succ:
                nxt = self.succ[chain[-1]]
                if nxt in seen:
                    raise MscError(f"local successor cycle on lifeline {b!r}")
                chain.append(nxt)
                seen.add(nxt)
            if len(chain) != len(evs):
                raise MscError(f"lifeline {b!r} is not a single chain")
            chains[b] = chain
        return chains

    def _topo_order(self) -> list[int]:
        indeg = {e: 0 for e in self.events}
        out: dict[int, list[int]] = {e: [] for e in self.events}
        for src, dst in list(self.succ.items()) + list(self.msg.items()):
            out[src].append(dst)
            indeg[dst] += 1
        ready = deque(sorted(e for e in self.events if indeg[e] == 0))
        order: list[int] = []
        while ready:
            e = ready.popleft()
            order.append(e)
            for f in out[e]:
                indeg[f] -= 1
                if indeg[f] == 0:
                    ready.append(f)
        if len(order) != len(self.events):
            raise MscError("event graph is cyclic")
        return order


# ---------------------------------------------------------------------- #
# Well-formedness
# ---------------------------------------------------------------------- #

@dataclass(frozen=True)
class Violation:
    """One broken well-formedness condition with its witnessing events."""

    condition: str  # "i" | "ii" | "iii" | "iv"
    detail: str
    events: tuple[int, ...] = ()


@dataclass(frozen=True)
class MscReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_msc(m: Msc) -> MscReport:
    """Check the four chart conditions; violations are data, not failures.

    (i)   local successor edges stay on one lifeline,
    (ii)  per lifeline, ``succ`` is the immediate-successor relation of a
          finite linear order,
    (iii) ``msg`` is a partial matching of sends to receives on distinct
          lifelines, with the send kind naming the receiver; every receive
          has exactly one matching send,
    (iv)  the graph of successor and message edges is acyclic.
    """
    bad: list[Violation] = []

    for src, dst in sorted(m.succ.items()):
        if m.pid.get(src) != m.pid.get(dst):
            bad.append(
                Violation("i", "local successor edge crosses lifelines", (src, dst))
            )

    # (ii): within each lifeline, in/out degree <= 1 and one covering chain.
    indeg: dict[int, int] = {e: 0 for e in m.events}
    for src, dst in m.succ.items():
        indeg[dst] = indeg.get(dst, 0) + 1
    for e, n in sorted(indeg.items()):
        if n > 1:
            bad.append(Violation("ii", "event has two local predecessors", (e,)))
    for b in m.lifelines:
        evs = [e for e in m.events if m.pid[e] == b]
        if not evs:
            continue
        edges = {
            s: d for s, d in m.succ.items() if m.pid.get(s) == b and m.pid.get(d) == b
        }
        heads = [e for e in evs if indeg.get(e, 0) == 0]
        covered: set[int] = set()
        for h in heads:
            cur = h
            covered.add(cur)
            while cur in edges and edges[cur] not in covered:
                cur = edges[cur]
                covered.add(cur)
        if len(heads) != 1 or covered != set(evs):
            bad.append(
                Violation(
                    "ii",
                    f"events of lifeline {b!r} do not form a single chain",
                    tuple(sorted(evs)),
                )
            )

    recv_matches: dict[int, int] = {}
    for s, r in sorted(m.msg.items()):
        ks, kr = m.kind.get(s), m.kind.get(r)
        if ks is None or ks.tag != "send":
            bad.append(Violation("iii", "message source is not a send event", (s, r)))
            continue
        if kr is None or kr.tag != "recv":
            bad.append(Violation("iii", "message target is not a receive event", (s, r)))
            continue
        if m.pid[s] == m.pid[r]:
            bad.append(Violation("iii", "message stays on one lifeline", (s, r)))
        if ks.receiver != m.pid[r]:
            bad.append(
                Violation("iii", "send kind names a different receiver", (s, r))
            )
        if r in recv_matches:
            bad.append(
                Violation("iii", "receive matched by two sends", (recv_matches[r], s, r))
            )
        recv_matches[r] = s
    for e in sorted(m.events):
        if m.kind[e].tag == "recv" and e not in recv_matches:
            bad.append(Violation("iii", "receive event has no matching send", (e,)))

    if _has_cycle(m):
        bad.append(Violation("iv", "successor/message graph is cyclic"))

    return MscReport(tuple(bad))


def _has_cycle(m: Msc) -> bool:
    indeg = {e: 0 for e in m.events}
    out: dict[int, list[int]] = {e: [] for e in m.events}
    for src, dst in list(m.succ.items()) + list(m.msg.items()):
        if src in indeg and dst in indeg:
            out[src].append(dst)
            indeg[dst] += 1
    ready = deque(e for e in m.events if indeg[e] == 0)
    seen = 0
    while ready:
        e = ready.popleft()
        seen += 1
        for f in out[e]:
            indeg[f] -= 1
            if indeg[f] == 0:
                ready.append(f)
    return seen != len(m.events)
