"""Denotational guard semantics over a complete chart.

This is the ground truth the online monitors are measured against. A
term's value at an event is partial: an unqualified variable reads the
event's own valuation, ``At[A].x`` reads the valuation at the latest
visible ``A``-event. An atom with any undefined operand, a tag mismatch,
or an order comparison on non-integers is false.

``Y f`` is false at the first event of a lifeline; ``at(A, f)`` is false
when no ``A``-event is visible, and otherwise evaluates ``f`` at the
latest visible one (the current event itself when already on ``A``).
``f1 S f2`` looks back along the current lifeline only.

Evaluation fills a table over (event, subformula) pairs bottom-up, so a
full chart costs O(|events| * |subformulas|) plus navigation.
"""

from __future__ import annotations

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
    Operand,
    Or,
    Since,
    Truth,
    Yesterday,
    close_guards,
    is_core,
)
from .msc import Msc, Value


def eval_term(m: Msc, e: int, t: LocalVar | AtField) -> Value | None:
    """Value of a term at an event, or None when undefined."""
    m._check_event(e)
    if isinstance(t, LocalVar):
        return m.val[e].get(t.name)
    lv = m.last_visible(e, t.lifeline)
    if lv is None:
        return None
    return m.val[lv].get(t.name)


def _operand_value(m: Msc, e: int, x: Operand) -> Value | None:
    if isinstance(x, Lit):
        return x.value
    return eval_term(m, e, x)


def compare_values(op: str, a: Value | None, b: Value | None) -> bool:
    """Atom comparison with the undefined-is-false rule.

    Undefined operands, mismatched tags, and order comparisons on
    anything but two integers all yield false (including ``!=``).
    """
    if a is None or b is None:
        return False
    if op == "==":
        return type(a) is type(b) and a == b
    if op == "!=":
        return type(a) is type(b) and a != b
    if type(a) is not int or type(b) is not int:
        return False
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(f"unknown comparison {op!r}")


def eval_atom(m: Msc, e: int, a: Atom) -> bool:
    m._check_event(e)
    return compare_values(
        a.op, _operand_value(m, e, a.left), _operand_value(m, e, a.right)
    )


def sat_table(m: Msc, gs: GuardSet) -> dict[int, tuple[bool, ...]]:
    """Truth of every guard-set subformula at every event.

    Returns one row per event, aligned with ``gs.sub``.
    """
    cols: list[dict[int, bool]] = []
    events = m.events
    for f in gs.sub:
        col: dict[int, bool] = {}
        if isinstance(f, Truth):
            for e in events:
                col[e] = True
        elif isinstance(f, Atom):
            for e in events:
                col[e] = eval_atom(m, e, f)
        elif isinstance(f, Not):
            sub = cols[gs.index[f.body]]
            for e in events:
                col[e] = not sub[e]
        elif isinstance(f, And):
            lcol, rcol = cols[gs.index[f.left]], cols[gs.index[f.right]]
            for e in events:
                col[e] = lcol[e] and rcol[e]
        elif isinstance(f, Or):
            lcol, rcol = cols[gs.index[f.left]], cols[gs.index[f.right]]
            for e in events:
                col[e] = lcol[e] or rcol[e]
        elif isinstance(f, Yesterday):
            sub = cols[gs.index[f.body]]
            for e in events:
                prev = m.last_loc(e)
                col[e] = prev is not None and sub[prev]
        elif isinstance(f, At):
            sub = cols[gs.index[f.body]]
            for e in events:
                lv = m.last_visible(e, f.lifeline)
                col[e] = lv is not None and sub[lv]
        elif isinstance(f, Since):
            fcol, scol = cols[gs.index[f.first]], cols[gs.index[f.second]]
            for b in m.lifelines:
                cur = False
                for e in m.events_of(b):
                    cur = scol[e] or (fcol[e] and cur)
                    col[e] = cur
        else:
            raise ValueError(f"formula is not core: {f!r}")
        cols.append(col)
    return {e: tuple(col[e] for col in cols) for e in events}


def sat(m: Msc, e: int, f: Formula) -> bool:
    """Does the chart satisfy ``f`` at event ``e``? Core formulas only."""
    m._check_event(e)
    if not is_core(f):
        raise ValueError("formula contains derived forms; expand first")
    gs = close_guards([f])
    return sat_table(m, gs)[e][gs.index[f]]
