"""Guard language: syntax tree, concrete parser, derived-form expansion.

Terms read either the local store (``Here.x``, or a bare ``x``) or the
latest causally visible value of a variable on another lifeline
(``At[B].x``). Atoms compare two operands with ``== != < <= > >=``; at
least one operand must be a term. Formulas combine atoms with::

    !f        negation                  f1 && f2   conjunction
    f1 || f2  disjunction               Y(f)       previous local event
    f1 S f2   since, along the          at(B, f)   f at the latest visible
              local order                          event of B
    true      constant
    P(f)      somewhere in the causal past (any lifeline)   [derived]
    P[B](f)   somewhere in B's visible history              [derived]
    seen(B)   some B-event is visible                       [derived]

Operator precedence, tightest first: ``!``, ``S`` (right-associative),
``&&``, ``||``. Note that ``S`` binds tighter than the Boolean
connectives, so ``a S b && c`` means ``(a S b) && c``; parenthesize when
in doubt. ``!`` applies to formulas, never to terms, so ``!Here.x == 1``
negates the whole comparison.

Equality and inequality are defined only between values of the same tag;
order comparisons only between integers. Any other combination, or an
undefined operand, makes the atom false.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterator, Union

# ---------------------------------------------------------------------- #
# Syntax tree
# ---------------------------------------------------------------------- #

@dataclass(frozen=True)
class LocalVar:
    name: str


@dataclass(frozen=True)
class AtField:
    lifeline: str
    name: str


@dataclass(frozen=True, eq=False)
class Lit:
    """Literal operand. Equality and hashing are tag-exact so that an
    integer literal never collides with a boolean one."""

    value: int | str | bool

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Lit)
            and type(other.value) is type(self.value)
            and other.value == self.value
        )

    def __hash__(self) -> int:
        return hash((type(self.value).__name__, self.value))


Operand = Union[LocalVar, AtField, Lit]

COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Truth:
    pass


@dataclass(frozen=True)
class Atom:
    op: str
    left: Operand
    right: Operand


@dataclass(frozen=True)
class At:
    lifeline: str
    body: "Formula"


@dataclass(frozen=True)
class Yesterday:
    body: "Formula"


@dataclass(frozen=True)
class Since:
    first: "Formula"
    second: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class PastAt:
    lifeline: str
    body: "Formula"


@dataclass(frozen=True)
class PastAny:
    body: "Formula"


@dataclass(frozen=True)
class Seen:
    lifeline: str


Formula = Union[
    Truth, Atom, At, Yesterday, Since, And, Or, Not, PastAt, PastAny, Seen
]

CORE_NODES = (Truth, Atom, At, Yesterday, Since, And, Or, Not)
DERIVED_NODES = (PastAt, PastAny, Seen)


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (At, Yesterday, Not, PastAt, PastAny)):
        return (f.body,)
    if isinstance(f, Since):
        return (f.first, f.second)
    if isinstance(f, (And, Or)):
        return (f.left, f.right)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    """All nodes of the tree, parents before children."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(children(node))


def is_core(f: Formula) -> bool:
    return all(not isinstance(n, DERIVED_NODES) for n in walk(f))


# ---------------------------------------------------------------------- #
# Parsing
# ---------------------------------------------------------------------- #

class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


_KEYWORDS = {"Y", "S", "at", "P", "seen", "true", "false", "Here", "At"}

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<int>-?\d+)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>==|!=|<=|>=|&&|\|\||[!<>()\[\],.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # int | string | ident | op | end
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        piece = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, piece, line, col))
        newlines = piece.count("\n")
        if newlines:
            line += newlines
            col = len(piece) - piece.rfind("\n")
        else:
            col += len(piece)
        pos = m.end()
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, lifelines: frozenset[str]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.lifelines = lifelines

    # -- token plumbing -------------------------------------------------

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> _Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> _Token:
        tok = self.cur
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.cur.text != text or self.cur.kind == "end":
            raise self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, message: str) -> ParseError:
        return ParseError(message, self.cur.line, self.cur.col)

    def lifeline(self) -> str:
        tok = self.cur
        if tok.kind != "ident":
            raise self.fail("expected a lifeline name")
        if tok.text not in self.lifelines:
            raise self.fail(f"unknown lifeline {tok.text!r}")
        self.advance()
        return tok.text

    def ident_after_dot(self) -> str:
        # Variable names after '.' may shadow keywords; context disambiguates.
        tok = self.cur
        if tok.kind != "ident":
            raise self.fail("expected a variable name")
        self.advance()
        return tok.text

    # -- grammar ---------------------------------------------------------

    def formula(self) -> Formula:
        f = self.or_expr()
        if self.cur.kind != "end":
            raise self.fail(f"unexpected {self.cur.text!r}")
        return f

    def or_expr(self) -> Formula:
        f = self.and_expr()
        while self.cur.text == "||":
            self.advance()
            f = Or(f, self.and_expr())
        return f

    def and_expr(self) -> Formula:
        f = self.since_expr()
        while self.cur.text == "&&":
            self.advance()
            f = And(f, self.since_expr())
        return f

    def since_expr(self) -> Formula:
        f = self.unary()
        if self.cur.kind == "ident" and self.cur.text == "S":
            self.advance()
            return Since(f, self.since_expr())
        return f

    def unary(self) -> Formula:
        if self.cur.text == "!" and self.cur.kind == "op":
            self.advance()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        tok = self.cur
        if tok.text == "(":
            self.advance()
            f = self.or_expr()
            self.expect(")")
            return f
        if tok.kind == "ident":
            if tok.text == "Y":
                self.advance()
                self.expect("(")
                body = self.or_expr()
                self.expect(")")
                return Yesterday(body)
            if tok.text == "at":
                self.advance()
                self.expect("(")
                lf = self.lifeline()
                self.expect(",")
                body = self.or_expr()
                self.expect(")")
                return At(lf, body)
            if tok.text == "P":
                self.advance()
                if self.cur.text == "[":
                    self.advance()
                    lf = self.lifeline()
                    self.expect("]")
                    self.expect("(")
                    body = self.or_expr()
                    self.expect(")")
                    return PastAt(lf, body)
                self.expect("(")
                body = self.or_expr()
                self.expect(")")
                return PastAny(body)
            if tok.text == "seen":
                self.advance()
                self.expect("(")
                lf = self.lifeline()
                self.expect(")")
                return Seen(lf)
            if tok.text in ("true", "false") and not self._starts_comparison(1):
                self.advance()
                return Truth() if tok.text == "true" else Not(Truth())
        if tok.kind in ("int", "string", "ident"):
            return self.atom()
        raise self.fail(f"unexpected {tok.text!r}" if tok.kind != "end" else "unexpected end of input")

    def _starts_comparison(self, offset: int) -> bool:
        return self.peek(offset).text in COMPARISONS

    def atom(self) -> Formula:
        start = self.cur
        left = self.operand()
        op_tok = self.cur
        if op_tok.text not in COMPARISONS:
            raise self.fail("expected a comparison operator")
        self.advance()
        right = self.operand()
        if isinstance(left, Lit) and isinstance(right, Lit):
            raise ParseError(
                "at least one side of a comparison must be a variable term",
                start.line,
                start.col,
            )
        return Atom(op_tok.text, left, right)

    def operand(self) -> Operand:
        tok = self.cur
        if tok.kind == "int":
            self.advance()
            return Lit(int(tok.text))
        if tok.kind == "string":
            self.advance()
            return Lit(_unquote(tok.text, tok))
        if tok.kind == "ident":
            if tok.text == "true" or tok.text == "false":
                self.advance()
                return Lit(tok.text == "true")
            if tok.text == "Here":
                self.advance()
                self.expect(".")
                return LocalVar(self.ident_after_dot())
            if tok.text == "At":
                self.advance()
                self.expect("[")
                lf = self.lifeline()
                self.expect("]")
                self.expect(".")
                return AtField(lf, self.ident_after_dot())
            if tok.text in _KEYWORDS:
                raise self.fail(f"{tok.text!r} is reserved; qualify with Here.")
            self.advance()
            return LocalVar(tok.text)
        raise self.fail("expected a term or literal")


def _unquote(text: str, tok: _Token) -> str:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise ParseError("bad string literal", tok.line, tok.col) from None


def parse_guard(text: str, lifelines: set[str] | frozenset[str]) -> Formula:
    """Parse a guard; lifeline references are checked against ``lifelines``.

    Raises :class:`ParseError` with line/column on malformed input.
    """
    return _Parser(text, frozenset(lifelines)).formula()


# ---------------------------------------------------------------------- #
# Printing
# ---------------------------------------------------------------------- #

def _operand_text(x: Operand) -> str:
    if isinstance(x, LocalVar):
        return f"Here.{x.name}"
    if isinstance(x, AtField):
        return f"At[{x.lifeline}].{x.name}"
    v = x.value
    if type(v) is bool:
        return "true" if v else "false"
    if type(v) is str:
        return json.dumps(v)
    return str(v)


def pretty(f: Formula) -> str:
    """Canonical text for a formula; re-parsing yields an equal tree."""
    return _pp(f, 1)


def _level(f: Formula) -> int:
    if isinstance(f, Or):
        return 1
    if isinstance(f, And):
        return 2
    if isinstance(f, Since):
        return 3
    if isinstance(f, Not):
        return 4
    return 5


def _pp(f: Formula, min_level: int) -> str:
    if isinstance(f, Or):
        s = f"{_pp(f.left, 1)} || {_pp(f.right, 2)}"
    elif isinstance(f, And):
        s = f"{_pp(f.left, 2)} && {_pp(f.right, 3)}"
    elif isinstance(f, Since):
        s = f"{_pp(f.first, 4)} S {_pp(f.second, 3)}"
    elif isinstance(f, Not):
        s = f"!{_pp(f.body, 4)}"
    elif isinstance(f, Truth):
        s = "true"
    elif isinstance(f, Atom):
        s = f"{_operand_text(f.left)} {f.op} {_operand_text(f.right)}"
    elif isinstance(f, Yesterday):
        s = f"Y({_pp(f.body, 1)})"
    elif isinstance(f, At):
        s = f"at({f.lifeline}, {_pp(f.body, 1)})"
    elif isinstance(f, PastAt):
        s = f"P[{f.lifeline}]({_pp(f.body, 1)})"
    elif isinstance(f, PastAny):
        s = f"P({_pp(f.body, 1)})"
    elif isinstance(f, Seen):
        s = f"seen({f.lifeline})"
    else:
        raise TypeError(f"not a formula: {f!r}")
    if _level(f) < min_level:
        return f"({s})"
    return s


# ---------------------------------------------------------------------- #
# Derived forms and guard closure
# ---------------------------------------------------------------------- #

def expand_derived(f: Formula, lifelines: tuple[str, ...] | list[str]) -> Formula:
    """Rewrite derived shorthands into core syntax.

    ``P[A](f)`` becomes ``at(A, true S f)``; ``P(f)`` the disjunction of
    that over all declared lifelines, in declaration order; ``seen(A)``
    becomes ``at(A, true)``. Core nodes are rebuilt unchanged, so the
    function is idempotent.
    """
    if isinstance(f, PastAt):
        return At(f.lifeline, Since(Truth(), expand_derived(f.body, lifelines)))
    if isinstance(f, PastAny):
        body = expand_derived(f.body, lifelines)
        parts = [At(b, Since(Truth(), body)) for b in lifelines]
        if not parts:
            return Not(Truth())
        out: Formula = parts[0]
        for p in parts[1:]:
            out = Or(out, p)
        return out
    if isinstance(f, Seen):
        return At(f.lifeline, Truth())
    if isinstance(f, At):
        return At(f.lifeline, expand_derived(f.body, lifelines))
    if isinstance(f, Yesterday):
        return Yesterday(expand_derived(f.body, lifelines))
    if isinstance(f, Not):
        return Not(expand_derived(f.body, lifelines))
    if isinstance(f, Since):
        return Since(
            expand_derived(f.first, lifelines), expand_derived(f.second, lifelines)
        )
    if isinstance(f, And):
        return And(
            expand_derived(f.left, lifelines), expand_derived(f.right, lifelines)
        )
    if isinstance(f, Or):
        return Or(expand_derived(f.left, lifelines), expand_derived(f.right, lifelines))
    return f


@dataclass(frozen=True)
class GuardSet:
    """A closed set of guards shared by all monitors of one run.

    ``sub`` lists every structural subformula exactly once, children
    before parents; ``index`` maps a subformula to its position. Tables
    in monitor states and message payloads are keyed by these positions.
    ``cross_vars`` are the variable names read through ``At[B].x`` terms,
    ``local_vars`` the names read unqualified.
    """

    formulas: tuple[Formula, ...]
    sub: tuple[Formula, ...]
    index: dict[Formula, int]
    cross_vars: frozenset[str]
    local_vars: frozenset[str]

    def __len__(self) -> int:
        return len(self.sub)


def close_guards(formulas: list[Formula] | tuple[Formula, ...]) -> GuardSet:
    """Close core-only guards under subformulas (expand derived forms first)."""
    for f in formulas:
        if not is_core(f):
            raise ValueError("guard contains derived forms; call expand_derived first")
    sub: list[Formula] = []
    index: dict[Formula, int] = {}

    def visit(f: Formula) -> None:
        if f in index:
            return
        for c in children(f):
            visit(c)
        index[f] = len(sub)
        sub.append(f)

    for f in formulas:
        visit(f)

    cross: set[str] = set()
    local: set[str] = set()
    for f in sub:
        if isinstance(f, Atom):
            for side in (f.left, f.right):
                if isinstance(side, AtField):
                    cross.add(side.name)
                elif isinstance(side, LocalVar):
                    local.add(side.name)

    return GuardSet(
        formulas=tuple(formulas),
        sub=tuple(sub),
        index=index,
        cross_vars=frozenset(cross),
        local_vars=frozenset(local),
    )
