"""Modal formula AST, text syntax, and rules.

Grammar::

    iff     := imp ('<->' iff)?
    imp     := or ('->' imp)?
    or      := and ('|' and)*
    and     := unary ('&' unary)*
    unary   := '~' unary | ('box' | 'dia') ('^' NUM)? unary | atom
    atom    := 'true' | 'false' | IDENT | '(' iff ')'

Both ``->`` and ``<->`` associate to the right, ``&`` and ``|`` to the left.
``box^k`` and ``dia^k`` are expanded while parsing; the AST has no power node.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce

from .errors import ParseError

__all__ = [
    "Formula", "Var", "Bot", "Top", "Not", "And", "Or", "Implies", "Iff",
    "Box", "Dia", "Rule", "parse", "parse_rule", "to_text", "rule_to_text",
    "subformula_closure", "box_iter", "dia_iter", "box_upto", "dia_upto",
    "conj", "disj", "variables", "size", "BOT", "TOP",
]

KEYWORDS = frozenset({"true", "false", "box", "dia"})
IDENT_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*")


class Formula:
    """Base class of formula nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def children(self):
        return ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Var(Formula):
    name: str

    def __post_init__(self):
        if not IDENT_RE.fullmatch(self.name) or self.name in KEYWORDS:
            raise ValueError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True, slots=True)
class Bot(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, slots=True)
class Box(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, slots=True)
class Dia(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, slots=True)
class Iff(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


BOT = Bot()
TOP = Top()


def box_iter(m, f):
    for _ in range(m):
        f = Box(f)
    return f


def dia_iter(m, f):
    for _ in range(m):
        f = Dia(f)
    return f


def conj(formulas):
    """Left-nested conjunction; the empty conjunction is ``true``."""
    formulas = list(formulas)
    if not formulas:
        return TOP
    return reduce(And, formulas)


def disj(formulas):
    """Left-nested disjunction; the empty disjunction is ``false``."""
    formulas = list(formulas)
    if not formulas:
        return BOT
    return reduce(Or, formulas)


def box_upto(m, f):
    """``f & box f & ... & box^m f``."""
    return conj(box_iter(i, f) for i in range(m + 1))


def dia_upto(m, f):
    """``f | dia f | ... | dia^m f``."""
    return disj(dia_iter(i, f) for i in range(m + 1))


def subformula_closure(f):
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        stack.extend(g.children())
    return frozenset(seen)


def variables(f):
    return frozenset(g.name for g in subformula_closure(f) if isinstance(g, Var))


def size(f):
    """Number of AST nodes, counting repeated subtrees every time."""
    return 1 + sum(size(c) for c in f.children())


@dataclass(frozen=True)
class Rule:
    """Multi-conclusion rule ``premises / conclusions``.

    Both sides are kept as duplicate-free tuples in insertion order so that
    printing is reproducible; equality is order-sensitive.
    """

    premises: tuple = ()
    conclusions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(dict.fromkeys(self.premises)))
        object.__setattr__(self, "conclusions", tuple(dict.fromkeys(self.conclusions)))

    @property
    def variables(self):
        names = set()
        for f in self.premises + self.conclusions:
            names |= variables(f)
        return frozenset(names)

    def __str__(self):
        return rule_to_text(self)


# ---------------------------------------------------------------------------
# printing

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_SYM = {Iff: "<->", Implies: "->", Or: "|", And: "&"}
_RIGHT_ASSOC = (Iff, Implies)
_UNARY_PREC = 5


def _prec(f):
    return _PREC.get(type(f), _UNARY_PREC)


def to_text(f):
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Not):
        return "~" + _wrap(f.arg, _prec(f.arg) < _UNARY_PREC)
    if isinstance(f, (Box, Dia)):
        word = "box" if isinstance(f, Box) else "dia"
        return word + " " + _wrap(f.arg, _prec(f.arg) < _UNARY_PREC)
    p = _PREC[type(f)]
    right_assoc = isinstance(f, _RIGHT_ASSOC)
    lp, rp = _prec(f.left), _prec(f.right)
    left = _wrap(f.left, lp < p or (lp == p and right_assoc))
    right = _wrap(f.right, rp < p or (rp == p and not right_assoc))
    return f"{left} {_SYM[type(f)]} {right}"


def _wrap(f, paren):
    s = to_text(f)
    return f"({s})" if paren else s


def rule_to_text(rule):
    left = ", ".join(to_text(f) for f in rule.premises)
    right = ", ".join(to_text(f) for f in rule.conclusions)
    return f"{left} / {right}".strip()


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"(?:(?P<op><->|->|[~&|()^])|(?P<num>\d+)|(?P<word>[a-zA-Z][a-zA-Z0-9_]*))"
)


def _tokenize(text):
    """Split text into (kind, value, byte_offset) triples."""
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("unexpected character", _byte_offset(text, pos),
                             _FORMULA_START)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), _byte_offset(text, m.start(kind))))
        pos = m.end()
    tokens.append(("eof", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text, pos):
    return len(text[:pos].encode("utf-8"))


_FORMULA_START = ("identifier", "true", "false", "~", "box", "dia", "(")


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, value, pos = self.peek()
        if kind == "op" and value == op:
            return self.take()
        raise ParseError(f"unexpected {value or 'end of input'!r}", pos, (op,))

    def at_op(self, op):
        kind, value, _ = self.peek()
        return kind == "op" and value == op

    def parse_all(self):
        f = self.iff()
        kind, value, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {value!r}", pos,
                             ("&", "|", "->", "<->", ")", "end of input"))
        return f

    def iff(self):
        left = self.imp()
        if self.at_op("<->"):
            self.take()
            return Iff(left, self.iff())
        return left

    def imp(self):
        left = self.disj()
        if self.at_op("->"):
            self.take()
            return Implies(left, self.imp())
        return left

    def disj(self):
        f = self.conj()
        while self.at_op("|"):
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.at_op("&"):
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        kind, value, pos = self.peek()
        if kind == "op" and value == "~":
            self.take()
            return Not(self.unary())
        if kind == "word" and value in ("box", "dia"):
            self.take()
            count = 1
            if self.at_op("^"):
                self.take()
                nkind, nvalue, npos = self.peek()
                if nkind != "num":
                    raise ParseError(f"unexpected {nvalue or 'end of input'!r}", npos,
                                     ("exponent",))
                self.take()
                count = int(nvalue)
            wrap = Box if value == "box" else Dia
            f = self.unary()
            for _ in range(count):
                f = wrap(f)
            return f
        return self.atom()

    def atom(self):
        kind, value, pos = self.take()
        if kind == "word":
            if value == "true":
                return TOP
            if value == "false":
                return BOT
            return Var(value)
        if kind == "op" and value == "(":
            f = self.iff()
            self.expect_op(")")
            return f
        raise ParseError(f"unexpected {value or 'end of input'!r}", pos, _FORMULA_START)


def parse(text):
    """Parse formula text into an AST; raises :class:`ParseError`."""
    return _Parser(text).parse_all()


def parse_rule(text):
    """Parse ``"g1, g2 / d1, d2"``; a bare formula ``phi`` is read as ``/ phi``."""
    if "/" not in text:
        return Rule((), (parse(text),))
    left, _, right = text.partition("/")
    offset = len(left.encode("utf-8")) + 1

    def side(chunk, base):
        out = []
        for piece in chunk.split(","):
            if piece.strip():
                try:
                    out.append(parse(piece))
                except ParseError as err:
                    raise ParseError("bad formula in rule", base + err.offset,
                                     err.expected) from None
            base += len(piece.encode("utf-8")) + 1
        return tuple(out)

    return Rule(side(left, 0), side(right, offset))
