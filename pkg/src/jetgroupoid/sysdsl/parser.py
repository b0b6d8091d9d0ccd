"""Tokenizer and recursive-descent parser for the system-definition language.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-'? atom ('^' nat)?
    atom   := nat | ident | '(' expr ')'

``-x^2`` parses as ``-(x^2)``.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from ..errors import DSLSyntaxError
from .expr import Add, Div, Expr, Mul, Neg, Num, Pow, Sub, Var

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nat>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<op>[-+*/^()=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # nat | ident | arrow | op | end
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1) -> list[Token]:
    """Tokens of a single line (comments stripped); ends with an ``end`` token."""
    if "#" in text:
        text = text[: text.index("#")]
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLSyntaxError(line, pos + 1, "a token", text[pos])
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, pos + 1))
        pos = m.end()
    tokens.append(Token("end", "", line, len(text) + 1))
    return tokens


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "arrow") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str, what: str | None = None) -> Token:
        if not self.accept(text):
            t = self.tok
            raise DSLSyntaxError(t.line, t.col, what or repr(text), t.text or "end of line")
        return self.tokens[self.i - 1]

    def expect_kind(self, kind: str, what: str) -> Token:
        t = self.tok
        if t.kind != kind:
            raise DSLSyntaxError(t.line, t.col, what, t.text or "end of line")
        return self.advance()

    def expect_end(self):
        t = self.tok
        if t.kind != "end":
            raise DSLSyntaxError(t.line, t.col, "end of line", t.text)


def _expr(c: _Cursor) -> Expr:
    node = _term(c)
    while c.tok.kind == "op" and c.tok.text in "+-":
        op = c.advance().text
        rhs = _term(c)
        node = Add(node, rhs) if op == "+" else Sub(node, rhs)
    return node


def _term(c: _Cursor) -> Expr:
    node = _factor(c)
    while c.tok.kind == "op" and c.tok.text in "*/":
        op = c.advance().text
        rhs = _factor(c)
        node = Mul(node, rhs) if op == "*" else Div(node, rhs)
    return node


def _factor(c: _Cursor) -> Expr:
    negate = c.accept("-")
    node = _atom(c)
    if c.accept("^"):
        node = Pow(node, int(c.expect_kind("nat", "a natural-number exponent").text))
    return Neg(node) if negate else node


def _atom(c: _Cursor) -> Expr:
    t = c.tok
    if t.kind == "nat":
        c.advance()
        return Num(int(t.text))
    if t.kind == "ident":
        c.advance()
        return Var(t.text)
    if c.accept("("):
        node = _expr(c)
        c.expect(")", "')'")
        return node
    raise DSLSyntaxError(t.line, t.col, "a number, identifier or '('", t.text or "end of line")


def parse_expr_tokens(tokens: list[Token]) -> tuple[Expr, int]:
    c = _Cursor(tokens)
    node = _expr(c)
    return node, c.i


def parse_expr(text: str, line: int = 1) -> Expr:
    """Parse a single expression."""
    c = _Cursor(tokenize(text, line))
    node = _expr(c)
    c.expect_end()
    return node


def parse_rational(tokens: list[Token]) -> Fraction:
    """``'-'? nat ('/' nat)?`` followed by end of line."""
    c = _Cursor(tokens)
    sign = -1 if c.accept("-") else 1
    num = int(c.expect_kind("nat", "an integer").text)
    den = 1
    if c.accept("/"):
        den_tok = c.expect_kind("nat", "an integer denominator")
        den = int(den_tok.text)
        if den == 0:
            raise DSLSyntaxError(den_tok.line, den_tok.col, "a nonzero denominator", "0")
    c.expect_end()
    return Fraction(sign * num, den)
