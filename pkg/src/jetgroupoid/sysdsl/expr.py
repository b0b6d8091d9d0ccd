"""Rational expression ASTs and the operations on them.

Trees are immutable and may share subtrees (substitution reuses the
replacement object everywhere it is placed), so every traversal memoises
on node identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from ..errors import EvalDivisionByZero


class Expr:
    """Base class of expression nodes."""

    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, repr=False)
class Num(Expr):
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("Num holds non-negative literals; wrap negatives in Neg")

    def __repr__(self):
        return f"Num({self.value})"


@dataclass(frozen=True, repr=False)
class Var(Expr):
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, repr=False)
class Neg(Expr):
    operand: Expr

    def __repr__(self):
        return f"Neg({self.operand!r})"


@dataclass(frozen=True, repr=False)
class BinOp(Expr):
    left: Expr
    right: Expr
    symbol = "?"

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Add(BinOp):
    symbol = "+"


@dataclass(frozen=True, repr=False)
class Sub(BinOp):
    symbol = "-"


@dataclass(frozen=True, repr=False)
class Mul(BinOp):
    symbol = "*"


@dataclass(frozen=True, repr=False)
class Div(BinOp):
    symbol = "/"


@dataclass(frozen=True, repr=False)
class Pow(Expr):
    base: Expr
    exp: int

    def __post_init__(self):
        if self.exp < 0:
            raise ValueError("only non-negative integer exponents")

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exp})"


ZERO = Num(0)
ONE = Num(1)


# -- smart constructors (literal pruning only, no algebra) ---------------------


def _is_num(e, v=None):
    return isinstance(e, Num) and (v is None or e.value == v)


def const(value) -> Expr:
    """AST for an integer or rational constant."""
    value = Fraction(value)
    sign = value < 0
    value = abs(value)
    node = Num(value.numerator) if value.denominator == 1 else Div(Num(value.numerator), Num(value.denominator))
    return Neg(node) if sign else node


def add(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    if isinstance(b, Neg):
        return sub(a, b.operand)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 0):
        return a
    if _is_num(a, 0):
        return neg(b)
    if isinstance(b, Neg):
        return add(a, b.operand)
    return Sub(a, b)


def neg(a: Expr) -> Expr:
    if _is_num(a, 0):
        return a
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0) or _is_num(b, 0):
        return ZERO
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    if isinstance(a, Neg):
        return neg(mul(a.operand, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.operand))
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 1):
        return a
    if _is_num(a, 0) and not _is_num(b, 0):
        return ZERO
    return Div(a, b)


def power(a: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_num(a, 0) or _is_num(a, 1):
        return a
    return Pow(a, n)


# -- traversal helpers ---------------------------------------------------------


def free_variables(e: Expr, _memo: dict | None = None) -> frozenset:
    memo = {} if _memo is None else _memo

    def walk(node):
        key = id(node)
        if key in memo:
            return memo[key][1]
        if isinstance(node, Var):
            out = frozenset((node.name,))
        elif isinstance(node, Num):
            out = frozenset()
        elif isinstance(node, Neg):
            out = walk(node.operand)
        elif isinstance(node, Pow):
            out = walk(node.base)
        else:
            out = walk(node.left) | walk(node.right)
        memo[key] = (node, out)
        return out

    return walk(e)


def node_count(e: Expr) -> int:
    """Number of distinct nodes (shared subtrees counted once)."""
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, BinOp):
            stack.extend((node.left, node.right))
        elif isinstance(node, Neg):
            stack.append(node.operand)
        elif isinstance(node, Pow):
            stack.append(node.base)
    return len(seen)


def degree_bound(e: Expr) -> tuple[int, int]:
    """Static (numerator, denominator) degree bounds of ``e`` as a rational function."""
    memo: dict = {}

    def walk(node):
        key = id(node)
        if key in memo:
            return memo[key][1]
        if isinstance(node, Num):
            out = (0, 0)
        elif isinstance(node, Var):
            out = (1, 0)
        elif isinstance(node, Neg):
            out = walk(node.operand)
        elif isinstance(node, Pow):
            n, d = walk(node.base)
            out = (n * node.exp, d * node.exp)
        else:
            n1, d1 = walk(node.left)
            n2, d2 = walk(node.right)
            if isinstance(node, (Add, Sub)):
                out = (max(n1 + d2, n2 + d1), d1 + d2)
            elif isinstance(node, Mul):
                out = (n1 + n2, d1 + d2)
            else:
                out = (n1 + d2, d1 + n2)
        memo[key] = (node, out)
        return out

    return walk(e)


# -- evaluation ------------------------------------------------------------------


def eval_expr(e: Expr, env: Mapping, field=None):
    """Evaluate ``e`` with variables taken from ``env``.

    ``env`` values may be field scalars or :class:`TruncatedSeries`; integer
    literals mix with either.  ``x^0`` is the literal 1 even where ``x`` has a
    pole.  A vanishing scalar denominator raises :class:`EvalDivisionByZero`;
    a series denominator without constant term raises
    :class:`DivisionByNonUnit`.
    """
    memo: dict = {}

    def walk(node):
        key = id(node)
        if key in memo:
            return memo[key][1]
        if isinstance(node, Num):
            out = node.value if field is None else field.convert(node.value)
        elif isinstance(node, Var):
            try:
                out = env[node.name]
            except KeyError:
                raise KeyError(f"no value for variable {node.name!r}") from None
        elif isinstance(node, Neg):
            out = -walk(node.operand)
        elif isinstance(node, Pow):
            out = 1 if node.exp == 0 else walk(node.base) ** node.exp
        else:
            a = walk(node.left)
            b = walk(node.right)
            if isinstance(node, Add):
                out = a + b
            elif isinstance(node, Sub):
                out = a - b
            elif isinstance(node, Mul):
                out = a * b
            else:
                if isinstance(b, int) and isinstance(a, int):
                    a = Fraction(a)
                try:
                    out = a / b
                except ZeroDivisionError as exc:
                    raise EvalDivisionByZero(f"denominator {to_text(node.right)} vanishes") from exc
        memo[key] = (node, out)
        return out

    result = walk(e)
    if field is not None and isinstance(result, (int, Fraction)):
        result = field.convert(result)
    return result


# -- substitution and differentiation --------------------------------------------


def _rebuild(node, children):
    if isinstance(node, Neg):
        (a,) = children
        return node if a is node.operand else neg(a)
    if isinstance(node, Pow):
        (a,) = children
        return node if a is node.base else power(a, node.exp)
    a, b = children
    if a is node.left and b is node.right:
        return node
    if isinstance(node, Add):
        return add(a, b)
    if isinstance(node, Sub):
        return sub(a, b)
    if isinstance(node, Mul):
        return mul(a, b)
    return div(a, b)


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (simultaneously); untouched subtrees keep identity."""
    memo: dict = {}

    def walk(node):
        key = id(node)
        if key in memo:
            return memo[key][1]
        if isinstance(node, Var):
            out = mapping.get(node.name, node)
        elif isinstance(node, Num):
            out = node
        elif isinstance(node, (Neg, Pow)):
            out = _rebuild(node, (walk(node.operand if isinstance(node, Neg) else node.base),))
        else:
            out = _rebuild(node, (walk(node.left), walk(node.right)))
        memo[key] = (node, out)
        return out

    return walk(e)


def symbolic_derivative(e: Expr, v: str) -> Expr:
    """d e / d v by the sum, product, quotient and power rules."""
    fv_memo: dict = {}
    memo: dict = {}

    def d(node):
        key = id(node)
        if key in memo:
            return memo[key][1]
        if v not in free_variables(node, fv_memo):
            out = ZERO
        elif isinstance(node, Var):
            out = ONE
        elif isinstance(node, Neg):
            out = neg(d(node.operand))
        elif isinstance(node, Pow):
            n = node.exp
            # x^0 is the literal 1
            out = ZERO if n == 0 else mul(mul(Num(n), power(node.base, n - 1)), d(node.base))
        elif isinstance(node, Add):
            out = add(d(node.left), d(node.right))
        elif isinstance(node, Sub):
            out = sub(d(node.left), d(node.right))
        elif isinstance(node, Mul):
            out = add(mul(d(node.left), node.right), mul(node.left, d(node.right)))
        else:
            dl, dr = d(node.left), d(node.right)
            if _is_num(dr, 0):
                out = div(dl, node.right)
            else:
                out = div(sub(mul(dl, node.right), mul(node.left, dr)), power(node.right, 2))
        memo[key] = (node, out)
        return out

    return d(e)


# -- printing ------------------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2}


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[type(node)]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def to_text(e: Expr) -> str:
    """Canonical text in the DSL grammar; ``parse_expr(to_text(e)) == e``."""
    memo: dict = {}

    def atom(node):
        s = walk(node)
        return s if isinstance(node, (Num, Var)) else f"({s})"

    def walk(node):
        key = id(node)
        if key in memo:
            return memo[key][1]
        if isinstance(node, Num):
            out = str(node.value)
        elif isinstance(node, Var):
            out = node.name
        elif isinstance(node, Pow):
            out = f"{atom(node.base)}^{node.exp}"
        elif isinstance(node, Neg):
            inner = node.operand
            if isinstance(inner, Pow) or isinstance(inner, (Num, Var)):
                out = "-" + walk(inner)
            else:
                out = f"-({walk(inner)})"
        else:
            p = _prec(node)
            left = walk(node.left)
            if _prec(node.left) < p:
                left = f"({left})"
            right = walk(node.right)
            if _prec(node.right) <= p:
                right = f"({right})"
            sep = f" {node.symbol} " if p == 1 else node.symbol
            out = f"{left}{sep}{right}"
        memo[key] = (node, out)
        return out

    return walk(e)


__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "ZERO",
    "ONE",
    "const",
    "add",
    "sub",
    "neg",
    "mul",
    "div",
    "power",
    "free_variables",
    "node_count",
    "degree_bound",
    "eval_expr",
    "substitute",
    "symbolic_derivative",
    "to_text",
]
