"""Sparse multivariate polynomials with named variables.

A monomial is a sorted tuple of ``(name, exponent)`` pairs; coefficients
live in :data:`QQ` or a :class:`PrimeField`.  These back the jet
polynomials of :mod:`prolong` and the exact normal forms of
:mod:`confluence`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping

from .errors import EvalDivisionByZero, FieldMismatch
from .field import QQ, Fp
from .sysdsl.expr import Add, Div, Expr, Mul, Neg, Num, Pow, Sub, Var, add, const, mul, power, sub, to_text

Monomial = tuple

ONE_MONO: Monomial = ()


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _sort_key(m: Monomial):
    return (-mono_degree(m), m)


class Poly:
    """Immutable sparse polynomial; ``terms`` maps monomials to nonzero coefficients."""

    __slots__ = ("terms", "field")

    def __init__(self, terms: Mapping | None = None, field=QQ):
        self.field = field
        clean = {}
        for m, c in (terms or {}).items():
            c = field.convert(c)
            if c:
                clean[m] = c
        self.terms = clean

    @classmethod
    def _raw(cls, terms: dict, field) -> "Poly":
        obj = object.__new__(cls)
        obj.terms = terms
        obj.field = field
        return obj

    @classmethod
    def const(cls, c, field=QQ) -> "Poly":
        return cls({ONE_MONO: c}, field)

    @classmethod
    def var(cls, name: str, field=QQ) -> "Poly":
        return cls._raw({((name, 1),): field.one}, field)

    @classmethod
    def monomial(cls, m: Monomial, c=1, field=QQ) -> "Poly":
        return cls({tuple(sorted(m)): c}, field)

    # -- queries -----------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == ONE_MONO for m in self.terms)

    def constant_value(self):
        return self.terms.get(ONE_MONO, self.field.zero)

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def degree(self, var: str | None = None) -> int:
        if not self.terms:
            return -1
        if var is None:
            return max(mono_degree(m) for m in self.terms)
        return max(dict(m).get(var, 0) for m in self.terms)

    def min_degree(self, var: str) -> int:
        if not self.terms:
            return 0
        return min(dict(m).get(var, 0) for m in self.terms)

    def monomial_content(self) -> Monomial:
        """Largest monomial dividing every term."""
        if not self.terms:
            return ONE_MONO
        it = iter(self.terms)
        common = dict(next(it))
        for m in it:
            d = dict(m)
            common = {v: min(e, d[v]) for v, e in common.items() if v in d}
            if not common:
                break
        return tuple(sorted(common.items()))

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: _sort_key(t[0]))

    # -- arithmetic ----------------------------------------------------------------

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field!r} vs {other.field!r}")
            return other
        return Poly.const(other, self.field)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            s = c if s is None else s + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly._raw(out, self.field)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({m: -c for m, c in self.terms.items()}, self.field)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = self.field.convert(other)
            if not c:
                return Poly._raw({}, self.field)
            return Poly._raw({m: v * c for m, v in self.terms.items()}, self.field)
        other = self._coerce(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                s = out.get(m)
                out[m] = c1 * c2 if s is None else s + c1 * c2
        return Poly._raw({m: c for m, c in out.items() if c}, self.field)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative exponent")
        result = Poly.const(1, self.field)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def scale(self, c) -> "Poly":
        return self * c

    def divide_monomial(self, m: Monomial) -> "Poly":
        """Exact division by a monomial dividing every term."""
        if not m:
            return self
        sub_ = dict(m)
        out = {}
        for mono, c in self.terms.items():
            d = dict(mono)
            for v, e in sub_.items():
                d[v] -= e
                if d[v] < 0:
                    raise ValueError("monomial does not divide the polynomial")
            out[tuple(sorted((v, e) for v, e in d.items() if e))] = c
        return Poly._raw(out, self.field)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.field == other.field and self.terms == other.terms
        try:
            return self == Poly.const(other, self.field)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    # -- calculus and substitution -------------------------------------------------

    def diff(self, var: str) -> "Poly":
        out: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(var, 0)
            if not e:
                continue
            if e == 1:
                del d[var]
            else:
                d[var] = e - 1
            nm = tuple(sorted(d.items()))
            out[nm] = out.get(nm, self.field.zero) + c * e
        return Poly._raw({m: c for m, c in out.items() if c}, self.field)

    def map_variables(self, fn: Callable[[str], str]) -> "Poly":
        out: dict = {}
        for m, c in self.terms.items():
            d: dict = {}
            for v, e in m:
                w = fn(v)
                d[w] = d.get(w, 0) + e
            nm = tuple(sorted(d.items()))
            out[nm] = out.get(nm, self.field.zero) + c
        return Poly._raw({m: c for m, c in out.items() if c}, self.field)

    def substitute(self, mapping: Mapping[str, "Poly"]) -> "Poly":
        """Simultaneous substitution of polynomials for variables."""
        cache: dict = {}

        def pw(v, e):
            key = (v, e)
            if key not in cache:
                cache[key] = mapping[v] ** e
            return cache[key]

        total = Poly._raw({}, self.field)
        for m, c in self.terms.items():
            term = Poly._raw({(): c}, self.field)
            keep = []
            for v, e in m:
                if v in mapping:
                    term = term * pw(v, e)
                else:
                    keep.append((v, e))
            if keep:
                term = term * Poly._raw({tuple(keep): self.field.one}, self.field)
            total = total + term
        return total

    def evaluate(self, env: Mapping):
        total = self.field.zero
        for m, c in self.terms.items():
            term = c
            for v, e in m:
                term = term * env[v] ** e
            total = total + term
        return total

    def coefficients_in(self, var: str) -> dict:
        """Expansion ``sum_j P_j var^j`` as ``{j: P_j}``."""
        out: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            j = d.pop(var, 0)
            nm = tuple(sorted(d.items()))
            out.setdefault(j, {})[nm] = c
        return {j: Poly._raw(t, self.field) for j, t in out.items()}

    def to_field(self, field) -> "Poly":
        return Poly({m: field.convert(c) for m, c in self.terms.items()}, field)

    # -- printing --------------------------------------------------------------------

    def to_expr(self) -> Expr:
        """AST in canonical term order (degree descending, then by monomial)."""
        out: Expr = Num(0)
        first = True
        for m, c in self.sorted_terms():
            value = Fraction(c) if not isinstance(c, Fp) else Fraction(int(c))
            negative = value < 0 and not first
            term = const(abs(value) if negative else value)
            for v, e in m:
                term = mul(term, power(Var(v), e))
            if first:
                out = term
                first = False
            elif negative:
                out = sub(out, term)
            else:
                out = add(out, term)
        return out

    def __str__(self):
        return to_text(self.to_expr())

    def __repr__(self):
        return f"Poly({self})"


def _cancel(n: Poly, d: Poly) -> tuple[Poly, Poly]:
    """Cancel the common monomial factor and make a constant denominator 1."""
    if n.is_zero():
        return n, Poly.const(1, d.field)
    if d.is_constant():
        c = d.constant_value()
        return n * (d.field.one / c), Poly.const(1, d.field)
    mn, md = n.monomial_content(), d.monomial_content()
    if mn and md:
        dn, dd = dict(mn), dict(md)
        common = tuple(sorted((v, min(e, dd[v])) for v, e in dn.items() if v in dd))
        if common:
            n, d = n.divide_monomial(common), d.divide_monomial(common)
    if d.is_constant():
        return _cancel(n, d)
    return n, d


def expand_rational(e: Expr, field=QQ) -> tuple[Poly, Poly]:
    """Exact (numerator, denominator) polynomials of a rational expression.

    No gcd is taken; only common monomial factors and constant denominators
    are cancelled.  A denominator that expands to zero raises
    :class:`EvalDivisionByZero`.
    """
    memo: dict = {}

    def walk(node):
        key = id(node)
        if key in memo:
            return memo[key][1]
        if isinstance(node, Num):
            out = (Poly.const(node.value, field), Poly.const(1, field))
        elif isinstance(node, Var):
            out = (Poly.var(node.name, field), Poly.const(1, field))
        elif isinstance(node, Neg):
            n, d = walk(node.operand)
            out = (-n, d)
        elif isinstance(node, Pow):
            n, d = walk(node.base)
            out = (n**node.exp, d**node.exp)
        else:
            n1, d1 = walk(node.left)
            n2, d2 = walk(node.right)
            if isinstance(node, (Add, Sub)):
                if isinstance(node, Sub):
                    n2 = -n2
                if d1 == d2:
                    out = _cancel(n1 + n2, d1)
                else:
                    out = _cancel(n1 * d2 + n2 * d1, d1 * d2)
            elif isinstance(node, Mul):
                out = _cancel(n1 * n2, d1 * d2)
            else:
                if n2.is_zero():
                    raise EvalDivisionByZero("denominator expands to the zero polynomial")
                out = _cancel(n1 * d2, d1 * n2)
        memo[key] = (node, out)
        return out

    return walk(e)


def rational_to_expr(n: Poly, d: Poly) -> Expr:
    if d.is_constant():
        return (n * (d.field.one / d.constant_value())).to_expr()
    return Div(n.to_expr(), d.to_expr())


__all__ = ["Poly", "Monomial", "mono_mul", "mono_degree", "expand_rational", "rational_to_expr"]
