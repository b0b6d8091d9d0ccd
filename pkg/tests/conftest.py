"""Shared helpers: a sympy oracle for truncated series and random systems."""

import random
from fractions import Fraction

import pytest
import sympy

from jetgroupoid.field import QQ
from jetgroupoid.jetcore import TruncatedSeries, multi_indices
from jetgroupoid.sysdsl.system import FiberedSystem
from jetgroupoid.sysdsl.parser import parse_expr


def eps_symbols(q):
    return sympy.symbols(f"e0:{q}")


def to_sympy(s: TruncatedSeries, syms):
    out = sympy.Integer(0)
    for alpha, c in s.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for e, a in zip(syms, alpha):
            term *= e**a
        out += term
    return out


def from_sympy(expr, syms, k, field=QQ) -> TruncatedSeries:
    poly = sympy.Poly(sympy.expand(expr), *syms)
    terms = {}
    for mono, c in poly.terms():
        if sum(mono) <= k:
            terms[tuple(mono)] = Fraction(int(c.p), int(c.q))
    return TruncatedSeries.from_dict(terms, field, len(syms), k)


def truncate_sympy(expr, syms, k):
    poly = sympy.Poly(sympy.expand(expr), *syms)
    return sum(
        (c * sympy.prod([e**a for e, a in zip(syms, m)]) for m, c in poly.terms() if sum(m) <= k),
        sympy.Integer(0),
    )


def rand_fraction(rng, bound=9):
    return Fraction(rng.randint(-bound, bound), rng.randint(1, 4))


def rand_series(rng, q, k, constant=True):
    coeffs = [rand_fraction(rng) for _ in multi_indices(q, k)]
    if not constant:
        coeffs[0] = Fraction(0)
    return TruncatedSeries(QQ, q, k, coeffs)


def random_polynomial_text(rng, names, degree=2, terms=3):
    parts = []
    for _ in range(terms):
        c = rng.randint(-3, 3) or 1
        mono = "*".join(rng.choice(names) for _ in range(rng.randint(1, degree)))
        parts.append(f"{c}*{mono}")
    return " + ".join(parts)


def random_polynomial_system(rng, q=2, with_base=True):
    """A fibered system with polynomial components; the fiber map is a
    triangular (hence invertible-linear-part generic) perturbation of a linear map."""
    fiber = ("x", "y")[:q] if q <= 2 else tuple(f"x{i}" for i in range(q))
    base = ("b",) if with_base else ()
    sigma = {"b": parse_expr(f"b + {rng.randint(1, 3)}")} if with_base else {}
    names = list(fiber) + list(base)
    maps = {}
    for i, x in enumerate(fiber):
        lin = f"{rng.randint(1, 4)}*{x}"
        maps[x] = parse_expr(f"{lin} + {random_polynomial_text(rng, names)}")
    return FiberedSystem(name="rand", base=base, fiber=fiber, params=(), sigma=sigma, maps=maps)


@pytest.fixture
def rng():
    return random.Random(20240611)
