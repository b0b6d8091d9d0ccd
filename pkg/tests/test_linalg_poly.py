import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from sympy import GF
from sympy.polys.matrices import DomainMatrix

from jetgroupoid.errors import EvalDivisionByZero, FieldMismatch
from jetgroupoid.field import QQ, PrimeField, prime_for_seed
from jetgroupoid.linalg import compress_rows, matmul_mod, nullspace_mod, prefix_ranks, rank_mod, row_echelon
from jetgroupoid.poly import Poly, expand_rational, rational_to_expr
from jetgroupoid.sysdsl import eval_expr, expr_probably_zero, parse_expr
from jetgroupoid.sysdsl.expr import sub

P = 2**31 - 1


def oracle_rank(m, p):
    f = GF(p)
    rows, cols = m.shape
    return DomainMatrix([[f(int(v)) for v in row] for row in m], (rows, cols), f).rank()


def random_low_rank(rng, rows, cols, r, p):
    a = rng.integers(0, p, size=(rows, r))
    b = rng.integers(0, p, size=(r, cols))
    return matmul_mod(a, b, p)


# -- fields -------------------------------------------------------------------------


def test_prime_for_seed_is_large_prime_and_stable():
    p = prime_for_seed(7)
    assert p > 2**30 and sympy.isprime(p)
    assert prime_for_seed(7) == p


def test_small_modulus_rejected():
    with pytest.raises(ValueError):
        PrimeField(101)


def test_field_inverse():
    fld = PrimeField(P)
    x = fld(123456)
    assert x * x.inverse() == 1


# -- linear algebra --------------------------------------------------------------------


def test_matmul_matches_python_integers():
    rng = np.random.default_rng(1)
    a = rng.integers(0, P, size=(7, 9))
    b = rng.integers(0, P, size=(9, 5))
    want = [[sum(int(a[i, k]) * int(b[k, j]) for k in range(9)) % P for j in range(5)] for i in range(7)]
    assert matmul_mod(a, b, P).tolist() == want


def test_rank_against_domain_matrix():
    rng = np.random.default_rng(2)
    for _ in range(40):
        rows, cols = rng.integers(1, 12, size=2)
        r = int(rng.integers(0, min(rows, cols) + 1))
        m = random_low_rank(rng, int(rows), int(cols), r, P)
        assert rank_mod(m, P) == oracle_rank(m, P)


def test_rank_small_structured():
    m = np.array([[1, 2, 3], [2, 4, 6], [0, 0, 1]])
    assert rank_mod(m, P) == 2
    assert rank_mod(np.zeros((3, 3), dtype=np.int64), P) == 0


def test_reduced_echelon_pivots():
    m = np.array([[0, 2, 4], [0, 1, 3], [0, 0, 0]])
    e, piv = row_echelon(m, P, reduced=True)
    assert piv == [1, 2]
    assert e[0].tolist() == [0, 1, 0] and e[1].tolist() == [0, 0, 1]


def test_nullspace_is_kernel_of_full_dimension():
    rng = np.random.default_rng(3)
    for _ in range(30):
        m = random_low_rank(rng, 6, 9, int(rng.integers(0, 7)), P)
        ns = nullspace_mod(m, P)
        assert ns.shape[1] == 9 - oracle_rank(m, P)
        assert not matmul_mod(m, ns, P).any()


def test_prefix_ranks():
    rng = np.random.default_rng(4)
    m = random_low_rank(rng, 10, 8, 5, P)
    assert prefix_ranks(m, P, [1, 4, 8]) == [oracle_rank(m[:, :c], P) for c in (1, 4, 8)]


def test_compression_preserves_rank():
    rng = np.random.default_rng(5)
    m = random_low_rank(rng, 200, 10, 6, P)
    c = compress_rows(m, P, 42, np.random.default_rng(0))
    assert c.shape == (42, 10)
    assert rank_mod(c, P) == 6


# -- polynomials -------------------------------------------------------------------------


def x(name="x"):
    return Poly.var(name)


def test_poly_arithmetic_matches_sympy():
    rng = random.Random(1)
    X, Y = sympy.symbols("x y")
    for _ in range(30):
        a = sum((Poly.monomial((("x", rng.randint(0, 3)), ("y", rng.randint(0, 3)))) * rng.randint(-5, 5)
                 for _ in range(3)), Poly({}))
        b = x() - Poly.var("y") * rng.randint(1, 4) + 1
        want = sympy.expand(sympy.sympify(str(a).replace("^", "**")) * sympy.sympify(str(b).replace("^", "**")))
        assert sympy.expand(sympy.sympify(str(a * b).replace("^", "**")) - want) == 0


def test_poly_printing_is_canonical():
    p = x() * Poly.var("y") * 2 - x() ** 2 + 3
    assert str(p) == "2*x*y - x^2 + 3"
    assert str(Poly.const(3) - x() ** 2 + Poly.var("y") * x() * 2) == str(p)


def test_poly_diff_and_substitute():
    p = x() ** 3 + x() * Poly.var("y")
    assert p.diff("x") == x() ** 2 * 3 + Poly.var("y")
    assert p.substitute({"x": Poly.var("y") + 1}) == (Poly.var("y") + 1) ** 3 + (Poly.var("y") + 1) * Poly.var("y")


def test_coefficients_in():
    p = x() ** 2 * Poly.var("s") ** 2 + x() * Poly.var("s") + 5
    c = p.coefficients_in("s")
    assert c[0] == Poly.const(5) and c[1] == x() and c[2] == x() ** 2


def test_field_mismatch_in_poly():
    with pytest.raises(FieldMismatch):
        x() + Poly.var("x", PrimeField(P))


def test_expand_rational_cancels_monomials():
    n, d = expand_rational(parse_expr("(eps^3*f)/(eps^2)"))
    assert n == Poly.var("eps") * Poly.var("f") and d == Poly.const(1)


def test_expand_rational_preserves_value():
    rng = random.Random(4)
    e = parse_expr("-y + ((a + b*n)*x + c)/(1 - x^2) + 1/(x + y)")
    n, d = expand_rational(e)
    for _ in range(20):
        env = {v: Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for v in "abcnxy"}
        try:
            want = eval_expr(e, env)
        except EvalDivisionByZero:
            continue
        assert n.evaluate(env) / d.evaluate(env) == want
    assert expr_probably_zero(sub(rational_to_expr(n, d), e), trials=20, seed=1).is_zero


def test_expand_rational_zero_denominator():
    with pytest.raises(EvalDivisionByZero):
        expand_rational(parse_expr("1/(x - x)"))


def test_poly_in_prime_field():
    fld = PrimeField(P)
    p = Poly.var("x", fld) * 2
    assert p.evaluate({"x": fld(3)}) == 6
    with pytest.raises(FieldMismatch):
        p.to_field(QQ)
    assert (Poly.var("x") * Fraction(1, 2)).to_field(fld).evaluate({"x": fld(2)}) == 1
