import random
from fractions import Fraction
from pathlib import Path

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from jetgroupoid.errors import (
    ArityMismatch,
    DegreeOverflow,
    DSLSyntaxError,
    EvalDivisionByZero,
    FiberednessViolation,
    UnknownVariable,
    ZeroDenominatorLiteral,
)
from jetgroupoid.field import QQ, PrimeField
from jetgroupoid.jetcore import TruncatedSeries
from jetgroupoid.sysdsl import (
    ParamFamily,
    VectorFieldSpec,
    eval_expr,
    expr_probably_zero,
    parse_expr,
    parse_system,
    substitute,
    symbolic_derivative,
    to_text,
    validate_fibered,
)
from jetgroupoid.sysdsl.expr import Num, Var, degree_bound, free_variables

SYSTEMS = Path(__file__).resolve().parents[1] / "systems"

DP2_MAP = "-y + ((a + b*n)*x + c)/(1 - x^2)"


def sym(e):
    """Independent oracle: the same text read by sympy."""
    return sympy.sympify(to_text(e).replace("^", "**"))


# -- parsing --------------------------------------------------------------------------


def test_parse_dp2_file():
    sys = parse_system((SYSTEMS / "dp2.sys").read_text())
    assert sys.base == ("n",)
    assert sys.fiber == ("x", "y")
    assert sys.params == ("a", "b", "c")
    assert validate_fibered(sys).fibered


def test_parse_identity_system():
    sys = parse_system("system id\nbase t\nfiber x\nsigma t -> t\nmap x -> x")
    assert sys.sigma["t"] == Var("t") and sys.maps["x"] == Var("x")


def test_literal_zero_denominator_is_a_validation_error():
    with pytest.raises(ZeroDenominatorLiteral):
        parse_system("system z\nbase t\nfiber x y\nsigma t -> t\nmap x -> y/0\nmap y -> x")


def test_syntax_error_location():
    with pytest.raises(DSLSyntaxError) as info:
        parse_system("system s\nbase t\nfiber x\nsigma t -> t +\nmap x -> x")
    assert info.value.line == 4


def test_unknown_variable_names_the_variable():
    with pytest.raises(UnknownVariable) as info:
        parse_system("system s\nbase t\nfiber x\nsigma t -> t\nmap x -> x + s")
    assert "s" in str(info.value)


def test_missing_component():
    with pytest.raises(ArityMismatch):
        parse_system("system s\nbase t\nfiber x y\nsigma t -> t\nmap x -> y")


def test_comments_and_whitespace():
    text = "# header\nsystem s   # name\n\nbase t\nfiber x\nsigma t->t+1\nmap x ->   2 * x # doubled\n"
    sys = parse_system(text)
    assert sys.maps["x"] == parse_expr("2*x")


def test_let_bindings():
    sys = parse_system("system s\nbase t\nfiber x\nparams a\nsigma t -> t\nmap x -> a*x\nlet a = -3/4")
    assert sys.bindings == {"a": Fraction(-3, 4)}


def test_fiberedness_violation():
    sys = parse_system("system s\nbase n\nfiber x\nsigma n -> n + x\nmap x -> x")
    with pytest.raises(FiberednessViolation) as info:
        validate_fibered(sys)
    assert "sigma n" in str(info.value)


def test_vector_field_must_be_fibered():
    with pytest.raises(FiberednessViolation):
        VectorFieldSpec(("t",), ("x",), (), {"t": parse_expr("x")}, {"x": parse_expr("1")})


def test_family_parameter_must_exist():
    sys = parse_system("system s\nbase t\nfiber x\nsigma t -> t\nmap x -> x")
    with pytest.raises(UnknownVariable):
        ParamFamily(sys, "s", 0)


@pytest.mark.parametrize("name", ["dp2.sys", "identity.sys", "translation.sys", "scaling.sys", "dp2_confluence.sys"])
def test_round_trip(name):
    sys = parse_system((SYSTEMS / name).read_text())
    again = parse_system(sys.to_text())
    assert again == sys


def test_round_trip_random_expressions():
    rng = random.Random(3)
    names = ["x", "y", "z"]
    for _ in range(200):
        e = _random_expr(rng, names, 4)
        assert parse_expr(to_text(e)) == e


def _random_expr(rng, names, depth):
    if depth == 0 or rng.random() < 0.3:
        return Var(rng.choice(names)) if rng.random() < 0.6 else Num(Fraction(rng.randint(0, 9)))
    op = rng.choice("+-*/^n")
    a = _random_expr(rng, names, depth - 1)
    if op == "^":
        return parse_expr(f"({to_text(a)})^{rng.randint(0, 3)}")
    if op == "n":
        return parse_expr(f"-({to_text(a)})")
    b = _random_expr(rng, names, depth - 1)
    return parse_expr(f"({to_text(a)}) {op} ({to_text(b)})")


# -- evaluation ------------------------------------------------------------------------


def test_eval_polynomial():
    assert eval_expr(parse_expr("1 - x^2"), {"x": Fraction(2)}) == -3


def test_eval_dp2_component():
    env = {"n": 0, "x": 0, "y": 0, "a": 1, "b": 1, "c": 1}
    assert eval_expr(parse_expr(DP2_MAP), {k: Fraction(v) for k, v in env.items()}) == 1


def test_eval_pole():
    with pytest.raises(EvalDivisionByZero):
        eval_expr(parse_expr("1/(1 - x^2)"), {"x": Fraction(1)})


def test_zero_exponent_is_one_even_at_a_pole():
    assert eval_expr(parse_expr("(1/(1 - x))^0"), {"x": Fraction(1)}) == 1


def test_eval_matches_sympy():
    rng = random.Random(11)
    e = parse_expr(DP2_MAP)
    oracle = sym(e)
    for _ in range(20):
        env = {v: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for v in "nxyabc"}
        if env["x"] ** 2 == 1:
            continue
        want = oracle.subs({sympy.Symbol(k): sympy.Rational(v.numerator, v.denominator) for k, v in env.items()})
        assert eval_expr(e, env) == Fraction(int(want.p), int(want.q))


def test_eval_over_prime_field():
    fld = PrimeField(2**31 - 1)
    v = eval_expr(parse_expr("1/x"), {"x": fld(2)}, fld)
    assert v * 2 == 1


# -- substitution -----------------------------------------------------------------------


def test_substitute_is_syntactic():
    e = substitute(parse_expr("x^2"), {"x": parse_expr("f*eps^2 + y")})
    assert e == parse_expr("(f*eps^2 + y)^2")


def test_substitute_identity_map():
    e = parse_expr(DP2_MAP)
    assert substitute(e, {}) == e
    assert substitute(e, {v: Var(v) for v in free_variables(e)}) == e


def test_substitute_then_eval_equals_composed_environment():
    rng = random.Random(5)
    e = parse_expr(DP2_MAP)
    mapping = {"x": parse_expr("u + v^2"), "n": parse_expr("u*v - 1")}
    for _ in range(50):
        env = {v: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for v in "uvyabc"}
        inner = {k: eval_expr(m, env) for k, m in mapping.items()}
        if inner["x"] ** 2 == 1:
            continue
        assert eval_expr(substitute(e, mapping), env) == eval_expr(e, {**env, **inner})


# -- derivatives --------------------------------------------------------------------------


def test_derivative_of_square():
    d = symbolic_derivative(parse_expr("x^2"), "x")
    assert sympy.simplify(sym(d) - 2 * sympy.Symbol("x")) == 0


def test_derivative_of_absent_variable():
    assert symbolic_derivative(parse_expr("x"), "y") == Num(0)


def test_quotient_rule_against_sympy():
    rng = random.Random(7)
    e = parse_expr("((a + b*n)*x + c)/(1 - x^2)")
    d = symbolic_derivative(e, "x")
    oracle = sympy.diff(sym(e), sympy.Symbol("x"))
    for _ in range(20):
        env = {v: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for v in "nxabc"}
        if env["x"] ** 2 == 1:
            continue
        want = oracle.subs({sympy.Symbol(k): sympy.Rational(v.numerator, v.denominator) for k, v in env.items()})
        assert eval_expr(d, env) == Fraction(int(want.p), int(want.q))


def test_derivative_is_first_order_jet():
    """e(x0 + h) as an order-1 series has linear coefficient de/dx(x0)."""
    rng = random.Random(9)
    e = parse_expr("((a + b*n)*x + c)/(1 - x^2) - x^3")
    d = symbolic_derivative(e, "x")
    for _ in range(20):
        env = {v: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for v in "nxabc"}
        if env["x"] ** 2 == 1:
            continue
        x = TruncatedSeries.constant(env["x"], QQ, 1, 1) + TruncatedSeries.variable(0, QQ, 1, 1)
        s = eval_expr(e, {**env, "x": x})
        assert s.coefficient((1,)) == eval_expr(d, env)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 5), st.integers(-20, 20), st.integers(1, 20))
def test_power_rule(n, num, den):
    x0 = Fraction(num, den)
    d = symbolic_derivative(parse_expr(f"x^{n}"), "x")
    assert eval_expr(d, {"x": x0}) == (n * x0 ** (n - 1) if n else 0)


# -- zero testing ---------------------------------------------------------------------------


def test_binomial_identity_is_zero():
    t = expr_probably_zero(parse_expr("(x+1)^2 - x^2 - 2*x - 1"), trials=40, seed=1)
    assert t.is_zero
    assert t.bound <= Fraction(2, t.modulus - 0) ** 40


def test_distinct_variables_are_not_equal():
    assert not expr_probably_zero(parse_expr("x - y"), trials=40, seed=1).is_zero


def test_zero_test_is_deterministic():
    e = parse_expr("x*y - y*x + z")
    a = expr_probably_zero(e, trials=10, seed=4)
    b = expr_probably_zero(e, trials=10, seed=4)
    assert a == b


def test_constant_expression_is_exact():
    t = expr_probably_zero(parse_expr("2 - 1 - 1"), trials=5, seed=0)
    assert t.is_zero and t.bound == 0 and t.as_report()["exact"]


def test_rational_identity_with_poles():
    e = parse_expr("1/(1 - x) + 1/(1 + x) - 2/(1 - x^2)")
    assert expr_probably_zero(e, trials=40, seed=2).is_zero


def test_degree_overflow():
    with pytest.raises(DegreeOverflow):
        expr_probably_zero(parse_expr("x^100000000"), trials=1, seed=0)


def test_degree_bound_of_quotient():
    assert degree_bound(parse_expr(DP2_MAP)) == (3, 2)


def test_trials_must_be_positive():
    with pytest.raises(ValueError):
        expr_probably_zero(parse_expr("x"), trials=0)
