import random
from fractions import Fraction

import pytest
import sympy
from conftest import eps_symbols, from_sympy, rand_series, to_sympy, truncate_sympy

from jetgroupoid.errors import DivisionByNonUnit, FieldMismatch, NonPointedInner, SingularLinearPart
from jetgroupoid.field import QQ, PrimeField
from jetgroupoid.jetcore import (
    FrameJet,
    MapJet,
    SourceJet,
    TruncatedSeries,
    compose_tuple,
    coordinate_names,
    frame_compose_gamma,
    identity_tuple,
    jet_name,
    map_jet_from_pair,
    multi_indices,
    random_frame,
    random_source_jet,
    series_arith,
    series_compose,
    tuple_invert,
)


def var(j, q, k):
    return TruncatedSeries.variable(j, QQ, q, k)


def one(q, k):
    return TruncatedSeries.constant(1, QQ, q, k)


# -- multi-indices --------------------------------------------------------------


def test_multi_indices_graded_lex():
    assert multi_indices(2, 2) == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    assert len(multi_indices(3, 4)) == 35


def test_jet_name_format():
    assert jet_name("x", (1, 0)) == "x[1,0]"


# -- series arithmetic ------------------------------------------------------------


def test_telescoping_product():
    e = var(0, 1, 2)
    assert series_arith("mul", one(1, 2) + e, one(1, 2) - e) == one(1, 2) - e * e


def test_geometric_series():
    e = var(0, 1, 3)
    got = series_arith("div", one(1, 3), one(1, 3) - e)
    assert got == one(1, 3) + e + e * e + e * e * e


def test_truncation_kills_order_two():
    e1, e2 = var(0, 2, 1), var(1, 2, 1)
    assert series_arith("mul", e1 + e2, e1 - e2).is_zero()


def test_division_by_non_unit():
    e = var(0, 1, 2)
    with pytest.raises(DivisionByNonUnit):
        series_arith("div", one(1, 2), e)


def test_field_mismatch():
    a = TruncatedSeries.constant(1, PrimeField(2**31 - 1), 1, 2)
    with pytest.raises(FieldMismatch):
        a + one(1, 2)


def test_ring_axioms_against_sympy(rng):
    for _ in range(100):
        q, k = rng.randint(1, 3), rng.randint(0, 4)
        syms = eps_symbols(q)
        a, b, c = (rand_series(rng, q, k) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a
        assert a * b == from_sympy(truncate_sympy(to_sympy(a, syms) * to_sympy(b, syms), syms, k), syms, k)


def test_division_inverts_multiplication(rng):
    for _ in range(100):
        q, k = rng.randint(1, 3), rng.randint(0, 4)
        a, b = rand_series(rng, q, k), rand_series(rng, q, k)
        if not b.constant_term:
            continue
        assert (a / b) * b == a


def test_truncation_compatibility(rng):
    for _ in range(100):
        q, k = rng.randint(1, 3), rng.randint(1, 4)
        k2 = rng.randint(0, k)
        a, b = rand_series(rng, q, k), rand_series(rng, q, k)
        assert (a * b).truncate(k2) == a.truncate(k2) * b.truncate(k2)
        assert (a + b).truncate(k2) == a.truncate(k2) + b.truncate(k2)
        inner = [rand_series(rng, q, k, constant=False) for _ in range(q)]
        assert a.compose(inner).truncate(k2) == a.truncate(k2).compose([s.truncate(k2) for s in inner])


def test_jet_coordinates_carry_factorials():
    e = var(0, 1, 3)
    s = (one(1, 3) - e).inverse()
    assert s.derivatives() == [1, 1, 2, 6]


# -- composition --------------------------------------------------------------------


def test_compose_direct_expansion():
    e = var(0, 1, 3)
    assert series_compose(e * e, [e + e * e]) == e * e + 2 * e * e * e


def test_compose_identity(rng):
    a = rand_series(rng, 2, 3)
    assert series_compose(a, identity_tuple(QQ, 2, 3)) == a


def test_compose_variable_swap():
    e1, e2 = var(0, 2, 2), var(1, 2, 2)
    assert series_compose(one(2, 2) + e1 + e2, [e2, e1]) == one(2, 2) + e2 + e1


def test_compose_rejects_non_pointed_inner():
    e = var(0, 1, 2)
    with pytest.raises(NonPointedInner):
        series_compose(e, [e + 1])


def test_compose_against_sympy(rng):
    for _ in range(100):
        q, k = rng.randint(1, 2), rng.randint(1, 4)
        syms = eps_symbols(q)
        outer = rand_series(rng, q, k)
        inner = [rand_series(rng, q, k, constant=False) for _ in range(q)]
        oracle = to_sympy(outer, syms).subs({s: to_sympy(i, syms) for s, i in zip(syms, inner)}, simultaneous=True)
        assert outer.compose(inner) == from_sympy(truncate_sympy(oracle, syms, k), syms, k)


# -- inversion -----------------------------------------------------------------------------


def test_invert_linear():
    e = var(0, 1, 2)
    (g,) = tuple_invert([2 * e])
    assert g == e * Fraction(1, 2)


def test_invert_quadratic():
    e = var(0, 1, 3)
    (g,) = tuple_invert([e + e * e])
    assert g == e - e * e + 2 * e * e * e
    assert series_compose(e + e * e, [g]) == e


def test_invert_identity():
    ident = identity_tuple(QQ, 2, 3)
    assert tuple_invert(ident) == ident


def test_invert_singular():
    e1, e2 = var(0, 2, 2), var(1, 2, 2)
    with pytest.raises(SingularLinearPart):
        tuple_invert([e1 + e2, 2 * e1 + 2 * e2])


def test_invert_both_sides(rng):
    count = 0
    while count < 100:
        q, k = rng.randint(1, 3), rng.randint(1, 4)
        f = tuple(rand_series(rng, q, k, constant=False) for _ in range(q))
        try:
            g = tuple_invert(f)
        except SingularLinearPart:
            continue
        ident = identity_tuple(QQ, q, k)
        assert compose_tuple(f, g) == ident
        assert compose_tuple(g, f) == ident
        count += 1


# -- Gamma_k -------------------------------------------------------------------------------


def _random_gamma(rng, q, k):
    while True:
        try:
            return SourceJet(tuple(rand_series(rng, q, k, constant=False) for _ in range(q)))
        except SingularLinearPart:
            continue


def _random_frame(rng, q, k, base_dim=1):
    while True:
        try:
            return FrameJet(tuple(Fraction(rng.randint(-5, 5)) for _ in range(base_dim)),
                            tuple(rand_series(rng, q, k) for _ in range(q)))
        except SingularLinearPart:
            continue


def test_gamma_identity_action(rng):
    r = _random_frame(rng, 2, 3)
    assert frame_compose_gamma(r, SourceJet.identity(QQ, 2, 3)) == r


def test_gamma_linear_action_is_matrix_product():
    q, k = 2, 2
    e = [var(j, q, k) for j in range(q)]
    A = sympy.Matrix([[1, 2], [3, 5]])
    B = sympy.Matrix([[2, -1], [1, 1]])

    def lin(M, const=0):
        return tuple(sum((e[j] * int(M[i, j]) for j in range(q)), one(q, k) * const) for i in range(q))

    r = FrameJet((0,), lin(A, 1))
    g = SourceJet(lin(B))
    out = frame_compose_gamma(r, g)
    assert out.jacobian() == [[int(v) for v in row] for row in (A * B).tolist()]


def test_gamma_group_laws(rng):
    for _ in range(100):
        q, k = rng.randint(1, 2), rng.randint(1, 4)
        r = _random_frame(rng, q, k)
        g1, g2, g3 = (_random_gamma(rng, q, k) for _ in range(3))
        assert frame_compose_gamma(frame_compose_gamma(r, g1), g2) == frame_compose_gamma(r, g1.compose(g2))
        assert g1.compose(g2).compose(g3) == g1.compose(g2.compose(g3))
        assert g1.compose(g1.inverse()) == SourceJet.identity(QQ, q, k)


def test_source_jet_must_fix_origin():
    e = var(0, 1, 2)
    with pytest.raises(NonPointedInner):
        SourceJet((e + 1,))


def test_frame_requires_invertible_jacobian():
    e1 = var(0, 2, 1)
    with pytest.raises(SingularLinearPart):
        FrameJet((), (e1, e1 * 2))


# -- map jets ------------------------------------------------------------------------------


def test_pair_with_itself_is_unit(rng):
    r = _random_frame(rng, 2, 3)
    m = map_jet_from_pair(r, r)
    assert m == MapJet.identity(r.base, r.point, 3)


def test_linear_pair_gives_matrix_quotient():
    q, k = 2, 1
    e = [var(j, q, k) for j in range(q)]
    A = sympy.Matrix([[1, 2], [3, 5]])
    B = sympy.Matrix([[2, -1], [1, 1]])

    def frame(M):
        return FrameJet((), tuple(sum((e[j] * int(M[i, j]) for j in range(q)), TruncatedSeries.zero(QQ, q, k)) for i in range(q)))

    m = map_jet_from_pair(frame(A), frame(B))
    expected = A * B.inv()
    assert m.jacobian() == [[Fraction(int(v.p), int(v.q)) for v in row] for row in expected.tolist()]


def test_diagonal_invariance(rng):
    for _ in range(100):
        q, k = rng.randint(1, 2), rng.randint(1, 3)
        r, s = _random_frame(rng, q, k), _random_frame(rng, q, k)
        g = _random_gamma(rng, q, k)
        assert map_jet_from_pair(frame_compose_gamma(r, g), frame_compose_gamma(s, g)) == map_jet_from_pair(r, s)


def test_groupoid_composition(rng):
    for _ in range(100):
        q, k = rng.randint(1, 2), rng.randint(1, 3)
        r, s, t = (_random_frame(rng, q, k) for _ in range(3))
        lhs = map_jet_from_pair(r, s).compose(map_jet_from_pair(s, t))
        assert lhs == map_jet_from_pair(r, t)


def test_map_jet_inverse(rng):
    for _ in range(30):
        r, s = _random_frame(rng, 2, 3), _random_frame(rng, 2, 3)
        m = map_jet_from_pair(r, s)
        assert m.inverse() == map_jet_from_pair(s, r)
        assert m.compose(m.inverse()) == MapJet.identity(r.base, r.point, 3)


def test_compose_requires_matching_endpoints(rng):
    r, s, t = (_random_frame(rng, 2, 2) for _ in range(3))
    with pytest.raises(ValueError):
        map_jet_from_pair(r, s).compose(map_jet_from_pair(r, t))


def test_coordinate_order():
    m = MapJet.identity((7,), (2, 3), 1)
    assert coordinate_names(["n"], ["x", "y"], 1) == [
        "n", "x", "y", "n'", "x[0,0]", "x[1,0]", "x[0,1]", "y[0,0]", "y[1,0]", "y[0,1]",
    ]
    assert m.coordinates() == [7, 2, 3, 7, 2, 1, 0, 3, 0, 1]


def test_prime_field_mode():
    fld = PrimeField(2**31 - 1)
    rng = random.Random(5)
    r = random_frame(rng, fld, 2, 3, 1)
    g = random_source_jet(rng, fld, 2, 3)
    s = random_frame(rng, fld, 2, 3, 1)
    assert map_jet_from_pair(frame_compose_gamma(r, g), frame_compose_gamma(s, g)) == map_jet_from_pair(r, s)
