"""Built-in systems and counting oracles for discrete Painleve II."""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np

from .field import QQ, PrimeField, prime_for_seed
from .jetcore import TruncatedSeries, multi_indices
from .linalg import rank_mod
from .poly import Poly
from .sysdsl.expr import ONE, Var, div, mul, power, sub, substitute
from .sysdsl.parser import parse_expr
from .sysdsl.system import (
    FiberedSystem,
    ParamFamily,
    VectorFieldSpec,
    determinant_expr,
    fiber_jacobian,
    parse_system,
    promote_parameter,
    substitute_bindings,
)
from .sysdsl.zerotest import ZeroTest, expr_probably_zero

DP2_TEXT = """\
# discrete Painleve II as a first-order system over n -> n+1
system dp2
base n
fiber x y
params a b c
sigma n -> n + 1
map x -> -y + ((a + b*n)*x + c)/(1 - x^2)
map y -> x
"""


def dp2_system(a=None, b=None, c=None, *, full: bool = False) -> FiberedSystem:
    """dP2 over n -> n + 1 with fiber (x, y).

    Given values bind the parameters.  With ``full`` the unbound parameters
    become base coordinates fixed by sigma (the 6-dimensional phase space).
    """
    sys = parse_system(DP2_TEXT)
    values = {k: v for k, v in (("a", a), ("b", b), ("c", c)) if v is not None}
    if values:
        sys = sys.bind(values)
    if full:
        for p in [p for p in sys.params if p not in sys.bindings]:
            sys = promote_parameter(sys, p)
    return sys


def fiber_jacobian_det_is_one(sys: FiberedSystem, trials: int = 40, seed: int = 0, modulus=None) -> ZeroTest:
    """Probabilistic test of det(d Phi_fiber / d fiber) == 1."""
    if sys.q != 2:
        raise ValueError("the area check needs a 2-dimensional fiber")
    det = determinant_expr(fiber_jacobian(sys))
    return expr_probably_zero(sub(substitute_bindings(det, sys), ONE), trials, seed, modulus)


def area_invariant(fiber=("x", "y"), field=None) -> Poly:
    """det of the order-1 block: x[1,0] y[0,1] - x[0,1] y[1,0]."""
    f = field or QQ
    x, y = fiber
    v = lambda name: Poly.var(name, f)  # noqa: E731
    return v(f"{x}[1,0]") * v(f"{y}[0,1]") - v(f"{x}[0,1]") * v(f"{y}[1,0]")


# -- symplectic jets ------------------------------------------------------------------------


def symplectic_jet_dim_closed_form(k: int) -> int:
    return 2 + 2 * (comb(k + 2, 2) - 1) - comb(k + 1, 2)


def _partial(s: TruncatedSeries, j: int) -> TruncatedSeries:
    """d s / d eps_j as a series of order k - 1."""
    k = s.order
    terms = {}
    for alpha, c in s.items():
        if alpha[j] and c:
            beta = tuple(a - (1 if i == j else 0) for i, a in enumerate(alpha))
            terms[beta] = c * alpha[j]
    return TruncatedSeries.from_dict(terms, s.field, s.nvars, k - 1)


def _poly1(rng, fld, var: TruncatedSeries, k: int) -> TruncatedSeries:
    """Random polynomial of degree <= k in one series, without constant or linear part."""
    out = var * 0
    p = var * var
    for _ in range(2, k + 1):
        out = out + p * fld.random(rng)
        p = p * var
    return out


def random_symplectic_jet(k: int, seed: int = 0, modulus: int | None = None) -> tuple:
    """A k-jet of an area-preserving planar map: shears, an SL2 element and a translation."""
    p = prime_for_seed(seed) if modulus is None else modulus
    fld = PrimeField(p)
    rng = random.Random(f"symplectic:{seed}:{k}")
    X = TruncatedSeries.variable(0, fld, 2, k)
    Y = TruncatedSeries.variable(1, fld, 2, k)
    for _ in range(3):
        Y = Y + _poly1(rng, fld, X, k)
        X = X + _poly1(rng, fld, Y, k)
    while True:
        a, b, c = (fld.random(rng) for _ in range(3))
        if a:
            d = (1 + b * c) / a
            break
    X, Y = X * a + Y * b, X * c + Y * d
    return X + fld.random(rng), Y + fld.random(rng)


def _det_series(phi) -> TruncatedSeries:
    j = [[_partial(f, i) for i in range(2)] for f in phi]
    return j[0][0] * j[1][1] - j[0][1] * j[1][0]


def symplectic_jet_dim(k: int, seed: int = 0, modulus: int | None = None) -> int:
    """dim of {k-jets of planar maps with det J = 1 through order k - 1}, by rank.

    Counts all 2 * C(k+2, 2) coefficients of two components (target point
    included) minus the rank of the linearised constraint at a random
    area-preserving jet.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    phi = random_symplectic_jet(k, seed, modulus)
    det = _det_series(phi)
    if not (det - 1).is_zero():
        raise AssertionError("base jet is not area preserving")
    fld = phi[0].field
    jac = [[_partial(f, i) for i in range(2)] for f in phi]
    idx = multi_indices(2, k)
    columns = []
    for comp in range(2):
        for alpha in idx:
            delta = TruncatedSeries.from_dict({alpha: 1}, fld, 2, k)
            dj = [_partial(delta, i) for i in range(2)]
            zero = dj[0] * 0
            d = [[dj[0], dj[1]], [zero, zero]] if comp == 0 else [[zero, zero], [dj[0], dj[1]]]
            lin = jac[0][0] * d[1][1] + d[0][0] * jac[1][1] - jac[0][1] * d[1][0] - d[0][1] * jac[1][0]
            columns.append([int(c) for c in lin.coeffs])
    matrix = np.array(columns, dtype=np.int64).T
    return len(columns) - rank_mod(matrix, fld.p)


def dp2_expected_dimension(k: int) -> int:
    """3 source coordinates, 1 target base coordinate, fiberwise symplectic jets."""
    return 4 + symplectic_jet_dim(k)


# -- confluence ---------------------------------------------------------------------------


# inverse change of variables; b = eps^3 + eps^4 beta makes Phi at eps = 0 the identity
_INVERSE = {
    "n": "t/eps",
    "y": "eps*f",
    "x": "eps*f + eps^2*g",
    "a": "2 + eps^4*alpha",
    "b": "eps^3 + eps^4*beta",
    "c": "eps^3*gamma",
}
# the offset as printed in the source derivation, kept for the negative control
_PRINTED_B = "eps^2 + eps^4*beta"

X_GAMMA = {"t": "1", "f": "g", "g": "2*f^3 + t*f + gamma", "alpha": "0", "beta": "0", "gamma": "0"}


@dataclass(frozen=True)
class ConfluenceFixture:
    family: ParamFamily
    expected: VectorFieldSpec

    def expected_components(self) -> dict:
        return self.expected.components()


def dp2_confluence_system(printed_offset: bool = False) -> FiberedSystem:
    """dP2 in the variables (t; f, g) with (alpha, beta, gamma) as base coordinates, parameter eps."""
    dp2 = dp2_system()
    inv = {k: parse_expr(v) for k, v in _INVERSE.items()}
    if printed_offset:
        inv["b"] = parse_expr(_PRINTED_B)
    eps = Var("eps")
    b_offset = power(eps, 2) if printed_offset else power(eps, 3)
    x_new = substitute(dp2.maps["x"], inv)
    y_new = substitute(dp2.maps["y"], inv)
    n_new = substitute(dp2.sigma["n"], inv)
    sigma = {
        "t": mul(eps, n_new),
        "alpha": div(sub(inv["a"], parse_expr("2")), power(eps, 4)),
        "beta": div(sub(inv["b"], b_offset), power(eps, 4)),
        "gamma": div(inv["c"], power(eps, 3)),
    }
    maps = {
        "f": div(y_new, eps),
        "g": div(sub(x_new, y_new), power(eps, 2)),
    }
    return FiberedSystem(
        name="dp2_confluence",
        base=("t", "alpha", "beta", "gamma"),
        fiber=("f", "g"),
        params=("eps",),
        sigma=sigma,
        maps=maps,
    )


def dp2_confluence_fixture(printed_offset: bool = False) -> ConfluenceFixture:
    sys = dp2_confluence_system(printed_offset)
    exprs = {k: parse_expr(v) for k, v in X_GAMMA.items()}
    expected = VectorFieldSpec(
        base=sys.base,
        fiber=sys.fiber,
        params=(),
        base_components={b: exprs[b] for b in sys.base},
        fiber_components={x: exprs[x] for x in sys.fiber},
    )
    return ConfluenceFixture(ParamFamily(sys, "eps", 0), expected)


def write_confluence_file(path) -> str:
    """Regenerate the shipped confluence system file; returns its text."""
    text = (
        "# generated by `jetgroupoid regen-confluence`; do not edit\n"
        "# dP2 under t = n*eps, y = eps*f, x = eps*f + eps^2*g,\n"
        "# a = 2 + eps^4*alpha, b = eps^3 + eps^4*beta, c = eps^3*gamma\n"
    ) + dp2_confluence_system().to_text()
    Path(path).write_text(text, encoding="utf-8")
    return text


def pii_vector_field(gamma=None) -> dict:
    """Expected components, optionally with gamma pinned."""
    out = dict(X_GAMMA)
    if gamma is not None:
        out = {k: str(substitute(parse_expr(v), {"gamma": parse_expr(str(gamma))})) for k, v in out.items()}
    return out


def confluence_area_invariant() -> Poly:
    """The order-1 area form on the (f, g) fiber."""
    return area_invariant(("f", "g"))


__all__ = [
    "DP2_TEXT",
    "X_GAMMA",
    "dp2_system",
    "fiber_jacobian_det_is_one",
    "area_invariant",
    "symplectic_jet_dim",
    "symplectic_jet_dim_closed_form",
    "random_symplectic_jet",
    "dp2_expected_dimension",
    "ConfluenceFixture",
    "dp2_confluence_system",
    "dp2_confluence_fixture",
    "write_confluence_file",
    "pii_vector_field",
    "confluence_area_invariant",
]
