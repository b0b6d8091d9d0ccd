"""Continuous limits of parametric families: Phi_s = Id + (s - s0) X + o(s - s0).

Each component is shifted to s0 + s and expanded exactly into numerator
and denominator polynomials.  Common powers of s are stripped, which
clears the negative powers created by scalings like f = y / eps before
anything is differentiated.  X is then the s-derivative at 0, taken
symbolically.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DegenerateImage,
    EvalDivisionByZero,
    IndeterminacyPoint,
    NotIdentityAtSpecialValue,
    PoleAtSpecialValue,
    PoleSaturated,
    RestrictionUndefined,
)
from .field import PrimeField, prime_for_seed
from .jetcore import random_frame
from .poly import Poly, expand_rational, rational_to_expr
from .prolong import apply_RX, prolong_map
from .sysdsl.expr import (
    ZERO,
    Expr,
    Var,
    add,
    const,
    degree_bound,
    mul,
    power,
    sub,
    substitute,
    symbolic_derivative,
    to_text,
)
from .sysdsl.system import FiberedSystem, ParamFamily, VectorFieldSpec
from .sysdsl.zerotest import ZeroTest, combine, expr_probably_zero, schwartz_zippel_bound

MAX_RESAMPLES = 100


@dataclass(frozen=True)
class ComponentExpansion:
    variable: str
    value: Expr
    first_order: Expr
    identity_test: ZeroTest
    remainder_test: ZeroTest


@dataclass
class ConfluenceResult:
    family: ParamFamily
    field: VectorFieldSpec
    components: dict

    def canonical(self) -> dict:
        return {v: to_text(c.first_order) for v, c in self.components.items()}

    def identity_test(self) -> ZeroTest:
        return combine([c.identity_test for c in self.components.values()])

    def remainder_test(self) -> ZeroTest:
        return combine([c.remainder_test for c in self.components.values()])


def _strip(p: Poly, s: str) -> tuple[Poly, int]:
    e = p.min_degree(s)
    return (p.divide_monomial(((s, e),)) if e else p), e


def canonical_expr(e: Expr) -> Expr:
    """Expanded normal form (numerator over denominator, monomial factors cancelled)."""
    n, d = expand_rational(e)
    return rational_to_expr(n, d)


def expand_component(
    var: str, e: Expr, s: str, s0, trials: int = 40, seed: int = 0, modulus: int | None = None
) -> ComponentExpansion:
    """Value at s0 and first-order coefficient of one component."""
    shifted = substitute(e, {s: add(const(s0), Var(s))})
    n, d = expand_rational(shifted)
    if n.is_zero():
        value, first = ZERO, ZERO
        h_num, h_den, a = n, d, 0
    else:
        n, a_n = _strip(n, s)
        d, a_d = _strip(d, s)
        if a_n < a_d:
            raise PoleAtSpecialValue(var)
        a = a_n - a_d
        h_num, h_den = n, d
        h = mul(power(Var(s), a), rational_to_expr(n, d))
        at0 = {s: ZERO}
        value = canonical_expr(substitute(h, at0))
        first = canonical_expr(substitute(symbolic_derivative(h, s), at0))
    ident = expr_probably_zero(sub(value, Var(var)), trials, seed, modulus)
    if not ident.is_zero:
        raise NotIdentityAtSpecialValue(var)
    # remainder: s^a N - (var + s X) D must vanish to second order in s
    xn, xd = expand_rational(first)
    sv = Poly.var(s)
    rem = (sv**a) * h_num * xd - (Poly.var(var) * xd + sv * xn) * h_den
    coeffs = rem.coefficients_in(s)
    low = [coeffs.get(j, Poly({})) for j in (0, 1)]
    rtest = combine([expr_probably_zero(c.to_expr(), trials, seed + 1 + j, modulus) for j, c in enumerate(low)])
    return ComponentExpansion(var, value, first, ident, rtest)


def extract_vector_field(
    family: ParamFamily, trials: int = 40, seed: int = 0, modulus: int | None = None
) -> ConfluenceResult:
    """X with Phi_s = Id + (s - s0) X + o(s - s0), after checking Phi_{s0} = Id."""
    sys = family.system
    s = family.param
    bound = {p: const(v) for p, v in sys.bindings.items() if p != s}
    comps = {}
    table = [(b, sys.sigma[b]) for b in sys.base] + [(x, sys.maps[x]) for x in sys.fiber]
    for var, e in table:
        comps[var] = expand_component(var, substitute(e, bound), s, family.special, trials, seed, modulus)
    X = VectorFieldSpec(
        base=sys.base,
        fiber=sys.fiber,
        params=tuple(p for p in sys.params if p != s),
        base_components={b: comps[b].first_order for b in sys.base},
        fiber_components={x: comps[x].first_order for x in sys.fiber},
    )
    return ConfluenceResult(family, X, comps)


def vector_fields_agree(
    X: VectorFieldSpec, expected: dict, trials: int = 40, seed: int = 0, modulus=None, partial: bool = False
) -> ZeroTest:
    """Probabilistic componentwise equality of X with ``expected`` (name -> Expr).

    Missing components are expected to vanish unless ``partial`` is set, in
    which case only the named ones are compared.
    """
    names = [v for v in list(X.base) + list(X.fiber) if not partial or v in expected]
    tests = [expr_probably_zero(sub(X.component(v), expected.get(v, ZERO)), trials, seed, modulus) for v in names]
    return combine(tests)


# -- invariants --------------------------------------------------------------------------


def _as_pair(F):
    if isinstance(F, Poly):
        return F, Poly.const(1, F.field)
    return F


def check_invariant_restricts(F, X: VectorFieldSpec, k: int, trials: int = 40, seed: int = 0, modulus=None) -> ZeroTest:
    """Test RX . F = 0, i.e. that F is a differential invariant of X."""
    num, den = _as_pair(F)
    if den.is_zero() or expr_probably_zero(den.to_expr(), trials, seed, modulus).is_zero:
        raise RestrictionUndefined("denominator of the invariant vanishes identically")
    rn, _ = apply_RX(X, (num, den), k)
    return expr_probably_zero(rn.to_expr(), trials, seed, modulus)


def _frame_env(sys: FiberedSystem, r) -> dict:
    return r.jet_values(sys.fiber, sys.base)


def check_family_invariance(
    F, system, k: int, trials: int = 40, seed: int = 0, modulus: int | None = None
) -> ZeroTest:
    """Test F o R_k Phi = F at random frames and random parameter values over F_p."""
    sys = system.system if isinstance(system, ParamFamily) else system
    num, den = _as_pair(F)
    p = prime_for_seed(seed) if modulus is None else modulus
    fld = PrimeField(p)
    num, den = num.to_field(fld), den.to_field(fld)
    rng = random.Random(f"invariance:{seed}:{p}")
    unbound = [q for q in sys.params if q not in sys.bindings]
    for _ in range(trials):
        for _attempt in range(MAX_RESAMPLES):
            pinned = sys.bind({q: fld.random(rng).v for q in unbound}) if unbound else sys
            r = random_frame(rng, fld, sys.q, k, len(sys.base))
            try:
                image = prolong_map(pinned, r)
                before, after = _frame_env(sys, r), _frame_env(sys, image)
                values = {q: fld.convert(v) for q, v in pinned.bindings.items()}
                lhs = num.evaluate({**values, **after}) * den.evaluate({**values, **before})
                rhs = num.evaluate({**values, **before}) * den.evaluate({**values, **after})
            except (IndeterminacyPoint, DegenerateImage, EvalDivisionByZero, ZeroDivisionError):
                continue
            break
        else:
            raise PoleSaturated(f"{MAX_RESAMPLES} consecutive frames hit an indeterminacy")
        if lhs != rhs:
            return ZeroTest(False, Fraction(0), trials, 0, p)
    deg_phi = 0
    for e in list(sys.sigma.values()) + list(sys.maps.values()):
        dn, dd = degree_bound(e)
        deg_phi = max(deg_phi, dn + dd)
    deg_f = max(num.degree(), den.degree(), 0)
    degree = 2 * deg_f * (k + 1) * max(deg_phi, 1) + 2 * deg_f
    return ZeroTest(True, schwartz_zippel_bound(degree, degree, p, trials), trials, degree, p)


__all__ = [
    "ComponentExpansion",
    "ConfluenceResult",
    "canonical_expr",
    "expand_component",
    "extract_vector_field",
    "vector_fields_agree",
    "check_invariant_restricts",
    "check_family_invariance",
]
