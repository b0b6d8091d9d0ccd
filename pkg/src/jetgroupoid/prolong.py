"""Prolongation of fibered maps and vector fields to order-k frames.

Jet polynomials are :class:`~jetgroupoid.poly.Poly` objects whose
variables are base coordinates, parameters, and jet coordinates named
``x[alpha]`` (see :func:`jetgroupoid.jetcore.jet_name`).
"""

from __future__ import annotations

import re
from typing import Iterator, Sequence

from .errors import (
    DegenerateImage,
    DivisionByNonUnit,
    EvalDivisionByZero,
    IndeterminacyPoint,
    OrderOverflow,
    SingularLinearPart,
)
from .field import QQ
from .jetcore import FrameJet, MapJet, jet_name, map_jet_from_pair, multi_indices, standard_frame
from .poly import Poly, expand_rational
from .sysdsl.expr import eval_expr
from .sysdsl.system import FiberedSystem, VectorFieldSpec

_JET = re.compile(r"^(?P<var>[A-Za-z_][A-Za-z0-9_]*)\[(?P<alpha>\d+(?:,\d+)*)\]$")

JetPolynomial = Poly


def parse_jet_name(name: str):
    """``"x[1,0]"`` -> ``("x", (1, 0))``; None for plain variables."""
    m = _JET.match(name)
    if m is None:
        return None
    return m.group("var"), tuple(int(a) for a in m.group("alpha").split(","))


def jet_variable(var: str, alpha: Sequence[int], field=QQ) -> Poly:
    return Poly.var(jet_name(var, alpha), field)


def to_jet_coordinates(p: Poly, fiber: Sequence[str]) -> Poly:
    """Rename each fiber variable x to its order-0 jet coordinate x[0,...,0]."""
    zero = (0,) * len(fiber)
    names = {x: jet_name(x, zero) for x in fiber}
    return p.map_variables(lambda v: names.get(v, v))


# -- frames ------------------------------------------------------------------------


def _scalar_env(sys: FiberedSystem, base_values, field) -> dict:
    env = dict(zip(sys.base, base_values))
    env.update(sys.parameter_values(field))
    return env


def prolong_map(sys: FiberedSystem, r: FrameJet, k: int | None = None) -> FrameJet:
    """R_k Phi applied to the frame r: base sigma(b), components Phi_i(b, r(eps))."""
    if k is not None and k != r.order:
        raise ValueError(f"frame has order {r.order}, asked for {k}")
    if len(r.base) != len(sys.base) or r.q != sys.q:
        raise ValueError("frame dimensions do not match the system")
    field = r.field
    env = _scalar_env(sys, r.base, field)
    try:
        new_base = tuple(eval_expr(e, env, field) for e in sys.sigma_exprs())
    except EvalDivisionByZero as exc:
        raise IndeterminacyPoint(f"sigma undefined at this base point: {exc}") from exc
    env.update(zip(sys.fiber, r.components))
    try:
        comps = []
        for e in sys.map_exprs():
            value = eval_expr(e, env, field)
            if not hasattr(value, "coeffs"):
                # component independent of the fiber: a constant series
                value = r.components[0] * 0 + value
            comps.append(value)
    except (DivisionByNonUnit, EvalDivisionByZero) as exc:
        raise IndeterminacyPoint(f"map undefined at this frame: {exc}") from exc
    try:
        return FrameJet(new_base, tuple(comps))
    except SingularLinearPart as exc:
        raise DegenerateImage("image frame has singular Jacobian") from exc


def iterate_frames(sys: FiberedSystem, r: FrameJet, n: int) -> FrameJet:
    for step in range(1, n + 1):
        try:
            r = prolong_map(sys, r)
        except (IndeterminacyPoint, DegenerateImage) as exc:
            raise IndeterminacyPoint(str(exc), step=step) from exc
    return r


def iterate_jets(
    sys: FiberedSystem, base: Sequence, point: Sequence, k: int, max_iter: int, field=QQ
) -> Iterator[MapJet]:
    """Yield j_k(Phi^n) at (base, point) for n = 1 .. max_iter."""
    s = standard_frame(base, point, k, field)
    r = s
    for step in range(1, max_iter + 1):
        try:
            r = prolong_map(sys, r)
        except (IndeterminacyPoint, DegenerateImage) as exc:
            raise IndeterminacyPoint(str(exc), step=step) from exc
        # s is affine with identity linear part, so r o s^{-1} re-centres trivially
        yield MapJet(s.base, s.point, r.base, r.components)


def taylor_jet_of_iterate(
    sys: FiberedSystem, base: Sequence, point: Sequence, n: int, k: int, field=QQ
) -> MapJet:
    """j_k(Phi^n) at the point (base, point) of M, via the standard frame."""
    if n < 0:
        raise ValueError("n must be non-negative")
    s = standard_frame(base, point, k, field)
    if n == 0:
        return MapJet.identity(s.base, s.point, k, field)
    return map_jet_from_pair(iterate_frames(sys, s, n), s)


# -- total derivatives and RX ---------------------------------------------------------


def _shift(alpha: Sequence[int], j: int) -> tuple:
    return tuple(a + (1 if i == j else 0) for i, a in enumerate(alpha))


def total_derivative(F: Poly, j: int, q: int, k: int) -> Poly:
    """D_j F = sum over jet coordinates x[alpha] of dF/dx[alpha] * x[alpha + e_j].

    ``j`` is 0-based.  Base and parameter variables are annihilated.
    """
    if not 0 <= j < q:
        raise ValueError(f"direction {j} out of range for q = {q}")
    out = Poly({}, F.field)
    for v in sorted(F.variables()):
        parsed = parse_jet_name(v)
        if parsed is None:
            continue
        name, alpha = parsed
        if len(alpha) != q:
            raise ValueError(f"jet coordinate {v} does not have {q} indices")
        if sum(alpha) >= k:
            raise OrderOverflow(f"D_{j + 1} of {v} needs order {sum(alpha) + 1} > {k}")
        out = out + F.diff(v) * Poly.var(jet_name(name, _shift(alpha, j)), F.field)
    return out


def filtration_degree(F: Poly) -> int:
    """Highest jet order among the variables of F (-1 if F has none)."""
    orders = [sum(p[1]) for v in F.variables() if (p := parse_jet_name(v)) is not None]
    return max(orders, default=-1)


class _Denominators:
    """Fractions over products of powers of a few base polynomials."""

    def __init__(self, field):
        self.field = field
        self.bases: list[Poly] = []
        self.terms: list[tuple[Poly, dict]] = []

    def index(self, d: Poly) -> int:
        for i, b in enumerate(self.bases):
            if b == d:
                return i
        self.bases.append(d)
        return len(self.bases) - 1

    def add(self, num: Poly, den: dict):
        if not num.is_zero():
            self.terms.append((num, den))

    def result(self) -> tuple[Poly, Poly]:
        lcm: dict = {}
        for _, den in self.terms:
            for i, e in den.items():
                lcm[i] = max(lcm.get(i, 0), e)
        total = Poly({}, self.field)
        for num, den in self.terms:
            factor = num
            for i, e in lcm.items():
                extra = e - den.get(i, 0)
                if extra:
                    factor = factor * self.bases[i] ** extra
            total = total + factor
        d = Poly.const(1, self.field)
        for i, e in lcm.items():
            d = d * self.bases[i] ** e
        return total, d


def prolonged_components(X: VectorFieldSpec, k: int, field=QQ) -> dict:
    """d^alpha(a_i) for every fiber component and |alpha| <= k, as (N, Q, m) with value N / Q^m."""
    q = len(X.fiber)
    out = {}
    for x in X.fiber:
        n, d = expand_rational(X.fiber_components[x], field)
        n, d = to_jet_coordinates(n, X.fiber), to_jet_coordinates(d, X.fiber)
        table = {(0,) * q: (n, d, 1)}
        for alpha in multi_indices(q, k)[1:]:
            j = next(i for i, a in enumerate(alpha) if a)
            parent = tuple(a - (1 if i == j else 0) for i, a in enumerate(alpha))
            pn, qd, m = table[parent]
            dq = total_derivative(qd, j, q, k)
            dn = total_derivative(pn, j, q, k)
            if dq.is_zero():
                table[alpha] = (dn, qd, m)
            else:
                table[alpha] = (dn * qd - pn * dq * m, qd, m + 1)
        out[x] = table
    return out


def _rx_poly(X: VectorFieldSpec, F: Poly, k: int, comps: dict, acc: _Denominators):
    q = len(X.fiber)
    field = F.field
    for b in X.base:
        dF = F.diff(b)
        if dF.is_zero():
            continue
        cn, cd = expand_rational(X.base_components[b], field)
        acc.add(cn * dF, {acc.index(cd): 1})
    for v in sorted(F.variables()):
        parsed = parse_jet_name(v)
        if parsed is None:
            continue
        name, alpha = parsed
        if name not in comps or len(alpha) != q:
            continue
        if sum(alpha) > k:
            raise OrderOverflow(f"{v} exceeds order {k}")
        n, qd, m = comps[name][alpha]
        acc.add(n * F.diff(v), {acc.index(qd): m})


def apply_RX(X: VectorFieldSpec, F, k: int) -> tuple[Poly, Poly]:
    """RX . F as an unnormalised (numerator, denominator) pair.

    ``F`` is a jet polynomial or a (numerator, denominator) pair of them.
    """
    if isinstance(F, Poly):
        num, den = F, None
    else:
        num, den = F
    field = num.field
    comps = prolonged_components(X, k, field)
    acc = _Denominators(field)
    _rx_poly(X, num, k, comps, acc)
    a, la = acc.result()
    if den is None:
        return a, la
    acc2 = _Denominators(field)
    _rx_poly(X, den, k, comps, acc2)
    b, lb = acc2.result()
    return a * lb * den - num * b * la, la * lb * den * den


__all__ = [
    "JetPolynomial",
    "parse_jet_name",
    "jet_variable",
    "to_jet_coordinates",
    "prolong_map",
    "iterate_frames",
    "iterate_jets",
    "taylor_jet_of_iterate",
    "total_derivative",
    "filtration_degree",
    "prolonged_components",
    "apply_RX",
]
