"""Truncated multivariate power series and the frame / map-jet algebra.

Coefficient convention
----------------------
A :class:`TruncatedSeries` stores *Taylor* coefficients ``c_alpha`` so that
``f(eps) = sum c_alpha eps^alpha``; products and compositions then need no
factorials.  Jet coordinates are the raw derivatives
``r^alpha = alpha! * c_alpha`` and are exposed through
:meth:`TruncatedSeries.derivative` and :meth:`MapJet.coordinates`.  The
conversion divides by at most ``k!``, which is invertible in F_p for p > k.

Multi-indices are enumerated in graded-lex order: by total degree, then
lexicographically descending, e.g. for q = 2:
``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Sequence

from .errors import DivisionByNonUnit, FieldMismatch, NonPointedInner, SingularLinearPart
from .field import QQ, Fp

MultiIndex = tuple


@lru_cache(maxsize=None)
def multi_indices(q: int, k: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length q and order <= k, in graded-lex order."""

    def of_degree(n: int, d: int):
        if n == 1:
            yield (d,)
            return
        for first in range(d, -1, -1):
            for rest in of_degree(n - 1, d - first):
                yield (first,) + rest

    if q == 0:
        return ((),)
    return tuple(a for d in range(k + 1) for a in of_degree(q, d))


@lru_cache(maxsize=None)
def _rank(q: int, k: int) -> dict:
    return {a: i for i, a in enumerate(multi_indices(q, k))}


@lru_cache(maxsize=None)
def _mul_table(q: int, k: int) -> tuple[tuple[int, int, int], ...]:
    idx = multi_indices(q, k)
    rank = _rank(q, k)
    table = []
    for i, a in enumerate(idx):
        da = sum(a)
        for j, b in enumerate(idx):
            if da + sum(b) > k:
                continue
            table.append((i, j, rank[tuple(x + y for x, y in zip(a, b))]))
    return tuple(table)


@lru_cache(maxsize=None)
def _factorials(q: int, k: int) -> tuple[int, ...]:
    return tuple(prod(factorial(x) for x in a) for a in multi_indices(q, k))


@lru_cache(maxsize=None)
def _parents(q: int, k: int) -> tuple[tuple[int, int], ...]:
    """For each nonzero multi-index: (rank of alpha - e_j, j) with j its first nonzero slot."""
    rank = _rank(q, k)
    out = [(-1, -1)]
    for a in multi_indices(q, k)[1:]:
        j = next(i for i, x in enumerate(a) if x)
        b = list(a)
        b[j] -= 1
        out.append((rank[tuple(b)], j))
    return tuple(out)


def unit_index(q: int, j: int) -> MultiIndex:
    return tuple(1 if i == j else 0 for i in range(q))


def jet_name(var: str, alpha: Sequence[int]) -> str:
    """Name of the jet coordinate ``var^alpha``, e.g. ``x[1,0]``."""
    return f"{var}[{','.join(str(a) for a in alpha)}]"


def _field_from(values, default=QQ):
    for v in values:
        if isinstance(v, Fp):
            return v.field
    return default


class TruncatedSeries:
    """A power series in ``nvars`` variables truncated at total order ``order``.

    Values are immutable; arithmetic returns new series.  Scalars (ints,
    Fractions or elements of the series' field) mix freely with series.
    """

    __slots__ = ("field", "nvars", "order", "coeffs")

    def __init__(self, field, nvars: int, order: int, coeffs: Sequence):
        size = len(multi_indices(nvars, order))
        if len(coeffs) != size:
            raise ValueError(f"expected {size} coefficients, got {len(coeffs)}")
        self.field = field
        self.nvars = nvars
        self.order = order
        self.coeffs = tuple(field.convert(c) for c in coeffs)

    @classmethod
    def _raw(cls, field, nvars, order, coeffs) -> "TruncatedSeries":
        obj = object.__new__(cls)
        obj.field = field
        obj.nvars = nvars
        obj.order = order
        obj.coeffs = tuple(coeffs)
        return obj

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, field, nvars: int, order: int) -> "TruncatedSeries":
        return cls._raw(field, nvars, order, [field.zero] * len(multi_indices(nvars, order)))

    @classmethod
    def constant(cls, value, field, nvars: int, order: int) -> "TruncatedSeries":
        c = [field.zero] * len(multi_indices(nvars, order))
        c[0] = field.convert(value)
        return cls._raw(field, nvars, order, c)

    @classmethod
    def variable(cls, j: int, field, nvars: int, order: int) -> "TruncatedSeries":
        """The coordinate series eps_j (0-based j)."""
        c = [field.zero] * len(multi_indices(nvars, order))
        if order >= 1:
            c[_rank(nvars, order)[unit_index(nvars, j)]] = field.one
        return cls._raw(field, nvars, order, c)

    @classmethod
    def from_dict(cls, terms: dict, field, nvars: int, order: int) -> "TruncatedSeries":
        """Build from ``{alpha: taylor_coefficient}``; terms above ``order`` are dropped."""
        rank = _rank(nvars, order)
        c = [field.zero] * len(rank)
        for alpha, v in terms.items():
            alpha = tuple(alpha)
            if len(alpha) != nvars:
                raise ValueError(f"multi-index {alpha} has wrong length")
            if sum(alpha) <= order:
                c[rank[alpha]] = c[rank[alpha]] + field.convert(v)
        return cls._raw(field, nvars, order, c)

    @classmethod
    def from_derivatives(cls, terms: dict, field, nvars: int, order: int) -> "TruncatedSeries":
        """Build from raw jet coordinates ``{alpha: r^alpha}``."""
        return cls.from_dict(
            {a: field.convert(v) / prod(factorial(x) for x in a) for a, v in terms.items()},
            field,
            nvars,
            order,
        )

    # -- accessors ---------------------------------------------------------

    @property
    def constant_term(self):
        return self.coeffs[0]

    def coefficient(self, alpha: Sequence[int]):
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            return self.field.zero
        return self.coeffs[_rank(self.nvars, self.order)[alpha]]

    def derivative(self, alpha: Sequence[int]):
        """Raw jet coordinate r^alpha = alpha! * (Taylor coefficient)."""
        return self.coefficient(alpha) * prod(factorial(x) for x in alpha)

    def derivatives(self) -> list:
        """All jet coordinates r^alpha in graded-lex order."""
        return [c * f for c, f in zip(self.coeffs, _factorials(self.nvars, self.order))]

    def linear_part(self) -> list:
        return [self.coefficient(unit_index(self.nvars, j)) for j in range(self.nvars)]

    def items(self):
        return zip(multi_indices(self.nvars, self.order), self.coeffs)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError("cannot raise the truncation order")
        n = len(multi_indices(self.nvars, order))
        return TruncatedSeries._raw(self.field, self.nvars, order, self.coeffs[:n])

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other: "TruncatedSeries"):
        if other.field != self.field:
            raise FieldMismatch(f"{self.field!r} vs {other.field!r}")
        if other.nvars != self.nvars or other.order != self.order:
            raise ValueError(
                f"shape mismatch: ({self.nvars}, {self.order}) vs ({other.nvars}, {other.order})"
            )

    def _lift(self, other) -> "TruncatedSeries | None":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, Fp)) and not isinstance(other, bool):
            # field.convert raises FieldMismatch for foreign prime-field scalars
            return TruncatedSeries.constant(other, self.field, self.nvars, self.order)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return TruncatedSeries._raw(
            self.field, self.nvars, self.order, [a + b for a, b in zip(self.coeffs, o.coeffs)]
        )

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._raw(self.field, self.nvars, self.order, [-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return TruncatedSeries._raw(
            self.field, self.nvars, self.order, [a - b for a, b in zip(self.coeffs, o.coeffs)]
        )

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Fp)) and not isinstance(other, bool):
            s = self.field.convert(other)
            return TruncatedSeries._raw(self.field, self.nvars, self.order, [a * s for a in self.coeffs])
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out = [self.field.zero] * len(self.coeffs)
        a, b = self.coeffs, o.coeffs
        for i, j, l in _mul_table(self.nvars, self.order):
            if a[i] and b[j]:
                out[l] = out[l] + a[i] * b[j]
        return TruncatedSeries._raw(self.field, self.nvars, self.order, out)

    __rmul__ = __mul__

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse by Newton iteration g <- g (2 - f g)."""
        c0 = self.coeffs[0]
        if not c0:
            raise DivisionByNonUnit("series has zero constant term")
        g = TruncatedSeries.constant(self.field.one / c0, self.field, self.nvars, self.order)
        precision = 1
        while precision <= self.order:
            g = g * (2 - self * g)
            precision *= 2
        return g

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return self * other.inverse()
        if isinstance(other, (int, Fraction, Fp)) and not isinstance(other, bool):
            s = self.field.convert(other)
            if not s:
                raise DivisionByNonUnit("division by the zero scalar")
            return self * (self.field.one / s)
        return NotImplemented

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = TruncatedSeries.constant(1, self.field, self.nvars, self.order)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def compose(self, inner: Sequence["TruncatedSeries"]) -> "TruncatedSeries":
        """``self(inner_1, ..., inner_m)``; every inner series must vanish at 0."""
        inner = tuple(inner)
        if len(inner) != self.nvars:
            raise ValueError(f"outer series has {self.nvars} variables, got {len(inner)} inner series")
        if not inner:
            return self
        first = inner[0]
        for s in inner:
            first._check(s)
            if s.coeffs[0]:
                raise NonPointedInner("inner series must have zero constant term")
        if first.field != self.field:
            raise FieldMismatch(f"{self.field!r} vs {first.field!r}")
        if self.order != first.order:
            raise ValueError("outer and inner truncation orders differ")
        one = TruncatedSeries.constant(1, first.field, first.nvars, first.order)
        powers = [one]
        result = one * self.coeffs[0]
        for rank_, (parent, j) in enumerate(_parents(self.nvars, self.order)):
            if rank_ == 0:
                continue
            powers.append(powers[parent] * inner[j])
            c = self.coeffs[rank_]
            if c:
                result = result + powers[rank_] * c
        return result

    def __call__(self, *inner):
        return self.compose(inner)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.field == other.field
            and self.nvars == other.nvars
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.nvars, self.order, self.coeffs))

    def __repr__(self):
        terms = []
        for alpha, c in self.items():
            if not c:
                continue
            mono = "*".join(
                f"e{i + 1}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(alpha) if a
            )
            cs = str(c.v) if isinstance(c, Fp) else str(c)
            terms.append(f"{cs}*{mono}" if mono else cs)
        body = " + ".join(terms) or "0"
        return f"TruncatedSeries({body}; q={self.nvars}, k={self.order}, {self.field!r})"


# -- functional surface ------------------------------------------------------


def series_arith(op: str, a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field!r} vs {b.field!r}")
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown series operation {op!r}")


def series_compose(outer: TruncatedSeries, inner: Sequence[TruncatedSeries]) -> TruncatedSeries:
    return outer.compose(inner)


def identity_tuple(field, q: int, k: int) -> tuple[TruncatedSeries, ...]:
    return tuple(TruncatedSeries.variable(j, field, q, k) for j in range(q))


def compose_tuple(outer: Sequence[TruncatedSeries], inner: Sequence[TruncatedSeries]) -> tuple:
    return tuple(f.compose(inner) for f in outer)


# -- small dense linear algebra over the coefficient field ---------------------


def determinant(matrix: Sequence[Sequence]):
    m = [list(row) for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    field = _field_from(v for row in m for v in row)
    det = field.one
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            return field.zero
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det = det * m[c][c]
        inv = field.one / m[c][c]
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] * inv
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return det


def invert_matrix(matrix: Sequence[Sequence]) -> list[list]:
    n = len(matrix)
    field = _field_from(v for row in matrix for v in row)
    m = [list(row) + [field.one if i == j else field.zero for j in range(n)] for i, row in enumerate(matrix)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            raise SingularLinearPart("linear part is not invertible")
        m[c], m[piv] = m[piv], m[c]
        inv = field.one / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def _apply_matrix(matrix, series: Sequence[TruncatedSeries]) -> tuple[TruncatedSeries, ...]:
    out = []
    for row in matrix:
        acc = None
        for a, s in zip(row, series):
            term = s * a
            acc = term if acc is None else acc + term
        out.append(acc)
    return tuple(out)


def linear_matrix(components: Sequence[TruncatedSeries]) -> list[list]:
    """Matrix of first-order Taylor coefficients, rows = components."""
    return [s.linear_part() for s in components]


def tuple_invert(f: Sequence[TruncatedSeries]) -> tuple[TruncatedSeries, ...]:
    """Compositional inverse of a pointed tuple of q series in q variables."""
    f = tuple(f)
    if not f:
        return f
    q = len(f)
    if any(s.nvars != q for s in f):
        raise ValueError("tuple_invert needs q series in q variables")
    if any(s.constant_term for s in f):
        raise NonPointedInner("tuple_invert needs zero constant terms")
    a = linear_matrix(f)
    if not determinant(a):
        raise SingularLinearPart("linear part is not invertible")
    ainv = invert_matrix(a)
    field, k = f[0].field, f[0].order
    ident = identity_tuple(field, q, k)
    nonlinear = tuple(s - l for s, l in zip(f, _apply_matrix(a, ident)))
    g = _apply_matrix(ainv, ident)
    # g = A^{-1}(eps - N(g)); each pass fixes one more order
    for _ in range(max(k - 1, 0)):
        ng = compose_tuple(nonlinear, g)
        g = _apply_matrix(ainv, tuple(e - n for e, n in zip(ident, ng)))
    return g


# -- frames and the groupoid ---------------------------------------------------


def _check_components(components, q=None):
    components = tuple(components)
    if not components:
        raise ValueError("a jet needs at least one component")
    q = len(components) if q is None else q
    first = components[0]
    for s in components:
        if s.nvars != q:
            raise ValueError(f"components must be series in {q} variables")
        first._check(s)
    return components


@dataclass(frozen=True)
class FrameJet:
    """Order-k frame: base point plus q component series with invertible linear part."""

    base: tuple
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", _check_components(self.components))
        field = self.field
        object.__setattr__(self, "base", tuple(field.convert(b) for b in self.base))
        if not determinant(self.jacobian()):
            raise SingularLinearPart("frame Jacobian is singular")

    @property
    def field(self):
        return self.components[0].field

    @property
    def order(self) -> int:
        return self.components[0].order

    @property
    def q(self) -> int:
        return len(self.components)

    @property
    def point(self) -> tuple:
        return tuple(s.constant_term for s in self.components)

    def jacobian(self) -> list[list]:
        return linear_matrix(self.components)

    def jet_values(self, fiber_names: Sequence[str], base_names: Sequence[str] = ()) -> dict:
        """Values of base coordinates and jet coordinates ``x[alpha]`` at this frame."""
        values = dict(zip(base_names, self.base))
        idx = multi_indices(self.q, self.order)
        for name, s in zip(fiber_names, self.components):
            for alpha, v in zip(idx, s.derivatives()):
                values[jet_name(name, alpha)] = v
        return values


def standard_frame(base: Sequence, point: Sequence, k: int, field=QQ) -> FrameJet:
    """The affine frame eps -> point + eps."""
    q = len(point)
    comps = tuple(
        TruncatedSeries.constant(x, field, q, k) + TruncatedSeries.variable(j, field, q, k)
        for j, x in enumerate(point)
    )
    return FrameJet(tuple(base), comps)


@dataclass(frozen=True)
class SourceJet:
    """Element of Gamma_k: pointed invertible k-jet of (C^q, 0)."""

    components: tuple

    def __post_init__(self):
        comps = _check_components(self.components)
        object.__setattr__(self, "components", comps)
        if any(s.constant_term for s in comps):
            raise NonPointedInner("source jets must fix the origin")
        if not determinant(linear_matrix(comps)):
            raise SingularLinearPart("source jet linear part is singular")

    @classmethod
    def identity(cls, field, q: int, k: int) -> "SourceJet":
        return cls(identity_tuple(field, q, k))

    def compose(self, other: "SourceJet") -> "SourceJet":
        """``self o other``."""
        return SourceJet(compose_tuple(self.components, other.components))

    def inverse(self) -> "SourceJet":
        return SourceJet(tuple_invert(self.components))


def frame_compose_gamma(r: FrameJet, gamma: SourceJet) -> FrameJet:
    """Right action of Gamma_k: the frame eps -> r(gamma(eps))."""
    if gamma.components[0].nvars != r.q:
        raise ValueError("source jet and frame have different q")
    return FrameJet(r.base, compose_tuple(r.components, gamma.components))


@dataclass(frozen=True)
class MapJet:
    """k-jet of an invertible map (M_b, p) -> (M_b', p').

    ``components`` are series in centered source coordinates; their constant
    terms form the target fiber point.
    """

    source_base: tuple
    source_point: tuple
    target_base: tuple
    components: tuple

    def __post_init__(self):
        comps = _check_components(self.components)
        object.__setattr__(self, "components", comps)
        field = comps[0].field
        for name in ("source_base", "source_point", "target_base"):
            object.__setattr__(self, name, tuple(field.convert(v) for v in getattr(self, name)))
        if len(self.source_point) != len(comps):
            raise ValueError("source point dimension differs from the number of components")
        if not determinant(linear_matrix(comps)):
            raise SingularLinearPart("map jet linear part is singular")

    @property
    def field(self):
        return self.components[0].field

    @property
    def order(self) -> int:
        return self.components[0].order

    @property
    def q(self) -> int:
        return len(self.components)

    @property
    def target_point(self) -> tuple:
        return tuple(s.constant_term for s in self.components)

    def jacobian(self) -> list[list]:
        return linear_matrix(self.components)

    @classmethod
    def identity(cls, base: Sequence, point: Sequence, k: int, field=QQ) -> "MapJet":
        q = len(point)
        comps = tuple(
            TruncatedSeries.constant(x, field, q, k) + TruncatedSeries.variable(j, field, q, k)
            for j, x in enumerate(point)
        )
        return cls(tuple(base), tuple(point), tuple(base), comps)

    def coordinates(self) -> list:
        """Flattened coordinates: source base, source fiber, target base, then
        every component's jet coordinates r^alpha in graded-lex order."""
        out = list(self.source_base) + list(self.source_point) + list(self.target_base)
        for s in self.components:
            out.extend(s.derivatives())
        return out

    def compose(self, other: "MapJet") -> "MapJet":
        """Groupoid product ``self o other`` (apply ``other`` first)."""
        if other.target_base != self.source_base or other.target_point != self.source_point:
            raise ValueError("map jets are not composable: target of the first is not the source of the second")
        centered = tuple(s - s.constant_term for s in other.components)
        return MapJet(
            other.source_base,
            other.source_point,
            self.target_base,
            compose_tuple(self.components, centered),
        )

    def inverse(self) -> "MapJet":
        centered = tuple(s - s.constant_term for s in self.components)
        inv = tuple_invert(centered)
        return MapJet(
            self.target_base,
            self.target_point,
            self.source_base,
            tuple(g + x for g, x in zip(inv, self.source_point)),
        )


def coordinate_names(base_names: Sequence[str], fiber_names: Sequence[str], k: int) -> list[str]:
    """Names matching :meth:`MapJet.coordinates`; target base gets a trailing quote."""
    q = len(fiber_names)
    names = list(base_names) + list(fiber_names) + [f"{b}'" for b in base_names]
    for x in fiber_names:
        names.extend(jet_name(x, a) for a in multi_indices(q, k))
    return names


def map_jet_from_pair(r: FrameJet, s: FrameJet) -> MapJet:
    """The map jet r o s^{-1}, from (base of s, s(0)) to (base of r, r(0))."""
    if r.order != s.order or r.q != s.q:
        raise ValueError("frames must share order and fiber dimension")
    centered = tuple(c - c.constant_term for c in s.components)
    s_inv = tuple_invert(centered)
    return MapJet(s.base, s.point, r.base, compose_tuple(r.components, s_inv))


def random_series(rng, field, q: int, k: int, constant=None, *, pointed=False) -> TruncatedSeries:
    coeffs = [field.random(rng) for _ in multi_indices(q, k)]
    if pointed:
        coeffs[0] = field.zero
    elif constant is not None:
        coeffs[0] = field.convert(constant)
    return TruncatedSeries(field, q, k, coeffs)


def random_frame(rng, field, q: int, k: int, base_dim: int = 0) -> FrameJet:
    while True:
        comps = tuple(random_series(rng, field, q, k) for _ in range(q))
        if determinant(linear_matrix(comps)):
            return FrameJet(tuple(field.random(rng) for _ in range(base_dim)), comps)


def random_source_jet(rng, field, q: int, k: int) -> SourceJet:
    while True:
        comps = tuple(random_series(rng, field, q, k, pointed=True) for _ in range(q))
        if determinant(linear_matrix(comps)):
            return SourceJet(comps)
