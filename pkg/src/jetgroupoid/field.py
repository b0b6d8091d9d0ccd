"""Coefficient fields: exact rationals and prime fields F_p with p > 2^30.

Rationals are plain :class:`fractions.Fraction` values.  Prime-field values
are :class:`Fp` instances carrying a reference to their :class:`PrimeField`,
so mixing elements of different fields is detected instead of silently
reduced.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

from sympy import isprime, nextprime

from .errors import FieldMismatch

MIN_MODULUS = 2**30


class RationalField:
    name = "QQ"
    tag = "exact-rational"

    def __call__(self, value) -> Fraction:
        return self.convert(value)

    def convert(self, value) -> Fraction:
        if isinstance(value, Fp):
            raise FieldMismatch("cannot move a prime-field element into QQ")
        return Fraction(value)

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def random(self, rng: random.Random, bound: int = 50) -> Fraction:
        """Small random rational, used by exact-mode property tests."""
        return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))

    def contains(self, value) -> bool:
        return isinstance(value, (int, Fraction)) and not isinstance(value, bool)

    def encode(self, value):
        value = Fraction(value)
        return [value.numerator, value.denominator]

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


QQ = RationalField()


class PrimeField:
    """The field F_p.  Instances are interned, one per modulus."""

    tag = "prime-field"

    def __new__(cls, p: int):
        return _prime_field(int(p))

    @classmethod
    def _create(cls, p: int) -> "PrimeField":
        if p <= MIN_MODULUS or not isprime(p):
            raise ValueError(f"modulus must be a prime > 2^30, got {p}")
        obj = object.__new__(cls)
        obj.p = p
        obj.name = f"GF({p})"
        obj._zero = Fp(0, obj)
        obj._one = Fp(1, obj)
        return obj

    def __call__(self, value) -> "Fp":
        return self.convert(value)

    def convert(self, value) -> "Fp":
        if isinstance(value, Fp):
            if value.field is not self:
                raise FieldMismatch(f"{value.field.name} element used in {self.name}")
            return value
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise ZeroDivisionError(f"{value} has no image in {self.name}")
            return Fp(value.numerator * pow(value.denominator, -1, self.p) % self.p, self)
        return Fp(int(value) % self.p, self)

    @property
    def zero(self) -> "Fp":
        return self._zero

    @property
    def one(self) -> "Fp":
        return self._one

    def random(self, rng: random.Random) -> "Fp":
        return Fp(rng.randrange(self.p), self)

    def contains(self, value) -> bool:
        return isinstance(value, Fp) and value.field is self

    def encode(self, value) -> int:
        return int(self.convert(value))

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return self.name

    def __reduce__(self):
        return (PrimeField, (self.p,))


@lru_cache(maxsize=None)
def _prime_field(p: int) -> PrimeField:
    return PrimeField._create(p)


class Fp:
    """An element of F_p, stored as its canonical representative 0 <= v < p."""

    __slots__ = ("v", "field")

    def __init__(self, v: int, field: PrimeField):
        self.v = v
        self.field = field

    def _other(self, other) -> int:
        if isinstance(other, Fp):
            if other.field is not self.field:
                raise FieldMismatch(f"{self.field.name} vs {other.field.name}")
            return other.v
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction):
            return self.field.convert(other).v
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Fp((self.v + o) % self.field.p, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Fp((self.v - o) % self.field.p, self.field)

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Fp((o - self.v) % self.field.p, self.field)

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Fp(self.v * o % self.field.p, self.field)

    __rmul__ = __mul__

    def inverse(self) -> "Fp":
        if self.v == 0:
            raise ZeroDivisionError(f"0 has no inverse in {self.field.name}")
        return Fp(pow(self.v, -1, self.field.p), self.field)

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        o %= self.field.p
        if o == 0:
            raise ZeroDivisionError(f"division by zero in {self.field.name}")
        return Fp(self.v * pow(o, -1, self.field.p) % self.field.p, self.field)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Fp(o % self.field.p, self.field) / self

    def __neg__(self):
        return Fp(-self.v % self.field.p, self.field)

    def __pos__(self):
        return self

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return Fp(pow(self.v, e, self.field.p), self.field)

    def __eq__(self, other):
        if isinstance(other, Fp):
            return self.field is other.field and self.v == other.v
        if isinstance(other, int):
            return self.v == other % self.field.p
        if isinstance(other, Fraction):
            try:
                return self.v == self.field.convert(other).v
            except ZeroDivisionError:
                return False
        return NotImplemented

    def __hash__(self):
        return hash((self.v, self.field.p))

    def __bool__(self):
        return self.v != 0

    def __int__(self):
        return self.v

    def __repr__(self):
        return f"{self.v} (mod {self.field.p})"

    def __reduce__(self):
        return (Fp, (self.v, self.field))


def field_of(value):
    """The field a scalar lives in; ints and Fractions count as QQ."""
    if isinstance(value, Fp):
        return value.field
    return QQ


def random_prime(rng: random.Random, bits: int = 31) -> int:
    """A random prime in [2^(bits-1), 2^bits).

    31 bits keeps products of two residues below 2^62, so int64 numpy
    arithmetic in :mod:`jetgroupoid.linalg` never overflows.
    """
    lo = 1 << (bits - 1)
    hi = 1 << bits
    while True:
        p = nextprime(rng.randrange(lo, hi - 1000))
        if lo < p < hi:
            return int(p)


def prime_for_seed(seed: int) -> int:
    """The per-run modulus: deterministic in the master seed."""
    return random_prime(random.Random(f"modulus:{seed}"))
