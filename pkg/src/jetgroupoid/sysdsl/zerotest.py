"""Randomised identity testing of rational expressions over F_p."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import DegreeOverflow, EvalDivisionByZero, PoleSaturated
from ..field import PrimeField, prime_for_seed
from .expr import Expr, degree_bound, eval_expr, free_variables

MAX_RESAMPLES = 100


@dataclass(frozen=True)
class ZeroTest:
    """Outcome of a randomised zero test.

    ``bound`` is an upper bound on the probability that a nonzero
    expression passed every trial; it is 0 when a nonzero value was seen.
    """

    is_zero: bool
    bound: Fraction
    trials: int
    degree: int
    modulus: int

    def __bool__(self):
        return self.is_zero

    def neg_log2_bound(self) -> int:
        """Largest integer b with bound <= 2^-b (exact; no floating point)."""
        if self.bound == 0:
            return -1
        return (self.bound.denominator // self.bound.numerator).bit_length() - 1

    def as_report(self) -> dict:
        return {
            "verdict": self.is_zero,
            "trials": self.trials,
            "degree_bound": self.degree,
            "modulus": self.modulus,
            "failure_bound_log2_at_most": -self.neg_log2_bound() if self.bound else None,
            "exact": self.is_zero and self.bound == 0,
        }


def schwartz_zippel_bound(degree: int, denominator_degree: int, p: int, trials: int) -> Fraction:
    """(deg N / (p - deg D))^trials: chance that a nonzero N/D vanishes at
    ``trials`` independent uniform points conditioned on avoiding poles."""
    if degree == 0:
        return Fraction(0)
    return Fraction(degree, p - denominator_degree) ** trials


def expr_probably_zero(
    e: Expr,
    trials: int = 40,
    seed: int = 0,
    modulus: int | None = None,
    variables: Sequence[str] | None = None,
) -> ZeroTest:
    """Test ``e == 0`` as a rational function by evaluation at random points of F_p."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = prime_for_seed(seed) if modulus is None else modulus
    field = PrimeField(p)
    dn, dd = degree_bound(e)
    if max(dn, dd) > p // 100:
        raise DegreeOverflow(f"degree bound {max(dn, dd)} exceeds p/100 for p = {p}")
    names = sorted(set(free_variables(e)) | set(variables or ()))
    rng = random.Random(f"pit:{seed}:{p}")
    for _ in range(trials):
        for _attempt in range(MAX_RESAMPLES):
            env = {v: field.random(rng) for v in names}
            try:
                value = eval_expr(e, env, field)
            except EvalDivisionByZero:
                continue
            break
        else:
            raise PoleSaturated(f"{MAX_RESAMPLES} consecutive evaluation points hit a pole")
        if value:
            return ZeroTest(False, Fraction(0), trials, dn, p)
    return ZeroTest(True, schwartz_zippel_bound(dn, dd, p, trials), trials, dn, p)


def combine(tests: Sequence[ZeroTest]) -> ZeroTest:
    """Conjunction of several tests (union bound on the failure probability)."""
    tests = list(tests)
    if not tests:
        raise ValueError("nothing to combine")
    ok = all(t.is_zero for t in tests)
    bound = sum((t.bound for t in tests), Fraction(0)) if ok else Fraction(0)
    return ZeroTest(
        ok,
        min(bound, Fraction(1)),
        min(t.trials for t in tests),
        max(t.degree for t in tests),
        tests[0].modulus,
    )
