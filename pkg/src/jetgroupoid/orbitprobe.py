"""Zariski-closure probing of Taylor jets of iterates over F_p.

Samples are flattened :class:`~jetgroupoid.jetcore.MapJet` coordinates.
The Hilbert function H(d) is the rank of the evaluation matrix of all
monomials of degree <= d on the sample.

Dimension estimate.  At desk scale (d <= 3, up to 16 coordinates) H(d) is
far from its polynomial regime, so its growth degree alone cannot see
dimensions like 9 or 13.  The primary estimate therefore uses the
relations found at degree d_max: at a generic sample point the rank c of
their Jacobian is the local codimension of the variety they cut out, and
the estimate is N - c.  Two checks grade it:

* growth: the least g with Delta^{g+1} H = 0 on the tail of the profile
  (inconclusive when the profile is too short);
* free coordinates: the N - c coordinates outside the Jacobian pivots must
  be algebraically independent on the sample up to degree d_max.

HIGH when growth agrees, MEDIUM when growth is inconclusive but the free
coordinate check passes, LOW otherwise (an interval is reported).
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .errors import DegenerateImage, IndeterminacyPoint, PoleSaturated, Unsaturated
from .field import PrimeField, prime_for_seed
from .jetcore import coordinate_names
from .linalg import compress_rows, matmul_mod, nullspace_mod, prefix_ranks, rank_mod, row_echelon
from .poly import Poly
from .prolong import iterate_jets
from .sysdsl.system import FiberedSystem, ParamFamily, promote_parameter

MAX_RESAMPLES = 100
HIGH, MEDIUM, LOW = "HIGH", "MEDIUM", "LOW"


# -- samples -------------------------------------------------------------------------


@dataclass
class OrbitSample:
    vectors: np.ndarray
    modulus: int
    names: list
    provenance: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def head(self, rows: int) -> "OrbitSample":
        return OrbitSample(self.vectors[:rows], self.modulus, self.names, dict(self.provenance, rows=rows))


def pin_parameters(sys: FiberedSystem, seed: int, modulus: int, pins: dict | None = None) -> FiberedSystem:
    """Bind parameters: explicit pins first, remaining ones to seeded random F_p values."""
    values = dict(pins or {})
    for name in sys.params:
        if name in values and values[name] is not None:
            continue
        if name in sys.bindings and name not in values:
            continue
        rng = random.Random(f"pin:{seed}:{modulus}:{name}")
        values[name] = rng.randrange(1, modulus)
    return sys.bind(values)


def _point_rows(args) -> list:
    sys, k, max_iter, per_point, seed, modulus, index = args
    field_ = PrimeField(modulus)
    rng = random.Random(f"point:{seed}:{modulus}:{index}")
    nb, q = len(sys.base), sys.q
    if per_point is None or per_point >= max_iter:
        keep = None
    else:
        keep = set(random.Random(f"iterates:{seed}:{modulus}:{index}").sample(range(1, max_iter + 1), per_point))
    for _ in range(MAX_RESAMPLES):
        base = [field_.random(rng) for _ in range(nb)]
        point = [field_.random(rng) for _ in range(q)]
        try:
            return [
                [int(c) for c in jet.coordinates()]
                for n, jet in enumerate(iterate_jets(sys, base, point, k, max_iter, field_), start=1)
                if keep is None or n in keep
            ]
        except (IndeterminacyPoint, DegenerateImage):
            continue
    raise PoleSaturated(f"{MAX_RESAMPLES} consecutive base points hit an indeterminacy (point {index})")


def sample_orbit_jets(
    sys: FiberedSystem,
    k: int,
    num_points: int,
    max_iter: int,
    seed: int,
    modulus: int | None = None,
    jobs: int = 1,
    first_point: int = 0,
    per_point: int | None = None,
) -> OrbitSample:
    """Flattened j_k(Phi^n) at ``num_points`` random base points.

    Every point is iterated up to ``max_iter``; with ``per_point`` set, only
    a seeded random subset of that many iterates is recorded per point.
    Point i uses its own RNG derived from (seed, modulus, i), so the result
    does not depend on ``jobs``.
    """
    if num_points < 1 or max_iter < 1:
        raise ValueError("num_points and max_iter must be >= 1")
    p = prime_for_seed(seed) if modulus is None else modulus
    sys.parameter_values(PrimeField(p))
    tasks = [(sys, k, max_iter, per_point, seed, p, i) for i in range(first_point, first_point + num_points)]
    if jobs > 1 and num_points > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_point_rows, tasks))
    else:
        chunks = [_point_rows(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    names = coordinate_names(sys.base, sys.fiber, k)
    return OrbitSample(
        np.array(rows, dtype=np.int64).reshape(len(rows), len(names)),
        p,
        names,
        {
            "seed": seed,
            "k": k,
            "iterates": [1, max_iter],
            "iterates_per_point": per_point or max_iter,
            "points": [first_point, first_point + num_points],
            "base_point_box": "uniform F_p",
        },
    )


def concat_samples(a: OrbitSample, b: OrbitSample) -> OrbitSample:
    if a.modulus != b.modulus or a.names != b.names:
        raise ValueError("samples are not compatible")
    return OrbitSample(np.vstack([a.vectors, b.vectors]), a.modulus, a.names, dict(a.provenance))


def sample_from_points(points, modulus: int, names: Sequence[str] | None = None) -> OrbitSample:
    vec = np.asarray(points, dtype=np.int64) % modulus
    names = list(names) if names is not None else [f"z{i + 1}" for i in range(vec.shape[1])]
    return OrbitSample(vec, modulus, names, {"source": "explicit points"})



def _cubic(rng, p: int):
    coeffs = {(i, j): rng.randrange(p) for i in range(4) for j in range(4 - i)}
    return lambda u, v: sum(c * pow(u, i, p) * pow(v, j, p) for (i, j), c in coeffs.items()) % p


def calibration_samples(size: int = 400, seed: int = 0, modulus: int | None = None) -> dict:
    """Point samples of varieties with known dimension: name -> (sample, dim).

    line: a coordinate axis in A^3; parabola: y = x^2 in A^2; plane: random
    points of A^2; cubic_graph: the graph of a random cubic map A^2 -> A^2.
    """
    p = prime_for_seed(seed) if modulus is None else modulus
    rng = random.Random(f"calibration:{seed}:{p}")
    r = lambda: rng.randrange(p)  # noqa: E731
    f, g = _cubic(rng, p), _cubic(rng, p)
    line = [(r(), 0, 0) for _ in range(size)]
    parabola = [(x, x * x % p) for x in (r() for _ in range(size))]
    plane = [(r(), r()) for _ in range(size)]
    graph = [(u, v, f(u, v), g(u, v)) for u, v in ((r(), r()) for _ in range(size))]
    return {
        "line": (sample_from_points(line, p, ["x", "y", "z"]), 1),
        "parabola": (sample_from_points(parabola, p, ["x", "y"]), 1),
        "plane": (sample_from_points(plane, p, ["x", "y"]), 2),
        "cubic_graph": (sample_from_points(graph, p, ["u", "v", "f", "g"]), 2),
    }

# -- monomials and evaluation ---------------------------------------------------------


@lru_cache(maxsize=None)
def monomials(n: int, d: int) -> tuple:
    """Monomials of degree <= d in n variables as sorted index tuples; graded.

    Returns (monos, parent, var): monos[i] = monos[parent[i]] + (var[i],).
    """
    monos = [()]
    parent = [-1]
    var = [-1]
    layer = [0]
    for _ in range(d):
        nxt = []
        for idx in layer:
            m = monos[idx]
            start = m[-1] if m else 0
            for v in range(start, n):
                monos.append(m + (v,))
                parent.append(idx)
                var.append(v)
                nxt.append(len(monos) - 1)
        layer = nxt
    return tuple(monos), tuple(parent), tuple(var)


def evaluation_matrix(vectors: np.ndarray, d: int, p: int) -> np.ndarray:
    """M[t, mu] = mu(v_t) for all monomials mu of degree <= d."""
    rows, n = vectors.shape
    monos, parent, var = monomials(n, d)
    out = np.empty((rows, len(monos)), dtype=np.int64)
    out[:, 0] = 1
    x = vectors % p
    for i in range(1, len(monos)):
        out[:, i] = (out[:, parent[i]] * x[:, var[i]]) % p
    return out


def _eval_seed(sample: OrbitSample, tag: str) -> np.random.Generator:
    key = random.Random(f"{tag}:{sample.modulus}:{sample.size}:{sample.dim}").getrandbits(64)
    return np.random.default_rng(key)


def _compressed(sample: OrbitSample, d: int) -> np.ndarray:
    m = evaluation_matrix(sample.vectors, d, sample.modulus)
    return compress_rows(m, sample.modulus, m.shape[1] + 32, _eval_seed(sample, f"compress:{d}"))


# -- Hilbert function ---------------------------------------------------------------


@dataclass
class HilbertProfile:
    values: list
    samples: int
    ambient: int
    saturated_counts: list

    def pairs(self) -> list:
        return [[d, h] for d, h in enumerate(self.values)]

    def as_report(self) -> dict:
        return {
            "profile": self.pairs(),
            "samples": self.samples,
            "ambient_dim": self.ambient,
            "enough_samples": self.saturated_counts,
        }


def hilbert_profile(sample: OrbitSample, d_max: int) -> HilbertProfile:
    n = sample.dim
    m = _compressed(sample, d_max)
    values = prefix_ranks(m, sample.modulus, [comb(n + d, d) for d in range(d_max + 1)])
    flags = [sample.size >= 2 * comb(n + d, d) for d in range(d_max + 1)]
    return HilbertProfile(values, sample.size, n, flags)


def hilbert_function(sample: OrbitSample, d: int) -> int:
    return hilbert_profile(sample, d).values[d]


def finite_differences(values: Sequence[int]) -> list:
    rows = [list(values)]
    while len(rows[-1]) > 1:
        prev = rows[-1]
        rows.append([b - a for a, b in zip(prev, prev[1:])])
    return rows


def growth_degree(values: Sequence[int]) -> int | None:
    """Least g with Delta^{g+1} H vanishing on its last (up to two) entries."""
    diffs = finite_differences(values)
    for g in range(len(values)):
        j = g + 1
        if j >= len(diffs):
            return None
        tail = diffs[j][-2:]
        if tail and all(v == 0 for v in tail):
            return g
    return None


# -- relations -----------------------------------------------------------------------


def _kernel(sample: OrbitSample, d: int) -> np.ndarray:
    return nullspace_mod(_compressed(sample, d), sample.modulus)


def _canonical_basis(basis: np.ndarray, p: int) -> np.ndarray:
    """Reduced echelon basis, pivots on the highest monomials (columns of the result)."""
    if basis.shape[1] == 0:
        return basis
    rev = basis[::-1].T
    red, pivots = row_echelon(rev, p, reduced=True)
    return red[: len(pivots)][:, ::-1].T


def relation_polys(basis: np.ndarray, sample: OrbitSample, d: int) -> list:
    fld = PrimeField(sample.modulus)
    monos, _, _ = monomials(sample.dim, d)
    out = []
    for j in range(basis.shape[1]):
        terms = {}
        for i in np.flatnonzero(basis[:, j]):
            exps: dict = {}
            for v in monos[i]:
                exps[sample.names[v]] = exps.get(sample.names[v], 0) + 1
            terms[tuple(sorted(exps.items()))] = int(basis[i, j])
        out.append(Poly(terms, fld))
    return out


@dataclass
class RelationReport:
    relations: list
    degree: int
    discarded: int
    holdout_rows: int
    modulus: int

    def failure_bound(self) -> Fraction:
        # a spurious relation of degree <= d survives one uniform point with probability <= d/p
        if not self.holdout_rows:
            return Fraction(1)
        return min(Fraction(1), Fraction(self.degree, self.modulus) ** self.holdout_rows * max(1, len(self.relations)))

    def as_report(self) -> dict:
        return {
            "degree": self.degree,
            "count": len(self.relations),
            "discarded_by_holdout": self.discarded,
            "holdout_rows": self.holdout_rows,
            "relations": [encode_poly(r) for r in self.relations],
            "text": [str(r) for r in self.relations],
        }


def encode_poly(p: Poly) -> list:
    return [[[list(vp) for vp in m], int(c)] for m, c in p.sorted_terms()]


def discover_relations(sample: OrbitSample, d: int, holdout: float = 0.25) -> RelationReport:
    """Kernel of the degree-<=d evaluation matrix, re-verified on held-out rows."""
    if not 0 <= holdout < 1:
        raise ValueError("holdout must be in [0, 1)")
    p = sample.modulus
    order = _eval_seed(sample, "holdout").permutation(sample.size)
    cut = sample.size - int(round(sample.size * holdout))
    train = OrbitSample(sample.vectors[order[:cut]], p, sample.names)
    held = sample.vectors[order[cut:]]
    basis = _kernel(train, d)
    discarded = 0
    if held.shape[0] and basis.shape[1]:
        check = matmul_mod(evaluation_matrix(held, d, p), basis, p)
        keep = nullspace_mod(check, p)
        discarded = basis.shape[1] - keep.shape[1]
        basis = matmul_mod(basis, keep, p)
    basis = _canonical_basis(basis, p)
    return RelationReport(relation_polys(basis, sample, d), d, discarded, int(held.shape[0]), p)


def vanishes_on(relations: Sequence[Poly], sample: OrbitSample) -> bool:
    env_names = sample.names
    fld = PrimeField(sample.modulus)
    for row in sample.vectors:
        env = {n: fld(int(v)) for n, v in zip(env_names, row)}
        if any(r.evaluate(env) for r in relations):
            return False
    return True


# -- dimension -------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _gradient_table(n: int, d: int) -> tuple:
    monos, _, _ = monomials(n, d)
    index = {m: i for i, m in enumerate(monos)}
    table = []
    for i, m in enumerate(monos):
        for v in sorted(set(m)):
            rest = list(m)
            rest.remove(v)
            table.append((i, v, m.count(v), index[tuple(rest)]))
    return tuple(table)


def jacobian_at(values_row: np.ndarray, basis: np.ndarray, n: int, d: int, p: int) -> np.ndarray:
    """Gradients (n x K) of the kernel polynomials at one point, given its monomial values."""
    grad = np.zeros((n, basis.shape[0]), dtype=np.int64)
    for i, v, c, parent in _gradient_table(n, d):
        grad[v, i] = (c * int(values_row[parent])) % p
    return matmul_mod(grad, basis, p)


@dataclass
class DimensionEstimate:
    dimension: int
    confidence: str
    interval: list
    profile: HilbertProfile
    growth: int | None
    tangent_codim: int
    free_coordinates: list
    free_check: bool
    relations_at_dmax: int
    saturation: dict = field(default_factory=dict)
    method: str = "tangent-rank+growth"
    sample: dict = field(default_factory=dict)

    def as_report(self) -> dict:
        return {
            "estimate": self.dimension,
            "confidence": self.confidence,
            "interval": self.interval,
            "method": self.method,
            **self.profile.as_report(),
            "differences": finite_differences(self.profile.values)[1:],
            "growth_degree": self.growth,
            "tangent_codim": self.tangent_codim,
            "free_coordinates": self.free_coordinates,
            "free_coordinate_check": self.free_check,
            "relations_at_dmax": self.relations_at_dmax,
            "saturation": self.saturation,
            "sample": self.sample,
        }


def estimate_from_sample(sample: OrbitSample, d_max: int, jacobian_points: int = 8) -> DimensionEstimate:
    if d_max < 2:
        raise ValueError("d_max must be >= 2")
    n, p = sample.dim, sample.modulus
    profile = hilbert_profile(sample, d_max)
    basis = _kernel(sample, d_max)
    codim = 0
    best = None
    if basis.shape[1]:
        rows = _eval_seed(sample, "jacobian").choice(sample.size, size=min(jacobian_points, sample.size), replace=False)
        vals = evaluation_matrix(sample.vectors[np.sort(rows)], d_max, p)
        for row in vals:
            jac = jacobian_at(row, basis, n, d_max, p)
            r = rank_mod(jac.T, p)
            if r > codim:
                codim, best = r, jac
    u = n - codim
    free = list(range(n))
    if best is not None:
        # echelon on reversed columns so later (jet) coordinates become the dependent ones
        _, piv = row_echelon(best.T[:, ::-1], p)
        dependent = {n - 1 - c for c in piv}
        free = [i for i in range(n) if i not in dependent]
    proj = OrbitSample(sample.vectors[:, free], p, [sample.names[i] for i in free])
    free_profile = hilbert_profile(proj, d_max).values if free else [1] * (d_max + 1)
    free_ok = all(h == comb(u + d, d) for d, h in enumerate(free_profile))
    growth = growth_degree(profile.values)
    bound_ok = all(h >= comb(u + d, d) for d, h in enumerate(profile.values))
    if growth == u:
        conf, interval = HIGH, [u, u]
    elif growth is None and free_ok and bound_ok:
        conf, interval = MEDIUM, [u, u]
    else:
        others = [x for x in (growth,) if x is not None]
        conf, interval = LOW, [min([u] + others), max([u] + others)]
    return DimensionEstimate(
        u, conf, interval, profile, growth, codim, [sample.names[i] for i in free], free_ok, int(basis.shape[1])
    )


DEFAULT_PER_POINT = 20


def default_points(n_coords: int, d_max: int, per_point: int, source_dim: int = 0) -> int:
    """Enough points for 2 * C(N + d_max, d_max) rows, and enough distinct
    source points (2 * C(dim M + d_max, d_max)) even when iterates repeat."""
    need = 2 * comb(n_coords + d_max, d_max)
    return max(1, -(-need // per_point), 2 * comb(source_dim + d_max, d_max))


def estimate_dimension(
    sys: FiberedSystem,
    k: int,
    d_max: int = 3,
    num_points: int | None = None,
    max_iter: int = 200,
    seed: int = 0,
    modulus: int | None = None,
    jobs: int = 1,
    per_point: int | None = DEFAULT_PER_POINT,
) -> DimensionEstimate:
    """Estimate dim of the closure of the order-k jets of iterates.

    Raises :class:`Unsaturated` (carrying the estimate) when 50% more
    sample points change the Hilbert profile.
    """
    p = prime_for_seed(seed) if modulus is None else modulus
    n = len(coordinate_names(sys.base, sys.fiber, k))
    per = min(per_point or max_iter, max_iter)
    pts = num_points or default_points(n, d_max, per, sys.phase_dim)
    base = sample_orbit_jets(sys, k, pts, max_iter, seed, p, jobs, per_point=per)
    extra_pts = max(1, -(-pts // 2))
    extra = sample_orbit_jets(sys, k, extra_pts, max_iter, seed, p, jobs, first_point=pts, per_point=per)
    est = estimate_from_sample(base, d_max)
    bigger = hilbert_profile(concat_samples(base, extra), d_max)
    est.sample = base.provenance
    est.saturation = {
        "base_samples": base.size,
        "extended_samples": bigger.samples,
        "extended_profile": bigger.pairs(),
        "stable": bigger.values == est.profile.values,
        "recommended_samples": 2 * comb(n + d_max, d_max),
    }
    if bigger.values != est.profile.values:
        est.confidence = LOW
        raise Unsaturated("Hilbert profile changed with 50% more samples", estimate=est)
    return est


# -- specialisation ----------------------------------------------------------------------


@dataclass
class SpecialisationReport:
    param: str
    specials: list
    special_dims: list
    generic_dim: int
    generic_relative: int
    verdict: str
    estimates: dict

    def as_report(self, encode) -> dict:
        return {
            "param": self.param,
            "special_values": [encode(v) for v in self.specials],
            "special_dims": self.special_dims,
            "generic_dim": self.generic_dim,
            "generic_relative_dim": self.generic_relative,
            "verdict": self.verdict,
            "runs": {k: v.as_report() for k, v in self.estimates.items()},
        }


def compare_specialisation(
    family: ParamFamily,
    k: int,
    d_max: int = 3,
    num_points: int | None = None,
    max_iter: int = 200,
    seed: int = 0,
    modulus: int | None = None,
    jobs: int = 1,
    extra_specials: Sequence = (),
    per_point: int | None = DEFAULT_PER_POINT,
) -> SpecialisationReport:
    """dim at s = s0 (and any extra pins) against dim_S of the family minus one."""
    p = prime_for_seed(seed) if modulus is None else modulus
    sys = family.system
    others = {q: None for q in sys.params if q != family.param and q not in sys.bindings}
    specials = [family.special] + list(extra_specials)
    estimates = {}
    dims = []
    for i, s0 in enumerate(specials):
        pinned = pin_parameters(sys, seed, p, {**others, family.param: s0})
        est = estimate_dimension(pinned, k, d_max, num_points, max_iter, seed, p, jobs, per_point)
        estimates[f"special_{i}"] = est
        dims.append(est.dimension)
    generic_sys = pin_parameters(promote_parameter(sys, family.param), seed, p, others)
    gen = estimate_dimension(generic_sys, k, d_max, num_points, max_iter, seed, p, jobs, per_point)
    estimates["generic"] = gen
    relative = gen.dimension - 1
    if any(d > relative for d in dims):
        verdict = "FAIL"
    elif all(d == relative for d in dims):
        verdict = "PASS-EQUALITY"
    else:
        verdict = "PASS"
    return SpecialisationReport(family.param, specials, dims, gen.dimension, relative, verdict, estimates)


__all__ = [
    "OrbitSample",
    "HilbertProfile",
    "DimensionEstimate",
    "RelationReport",
    "SpecialisationReport",
    "pin_parameters",
    "sample_orbit_jets",
    "sample_from_points",
    "calibration_samples",
    "concat_samples",
    "monomials",
    "evaluation_matrix",
    "hilbert_profile",
    "hilbert_function",
    "finite_differences",
    "growth_degree",
    "discover_relations",
    "vanishes_on",
    "estimate_from_sample",
    "estimate_dimension",
    "default_points",
    "compare_specialisation",
    "HIGH",
    "MEDIUM",
    "LOW",
]
