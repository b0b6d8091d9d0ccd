"""Exact linear algebra over F_p (p < 2^31) on numpy int64 arrays."""

from __future__ import annotations

import numpy as np

_SPLIT = 1 << 16


def as_mod(a, p: int) -> np.ndarray:
    return np.asarray(a, dtype=np.int64) % p


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a @ b) mod p without int64 overflow: b is split into 16-bit halves."""
    a = as_mod(a, p)
    b = as_mod(b, p)
    n = a.shape[-1]
    # each partial product is < 2^31 * 2^16; chunk the inner dimension so sums stay < 2^63
    chunk = max(1, (1 << 62) // ((p - 1) * _SPLIT + 1))
    lo = b % _SPLIT
    hi = b // _SPLIT
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for start in range(0, n, chunk):
        sl = slice(start, start + chunk)
        part_lo = (a[:, sl] @ lo[sl]) % p
        part_hi = (a[:, sl] @ hi[sl]) % p
        out = (out + part_lo + (part_hi * _SPLIT) % p) % p
    return out


def _inv(x: int, p: int) -> int:
    return pow(int(x), p - 2, p)


def row_echelon(m: np.ndarray, p: int, reduced: bool = False) -> tuple[np.ndarray, list[int]]:
    """Gaussian elimination scanning columns left to right.

    Returns the echelon form and the pivot columns.  The number of pivots
    among the first c columns is the rank of that column prefix.
    """
    a = as_mod(m, p).copy()
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r, c:] = (a[r, c:] * _inv(a[r, c], p)) % p
        targets = np.arange(r + 1, rows) if not reduced else np.r_[np.arange(r), np.arange(r + 1, rows)]
        if targets.size:
            col = a[targets, c]
            hit = targets[col != 0]
            if hit.size:
                factors = a[hit, c][:, None]
                a[hit, c:] = (a[hit, c:] - (factors * a[r, c:][None, :]) % p) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank_mod(m: np.ndarray, p: int) -> int:
    if m.size == 0:
        return 0
    return len(row_echelon(m, p)[1])


def prefix_ranks(m: np.ndarray, p: int, prefixes) -> list[int]:
    """Rank of ``m[:, :c]`` for each c in ``prefixes``, from one elimination."""
    _, pivots = row_echelon(m, p)
    piv = np.asarray(pivots, dtype=np.int64)
    return [int(np.count_nonzero(piv < c)) for c in prefixes]


def nullspace_mod(m: np.ndarray, p: int) -> np.ndarray:
    """Basis of {v : m v = 0} as the columns of the returned array."""
    rows, cols = m.shape
    red, pivots = row_echelon(m, p, reduced=True)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        basis[f, j] = 1
        for i, pc in enumerate(pivots):
            basis[pc, j] = (-red[i, f]) % p
    return basis


def compress_rows(m: np.ndarray, p: int, target: int, rng: np.random.Generator) -> np.ndarray:
    """Random F_p combination of rows down to ``target`` rows.

    Preserves the rank of every column prefix whenever ``target`` is at
    least that rank, except with probability at most target/p.
    """
    rows = m.shape[0]
    if rows <= target:
        return as_mod(m, p)
    mix = rng.integers(0, p, size=(target, rows), dtype=np.int64)
    return matmul_mod(mix, m, p)


__all__ = ["as_mod", "matmul_mod", "row_echelon", "rank_mod", "prefix_ranks", "nullspace_mod", "compress_rows"]
