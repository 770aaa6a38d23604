"""Experimental-design point generators: Halton, Latin hypercube, and
equispaced boundary points on the unit square.

Halton points are built with exact integer arithmetic (one float division at
the end), so sequences are bit-identical across platforms. All generators
emit points in the closed unit cube; `to_box` maps them affinely elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray          # n x d, coordinates in [0, 1]
    generator: str              # "halton" | "latin_hypercube" | "equispaced"
    seed: int | None = None     # Latin hypercube only

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.points, dtype=dtype)

    def __len__(self):
        return self.points.shape[0]


def _radical_inverse(index: int, base: int) -> float:
    """Van der Corput radical inverse of `index` in `base`, as the exact
    rational num/den evaluated in floating point once."""
    num, den = 0, 1
    while index > 0:
        index, digit = divmod(index, base)
        num = num * base + digit
        den *= base
    return num / den


def halton(n: int, d: int) -> PointSet:
    """First `n` entries of the unscrambled Halton sequence in `d` dimensions
    (bases = first `d` primes, index origin 1, so the first base-2 entry
    is 0.5)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= d <= len(_PRIMES):
        raise ValueError(f"d must be in 1..{len(_PRIMES)}")
    pts = np.empty((n, d))
    for j, base in enumerate(_PRIMES[:d]):
        pts[:, j] = [_radical_inverse(i, base) for i in range(1, n + 1)]
    return PointSet(pts, "halton")


def latin_hypercube(n: int, d: int, seed: int) -> PointSet:
    """Seeded Latin hypercube: one point per axis stratum per dimension,
    jittered uniformly within its stratum."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    pts = np.empty((n, d))
    for j in range(d):
        pts[:, j] = (rng.permutation(n) + rng.random(n)) / n
    return PointSet(pts, "latin_hypercube", seed)


def boundary_equispaced(n: int) -> PointSet:
    """`n` points with equal arc-length spacing around the perimeter of the
    unit square, traversed (0,0) -> (1,0) -> (1,1) -> (0,1); each side starts
    at its corner, and when n is not divisible by 4 the remainder goes to the
    earlier sides (corner-first). n=4 gives the corners, n=8 adds midpoints.
    """
    if n < 4:
        raise ValueError("need at least 4 boundary points")
    per_side, extra = divmod(n, 4)
    counts = [per_side + (1 if s < extra else 0) for s in range(4)]
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    directions = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    rows = []
    for corner, direction, count in zip(corners, directions, counts):
        offsets = np.arange(count) / count   # half-open [corner, next corner)
        rows.append(corner + offsets[:, None] * direction)
    return PointSet(np.vstack(rows), "equispaced")


def to_box(points, lo, hi) -> np.ndarray:
    """Affine map of unit-cube points into the box [lo, hi]^d (lo/hi may be
    per-dimension arrays)."""
    pts = np.asarray(points, float)
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    return lo + pts * (hi - lo)
