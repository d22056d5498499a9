"""Exact l_p-distances between curves.

The l_p-distance of two curves minimizes, over all traversals, the l_p norm
of the vector of Euclidean distances between paired vertices. ``p = 1`` is
dynamic time warping, ``p = inf`` the discrete Frechet distance.

All DP routines work on the ``(m1, m2)`` matrix of pairwise Euclidean
distances. The finite-p DP keeps each partial cost as ``peak**p * mass``
with ``mass >= 1`` so that exponents around 100 do not overflow.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatch, InvalidTraversal, LimitExceeded, TooLargeForBruteForce
from .geometry import Curve, check_p, euclid

__all__ = [
    "Traversal",
    "brute_force_lp_distance",
    "count_traversals",
    "curve_distance",
    "dfd",
    "dtw",
    "iter_traversals",
    "lp_curve_distance",
    "traversal_cost",
]

BRUTE_FORCE_MAX_TOTAL = 16
COUNT_MAX_TOTAL = 24


def _points(c):
    if isinstance(c, Curve):
        return c.points
    a = np.asarray(c, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty (m, d) point array, got shape {a.shape}")
    return a


def _distance_matrix(V, U):
    V = _points(V)
    U = _points(U)
    if V.shape[1] != U.shape[1]:
        raise DimensionMismatch(f"curve dimensions differ: {V.shape[1]} vs {U.shape[1]}")
    return cdist(V, U)


@dataclass(frozen=True)
class Traversal:
    """A monotone joint walk over two curves, as 1-based index pairs."""

    pairs: tuple

    def __post_init__(self):
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        if not pairs:
            raise InvalidTraversal("a traversal has at least one pair")
        if pairs[0] != (1, 1):
            raise InvalidTraversal(f"a traversal starts at (1, 1), not {pairs[0]}")
        for (i0, j0), (i1, j1) in zip(pairs, pairs[1:]):
            di, dj = i1 - i0, j1 - j0
            if di not in (0, 1) or dj not in (0, 1) or di + dj == 0:
                raise InvalidTraversal(f"illegal step {(i0, j0)} -> {(i1, j1)}")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    @property
    def shape(self):
        """``(m1, m2)``, the curve lengths this traversal spans."""
        return self.pairs[-1]


def iter_traversals(m1, m2):
    """Yield every traversal of an ``m1`` by ``m2`` grid as a tuple of pairs."""
    if m1 < 1 or m2 < 1:
        raise ValueError("curve lengths must be positive")
    path = [(1, 1)]

    def walk(i, j):
        if i == m1 and j == m2:
            yield tuple(path)
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            ni, nj = i + di, j + dj
            if ni <= m1 and nj <= m2:
                path.append((ni, nj))
                yield from walk(ni, nj)
                path.pop()

    yield from walk(1, 1)


def _norm(values, p):
    if not values:
        return 0.0
    peak = max(values)
    if math.isinf(p):
        return peak
    if peak == 0.0:
        return 0.0
    return peak * math.fsum((v / peak) ** p for v in values) ** (1.0 / p)


def traversal_cost(V, U, traversal, p):
    """l_p norm of the paired distances along one traversal."""
    V = _points(V)
    U = _points(U)
    pairs = traversal.pairs if isinstance(traversal, Traversal) else traversal
    p = check_p(p, allow_inf=True)
    return _norm([euclid(V[i - 1], U[j - 1]) for i, j in pairs], p)


def count_traversals(m1, m2):
    """Number of traversals between curves of lengths ``m1`` and ``m2``.

    This is the Delannoy number ``D(m1 - 1, m2 - 1)``.
    """
    if m1 < 1 or m2 < 1:
        raise ValueError("curve lengths must be positive")
    if m1 + m2 > COUNT_MAX_TOTAL:
        raise LimitExceeded(f"m1 + m2 = {m1 + m2} exceeds {COUNT_MAX_TOTAL}")
    table = [[0] * m2 for _ in range(m1)]
    for i in range(m1):
        for j in range(m2):
            if i == 0 or j == 0:
                table[i][j] = 1
            else:
                table[i][j] = table[i - 1][j] + table[i][j - 1] + table[i - 1][j - 1]
    return table[-1][-1]


def _dtw_dp(D):
    m1, m2 = D.shape
    acc = np.full((m1 + 1, m2 + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, m1 + 1):
        for j in range(1, m2 + 1):
            acc[i, j] = D[i - 1, j - 1] + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return float(acc[m1, m2])


def _dfd_dp(D):
    m1, m2 = D.shape
    acc = np.full((m1 + 1, m2 + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, m1 + 1):
        for j in range(1, m2 + 1):
            acc[i, j] = max(D[i - 1, j - 1], min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1]))
    return float(acc[m1, m2])


def _lp_dp(D, p):
    # cost(i, j) = peak**p * mass; (0, 0) encodes the empty prefix
    m1, m2 = D.shape
    inv = 1.0 / p
    peak = [[0.0] * m2 for _ in range(m1)]
    mass = [[0.0] * m2 for _ in range(m1)]
    value = [[0.0] * m2 for _ in range(m1)]
    for i in range(m1):
        for j in range(m2):
            if i == 0 and j == 0:
                pk, ms = 0.0, 0.0
            else:
                best = math.inf
                for a, b in ((i - 1, j), (i, j - 1), (i - 1, j - 1)):
                    if a >= 0 and b >= 0 and value[a][b] < best:
                        best = value[a][b]
                        pk, ms = peak[a][b], mass[a][b]
            d = float(D[i, j])
            if d > pk:
                ms = 1.0 + ms * (pk / d) ** p
                pk = d
            elif pk > 0.0:
                ms = ms + (d / pk) ** p
            peak[i][j] = pk
            mass[i][j] = ms
            value[i][j] = pk * ms**inv if pk > 0.0 else 0.0
    return value[-1][-1]


def lp_curve_distance(V, U, p):
    """Exact l_p-distance of two curves for finite ``p >= 1``.

    Parameters
    ----------
    V, U : Curve or array_like
        Curves as :class:`~curveann.geometry.Curve` or ``(m, d)`` arrays.
    p : float
        Finite exponent, at least 1.

    Returns
    -------
    float
        ``min_T (sum_{(i,j) in T} |v_i - u_j|^p)^(1/p)``.

    Examples
    --------
    >>> lp_curve_distance([[0], [2]], [[0], [1], [2]], 1)
    1.0
    """
    p = check_p(p)
    D = _distance_matrix(V, U)
    if p == 1.0:
        return _dtw_dp(D)
    return _lp_dp(D, p)


def curve_distance(V, U, p):
    """Like :func:`lp_curve_distance` but ``p = inf`` gives the Frechet distance."""
    p = check_p(p, allow_inf=True)
    if math.isinf(p):
        return dfd(V, U)
    return lp_curve_distance(V, U, p)


def dtw(V, U):
    """Dynamic time warping distance (sum of paired distances)."""
    return _dtw_dp(_distance_matrix(V, U))


def dfd(V, U):
    """Discrete Frechet distance.

    >>> dfd([[0, 0], [1, 0]], [[0, 1], [1, 1]])
    1.0
    """
    return _dfd_dp(_distance_matrix(V, U))


def brute_force_lp_distance(V, U, p):
    """Minimize over every traversal explicitly. Test oracle only."""
    V = _points(V)
    U = _points(U)
    if V.shape[1] != U.shape[1]:
        raise DimensionMismatch(f"curve dimensions differ: {V.shape[1]} vs {U.shape[1]}")
    p = check_p(p, allow_inf=True)
    m1, m2 = len(V), len(U)
    if m1 + m2 > BRUTE_FORCE_MAX_TOTAL:
        raise TooLargeForBruteForce(
            f"m1 + m2 = {m1 + m2} exceeds {BRUTE_FORCE_MAX_TOTAL}"
        )
    return min(traversal_cost(V, U, t, p) for t in iter_traversals(m1, m2))
