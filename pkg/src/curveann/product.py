"""ANN over fixed-length point sequences in an l_p-product of l_2.

Point sequences are vectorized by projecting each point with a shared
Gaussian matrix and concatenating, which turns the product distance into a
plain l_p distance in ``d' = k * l`` dimensions. Two backends answer
queries on the vectorized data:

``ScanIndex``
    exact l_p nearest neighbour by linear scan.
``GridIndex``
    a ladder of radii ``r_min * (1 + eps)^i``; at radius ``r`` space is cut
    into cubes of side ``eps * r / d'^(1/p)`` and every cube meeting the
    radius-``r`` ball of a stored vector records that vector. A query walks
    up the ladder and returns the first owner found in its own cube.
    Cell count per ball grows like ``(d'^(1/p) / eps)^d'``, so this backend
    is only usable for small ``d'``.

Grid cells are keyed in memory by the raw little-endian int64 cell
coordinates, held in a sorted table per radius (:class:`BucketTable`).
On disk each coordinate is zigzag-encoded and written as a little-endian
base-128 varint (:func:`encode_cell_key`).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDataset,
    DimensionMismatch,
    DimensionTooLargeForGrid,
    InvalidRadiusRange,
    LengthMismatch,
)
from .embedding import project
from .geometry import check_epsilon, check_p

__all__ = [
    "DEFAULT_GRID_DIM_CAP",
    "BucketTable",
    "GridIndex",
    "ScanIndex",
    "VectorizedSequence",
    "build_grid",
    "build_scan",
    "cells_per_ball_bound",
    "decode_cell_key",
    "encode_cell_key",
    "lp_norm",
    "query_grid",
    "query_scan",
    "radius_ladder",
    "vectorize",
]

DEFAULT_GRID_DIM_CAP = 14
DEFAULT_MAX_CELLS = 10_000_000
RADIUS_SAMPLE = 256


def lp_norm(x, p, axis=-1):
    """l_p norm along ``axis``, scaled by the max entry so large ``p`` is safe."""
    a = np.abs(np.asarray(x, dtype=np.float64))
    if a.size == 0:
        return np.zeros(a.shape[:-1]) if a.ndim > 1 else 0.0
    peak = a.max(axis=axis, keepdims=True)
    if math.isinf(p):
        return np.squeeze(peak, axis=axis)
    safe = np.where(peak > 0, peak, 1.0)
    s = np.sum((a / safe) ** p, axis=axis, keepdims=True) ** (1.0 / p)
    return np.squeeze(peak * s, axis=axis)


@dataclass(frozen=True, eq=False)
class VectorizedSequence:
    owner_id: str
    signature_key: str
    vec: np.ndarray


def vectorize(points, m):
    """Project every point with ``m`` and concatenate; length ``k * l``."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != m.d:
        raise DimensionMismatch(f"expected points of dimension {m.d}, got shape {pts.shape}")
    return project(m, pts).ravel()


def _stack(vectors):
    vectors = list(vectors)
    if not vectors:
        raise LengthMismatch("no vectors given")
    owners = [v.owner_id for v in vectors]
    lengths = {np.asarray(v.vec).size for v in vectors}
    if len(lengths) != 1:
        raise LengthMismatch(f"vectors have differing lengths {sorted(lengths)}")
    return owners, np.vstack([np.asarray(v.vec, dtype=np.float64).ravel() for v in vectors])


class ScanIndex:
    """Exact l_p nearest neighbour by brute-force scan."""

    backend = "scan"

    def __init__(self, owners, vectors, p):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or len(owners) != vectors.shape[0]:
            raise LengthMismatch("owners and vector table disagree")
        self.owners = list(owners)
        self.vectors = vectors
        self.p = check_p(p)

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.owners)

    def nearest(self, q, p=None):
        """Return ``(owner, distance)``; ties go to the earliest stored vector."""
        q = np.asarray(q, dtype=np.float64).ravel()
        if q.size != self.dim:
            raise LengthMismatch(f"query has length {q.size}, index expects {self.dim}")
        p = self.p if p is None else check_p(p)
        dist = lp_norm(self.vectors - q, p, axis=1)
        i = int(np.argmin(dist))
        return self.owners[i], float(dist[i])

    def query(self, q, p=None):
        return self.nearest(q, p)[0]


def build_scan(vectors, p):
    owners, table = _stack(vectors)
    return ScanIndex(owners, table, p)


def query_scan(index, q, p=None):
    return index.nearest(q, p)


def radius_ladder(vectors, epsilon, p=2.0, sample=RADIUS_SAMPLE):
    """Pick ``(r_min, r_max)`` for the grid from pairwise l_p distances.

    ``r_min`` is half the smallest positive pairwise distance and ``r_max``
    twice the largest, over the whole set or, above ``sample`` vectors, an
    evenly spaced subset.
    """
    check_epsilon(epsilon)
    table = vectors if isinstance(vectors, np.ndarray) else _stack(vectors)[1]
    table = np.asarray(table, dtype=np.float64)
    n = table.shape[0]
    if n < 2:
        raise DegenerateDataset("need at least two vectors for a radius ladder")
    if n > sample:
        table = table[np.linspace(0, n - 1, sample).round().astype(int)]
    i, j = np.triu_indices(table.shape[0], k=1)
    dist = lp_norm(table[i] - table[j], p, axis=1)
    positive = dist[dist > 0]
    if positive.size == 0:
        raise DegenerateDataset("all vectors coincide")
    return float(positive.min()) / 2.0, float(dist.max()) * 2.0


def cells_per_ball_bound(dim, p, epsilon):
    """Upper bound on the number of grid cells meeting one ball."""
    return (2 * math.ceil(dim ** (1.0 / p) / epsilon) + 2) ** dim


def _ball_cells(x, r, side, p, max_cells, block=1 << 21):
    # grow cell prefixes one coordinate at a time, pruning by partial l_p^p gap;
    # prefixes are processed in blocks so the gap matrix stays bounded
    rp = r**p * (1.0 + 1e-9)
    cells = np.zeros((1, 0), dtype=np.int64)
    acc = np.zeros(1)
    for t in range(x.size):
        lo = math.floor((x[t] - r) / side) - 1
        hi = math.floor((x[t] + r) / side) + 1
        cand = np.arange(lo, hi + 1, dtype=np.int64)
        gap = np.maximum(0.0, np.maximum(cand * side - x[t], x[t] - (cand + 1) * side)) ** p
        step = max(1, block // cand.size)
        new_cells, new_acc, found = [], [], 0
        for s0 in range(0, acc.size, step):
            total = acc[s0:s0 + step, None] + gap[None, :]
            rows, cols = np.nonzero(total <= rp)
            found += rows.size
            if found > max_cells:
                raise DimensionTooLargeForGrid(
                    f"grid needs more than {max_cells} cells at d'={x.size}; use the scan backend"
                )
            new_cells.append(np.concatenate([cells[s0 + rows], cand[cols, None]], axis=1))
            new_acc.append(total[rows, cols])
        cells = np.concatenate(new_cells)
        acc = np.concatenate(new_acc)
    return cells


def _cell_of(q, side):
    return np.floor(q / side).astype("<i8")


class GridIndex:
    """Radius ladder of grid-bucket tables. Built by :func:`build_grid`."""

    backend = "grid"

    def __init__(self, owners, dim, p, epsilon, radii, buckets, degenerate=False):
        self.owners = list(owners)
        self.dim = int(dim)
        self.p = check_p(p)
        self.epsilon = check_epsilon(epsilon)
        self.radii = np.asarray(radii, dtype=np.float64)
        self.buckets = buckets
        self.degenerate = bool(degenerate)

    def __len__(self):
        return len(self.owners)

    @property
    def sides(self):
        return self.epsilon * self.radii / self.dim ** (1.0 / self.p)

    def locate(self, q):
        """Return ``(owner, radius)`` of the first hit, or ``None``."""
        q = np.asarray(q, dtype=np.float64).ravel()
        if q.size != self.dim:
            raise LengthMismatch(f"query has length {q.size}, index expects {self.dim}")
        if self.degenerate:
            return self.owners[0], 0.0
        for r, side, table in zip(self.radii, self.sides, self.buckets):
            hit = table.get(_cell_of(q, side).tobytes())
            if hit is not None:
                return self.owners[int(hit[0])], float(r)
        return None

    def query(self, q, p=None):
        # bucket geometry is fixed at build time, so a different p is ignored
        found = self.locate(q)
        return None if found is None else found[0]

    def bucket_count(self):
        return sum(len(t) for t in self.buckets)


class BucketTable:
    """Cells of one radius and the stored vectors covering each.

    Keys are the raw int64 cell coordinates viewed as fixed-width byte
    strings, kept sorted for binary search; owners are stored CSR-style.
    """

    def __init__(self, keys, starts, members, dim):
        self.dim = int(dim)
        self.keys = keys
        self.starts = starts
        self.members = members

    @classmethod
    def from_cells(cls, cells, owner_idx, dim):
        vt = np.dtype((np.void, 8 * dim))
        if cells.shape[0] == 0:
            return cls(np.empty(0, dtype=vt), np.zeros(1, dtype=np.int64), np.empty(0, dtype=np.int64), dim)
        keys = np.ascontiguousarray(cells.astype("<i8")).view(vt).ravel()
        uniq, inv = np.unique(keys, return_inverse=True)
        order = np.lexsort((owner_idx, inv))
        counts = np.bincount(inv, minlength=uniq.size)
        starts = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        return cls(uniq, starts, owner_idx[order].astype(np.int64), dim)

    @classmethod
    def from_items(cls, items, dim):
        items = sorted(items, key=lambda kv: kv[0])
        vt = np.dtype((np.void, 8 * dim))
        keys = np.array([k for k, _ in items], dtype=vt) if items else np.empty(0, dtype=vt)
        counts = [len(v) for _, v in items]
        starts = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        members = (np.concatenate([np.asarray(v, dtype=np.int64) for _, v in items])
                   if items else np.empty(0, dtype=np.int64))
        return cls(keys, starts, members, dim)

    def __len__(self):
        return self.keys.size

    def get(self, key):
        """Owner positions stored under ``key`` (raw cell bytes), or ``None``."""
        probe = np.frombuffer(key, dtype=self.keys.dtype)
        i = int(np.searchsorted(self.keys, probe)[0])
        if i < self.keys.size and self.keys[i] == probe[0]:
            return self.members[self.starts[i]:self.starts[i + 1]]
        return None

    def __iter__(self):
        return (k.tobytes() for k in self.keys)

    def items(self):
        for i in range(self.keys.size):
            yield self.keys[i].tobytes(), self.members[self.starts[i]:self.starts[i + 1]]


def build_grid(vectors, p, epsilon, r_min=None, r_max=None,
               grid_dim_cap=DEFAULT_GRID_DIM_CAP, max_cells=DEFAULT_MAX_CELLS):
    """Build a :class:`GridIndex` over vectorized sequences.

    ``r_min``/``r_max`` default to :func:`radius_ladder`. ``max_cells``
    caps the total number of (cell, vector) entries over all radii; beyond
    it :class:`DimensionTooLargeForGrid` is raised. A set whose
    vectors all coincide (including a single vector) becomes a degenerate
    index that answers every query with its first owner.
    """
    p = check_p(p)
    epsilon = check_epsilon(epsilon)
    if isinstance(vectors, tuple) and len(vectors) == 2:
        owners, table = vectors
        table = np.asarray(table, dtype=np.float64)
    else:
        owners, table = _stack(vectors)
    dim = table.shape[1]
    if dim > grid_dim_cap:
        raise DimensionTooLargeForGrid(f"d' = {dim} exceeds the grid cap {grid_dim_cap}")
    if r_min is None or r_max is None:
        try:
            lo, hi = radius_ladder(table, epsilon, p)
        except DegenerateDataset:
            if np.all(table == table[0]):
                return GridIndex(owners, dim, p, epsilon, [], [], degenerate=True)
            raise
        r_min = lo if r_min is None else r_min
        r_max = hi if r_max is None else r_max
    if not (0 < r_min <= r_max) or not math.isfinite(r_max):
        raise InvalidRadiusRange(f"need 0 < r_min <= r_max, got {r_min}, {r_max}")
    steps = math.ceil(math.log(r_max / r_min) / math.log1p(epsilon) - 1e-12)
    radii = r_min * (1.0 + epsilon) ** np.arange(max(steps, 0) + 1)
    buckets = []
    budget = max_cells
    for r in radii:
        side = epsilon * r / dim ** (1.0 / p)
        parts, who = [], []
        for i, x in enumerate(table):
            cells = _ball_cells(x, r, side, p, budget)
            budget -= cells.shape[0]
            parts.append(cells)
            who.append(np.full(cells.shape[0], i, dtype=np.int64))
        buckets.append(BucketTable.from_cells(np.concatenate(parts), np.concatenate(who), dim))
    return GridIndex(owners, dim, p, epsilon, radii, buckets)


def query_grid(g, q):
    """Owner of the first non-empty cube on the radius ladder, or ``None``."""
    return g.query(q)


def _zigzag(v):
    return (v << 1) ^ (v >> 63) if v < 0 else v << 1


def encode_cell_key(cell):
    """Zigzag + LEB128 varint encoding of integer cell coordinates."""
    out = bytearray()
    for c in cell:
        z = _zigzag(int(c))
        while True:
            b = z & 0x7F
            z >>= 7
            if z:
                out.append(b | 0x80)
            else:
                out.append(b)
                break
    return bytes(out)


def decode_cell_key(data, dim):
    cell = []
    pos = 0
    for _ in range(dim):
        z = shift = 0
        while True:
            if pos >= len(data):
                raise ValueError("truncated cell key")
            b = data[pos]
            pos += 1
            z |= (b & 0x7F) << shift
            shift += 7
            if not b & 0x80:
                break
        cell.append((z >> 1) ^ -(z & 1))
    if pos != len(data):
        raise ValueError("trailing bytes in cell key")
    return np.array(cell, dtype="<i8")
