"""Core value types: curves and search parameters.

A point is a 1-d float64 array; a curve is an identifier plus an ``(m, d)``
float64 array of vertices. Curves are immutable (the array is flagged
read-only on construction).
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateId,
    EmptyCurve,
    EmptyDataset,
    InvalidParameter,
    InvalidP,
    NonFiniteCoordinate,
)

__all__ = [
    "Backend",
    "Curve",
    "INFINITY",
    "SearchParams",
    "as_point",
    "euclid",
    "validate_dataset",
]

INFINITY = math.inf

MAX_SEED = 2**64 - 1


class Backend(enum.Enum):
    GRID = "grid"
    SCAN = "scan"


def as_point(x):
    """Coerce ``x`` to a 1-d float64 array."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1)
    if a.ndim != 1:
        raise DimensionMismatch(f"a point must be 1-d, got shape {a.shape}")
    return a


def euclid(a, b):
    """Euclidean distance between two points of equal dimension.

    >>> euclid([0, 0], [3, 4])
    5.0
    """
    a = as_point(a)
    b = as_point(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimensions differ: {a.size} vs {b.size}")
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True, eq=False)
class Curve:
    """A polygonal curve given by its vertex sequence.

    Parameters
    ----------
    id : str
        Caller-supplied identifier, never generated by the library.
    points : array_like
        ``(m, d)`` vertices. A 1-d input of length ``m`` is read as ``m``
        points in R^1.
    """

    id: str
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise DimensionMismatch(
                f"curve {self.id!r}: points must form an (m, d) array, got shape {pts.shape}"
            )
        if pts.shape[0] == 0:
            raise EmptyCurve(f"curve {self.id!r} has no points")
        if pts.shape[1] == 0:
            raise DimensionMismatch(f"curve {self.id!r} has zero-dimensional points")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteCoordinate(f"curve {self.id!r} has a non-finite coordinate")
        pts.setflags(write=False)
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.id, self.points.shape, self.points.tobytes()))

    def __repr__(self):
        return f"Curve(id={self.id!r}, m={len(self)}, d={self.dim})"


def validate_dataset(curves):
    """Check a dataset and return its common dimension and maximum length.

    Returns
    -------
    d, m : int
        Ambient dimension and the largest number of vertices.
    """
    curves = list(curves)
    if not curves:
        raise EmptyDataset("dataset is empty")
    seen = set()
    d = None
    m = 0
    for c in curves:
        if not isinstance(c, Curve):
            raise TypeError(f"expected Curve, got {type(c).__name__}")
        if c.id in seen:
            raise DuplicateId(f"duplicate curve id {c.id!r}")
        seen.add(c.id)
        if d is None:
            d = c.dim
        elif c.dim != d:
            raise DimensionMismatch(
                f"curve {c.id!r} has dimension {c.dim}, expected {d}"
            )
        m = max(m, len(c))
    return d, m


def check_p(p, allow_inf=False):
    """Validate an exponent and return it as float."""
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise InvalidP(f"p must be a real number, got {p!r}") from None
    if math.isnan(p) or p < 1:
        raise InvalidP(f"p must be >= 1, got {p}")
    if math.isinf(p) and not allow_inf:
        raise InvalidP("p must be finite here")
    return p


def check_epsilon(epsilon):
    epsilon = float(epsilon)
    if not (0.0 < epsilon <= 0.5):
        raise InvalidParameter(f"epsilon must lie in (0, 1/2], got {epsilon}")
    return epsilon


@dataclass(frozen=True)
class SearchParams:
    """Parameters of a curve index.

    ``repetitions=None`` resolves to ``ceil(4 / epsilon)``. ``p`` may be
    :data:`INFINITY` (discrete Frechet); the index then searches with a
    large finite exponent, see :func:`curveann.index.p_for_dfd`.
    """

    p: float = 1.0
    epsilon: float = 0.5
    repetitions: int = None
    backend: Backend = Backend.SCAN
    seed: int = 0
    k_override: int = None
    k_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p", check_p(self.p, allow_inf=True))
        object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))
        reps = self.repetitions
        if reps is None:
            reps = math.ceil(4.0 / self.epsilon)
        if int(reps) != reps or reps < 1:
            raise InvalidParameter(f"repetitions must be a positive integer, got {reps}")
        object.__setattr__(self, "repetitions", int(reps))
        backend = self.backend
        if not isinstance(backend, Backend):
            try:
                backend = Backend(str(backend).lower())
            except ValueError:
                raise InvalidParameter(f"unknown backend {self.backend!r}") from None
        object.__setattr__(self, "backend", backend)
        if int(self.seed) != self.seed or not (0 <= self.seed <= MAX_SEED):
            raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        if self.k_override is not None:
            if int(self.k_override) != self.k_override or self.k_override < 1:
                raise InvalidParameter(f"k_override must be a positive integer, got {self.k_override}")
            object.__setattr__(self, "k_override", int(self.k_override))
        if not (self.k_scale > 0 and math.isfinite(self.k_scale)):
            raise InvalidParameter(f"k_scale must be positive, got {self.k_scale}")
        object.__setattr__(self, "k_scale", float(self.k_scale))

    @property
    def is_dfd(self):
        return math.isinf(self.p)
