"""Seeded Gaussian projection from l_2^d into l_p^k.

For a ``k x d`` matrix ``G`` of i.i.d. standard normals and any ``v``,
``E ||Gv||_p^p = c_p * k * ||v||_2^p`` with ``c_p = E|X|^p``. The
projection does not contract any vector by more than ``1 + eps`` (after
scaling by ``(c_p k)^(1/p)``) once ``k`` is large enough; :func:`choose_k`
instantiates that dimension rule with unit constant.

Normals come from PCG64 raw 64-bit output passed through the Box-Muller
transform, both under our control, so matrices are reproducible from
``(seed, k, d)`` independent of numpy's distribution code. The transform
is versioned by :data:`GENERATOR_VERSION`, which persisted indices record.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DimensionOverflow, InvalidParameter
from .geometry import MAX_SEED, check_epsilon, check_p

__all__ = [
    "DEFAULT_K_CAP",
    "EmbeddingConfig",
    "EmbeddingMatrix",
    "GENERATOR_VERSION",
    "choose_k",
    "moment_constant",
    "project",
    "repetition_seed",
    "sample_matrix",
    "standard_normals",
]

GENERATOR_VERSION = "pcg64-boxmuller-v1"
DEFAULT_K_CAP = 10**6

_TWO_POW_M53 = 2.0**-53


def moment_constant(p):
    """``E|X|^p`` for ``X ~ N(0, 1)``, i.e. ``2^(p/2) Gamma((p+1)/2) / sqrt(pi)``.

    Even integer ``p`` returns the exact double factorial ``(p-1)!!``.
    """
    p = check_p(p)
    if p == int(p) and int(p) % 2 == 0 and p <= 300:
        return float(math.prod(range(int(p) - 1, 0, -2)))
    return math.exp(0.5 * p * math.log(2.0) + math.lgamma(0.5 * (p + 1.0)) - 0.5 * math.log(math.pi))


@dataclass(frozen=True)
class EmbeddingConfig:
    p: float
    epsilon: float
    k_scale: float = 1.0
    k_override: int = None

    def __post_init__(self):
        object.__setattr__(self, "p", check_p(self.p))
        object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))
        if not (self.k_scale > 0 and math.isfinite(self.k_scale)):
            raise InvalidParameter(f"k_scale must be positive, got {self.k_scale}")
        if self.k_override is not None and (int(self.k_override) != self.k_override or self.k_override < 1):
            raise InvalidParameter(f"k_override must be a positive integer, got {self.k_override}")

    @property
    def delta(self):
        """Relative contraction slack ``p eps / (2 + p eps)``."""
        pe = self.p * self.epsilon
        return pe / (2.0 + pe)

    @property
    def alpha(self):
        """Exponent factor of the space bound; informational only."""
        pe = self.p * self.epsilon
        a = math.log(1.0 / self.epsilon) * (2.0 + pe) ** 2 / pe**2
        return a * 2.0**self.p if self.p > 2 else a


def choose_k(d, config, cap=DEFAULT_K_CAP):
    """Target dimension of the projection.

    ``k_override`` wins when set. Otherwise, with ``delta = p eps / (2 + p eps)``:

    * ``p in [1, 2]``: ``ceil(k_scale * d * ln(1/eps) / delta^2)``
    * ``p > 2``: ``ceil(k_scale * d * 2^p * ln(2 + d/(p eps)) / delta^2)``

    >>> choose_k(2, EmbeddingConfig(p=1, epsilon=0.5))
    35
    """
    if int(d) != d or d < 1:
        raise InvalidParameter(f"d must be a positive integer, got {d}")
    if config.k_override is not None:
        k = int(config.k_override)
    else:
        p, eps, delta = config.p, config.epsilon, config.delta
        if p <= 2:
            raw = d * math.log(1.0 / eps) / delta**2
        else:
            # (log d / (p eps)) goes negative for small d; the +2 matches the space bound
            raw = d * 2.0**p * math.log(2.0 + d / (p * eps)) / delta**2
        raw *= config.k_scale
        if not math.isfinite(raw) or raw > cap:
            raise DimensionOverflow(f"target dimension {raw:.4g} exceeds cap {cap}")
        k = max(1, math.ceil(raw))
    if k > cap:
        raise DimensionOverflow(f"target dimension {k} exceeds cap {cap}")
    return k


def repetition_seed(seed, repetition):
    """Seed of the projection used by repetition number ``repetition``."""
    return (int(seed) + int(repetition)) % (MAX_SEED + 1)


def standard_normals(seed, size):
    """Deterministic N(0, 1) draws (PCG64 + Box-Muller)."""
    n = int(np.prod(size))
    pairs = (n + 1) // 2
    raw = np.random.PCG64(int(seed)).random_raw(2 * pairs)
    u = (raw >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53
    u1 = 1.0 - u[0::2]
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:n].reshape(size)


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    k: int
    d: int
    seed: int
    entries: np.ndarray = field(repr=False)
    generator: str = GENERATOR_VERSION

    def __eq__(self, other):
        if not isinstance(other, EmbeddingMatrix):
            return NotImplemented
        return (self.k, self.d, self.seed, self.generator) == (
            other.k, other.d, other.seed, other.generator
        ) and np.array_equal(self.entries, other.entries)

    __hash__ = None


def sample_matrix(k, d, seed):
    """Draw the ``k x d`` Gaussian matrix for ``seed``; same inputs, same bits."""
    if int(k) != k or k < 1 or int(d) != d or d < 1:
        raise InvalidParameter(f"k and d must be positive integers, got k={k}, d={d}")
    if int(seed) != seed or not (0 <= seed <= MAX_SEED):
        raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {seed}")
    G = standard_normals(int(seed), (int(k), int(d)))
    G.setflags(write=False)
    return EmbeddingMatrix(int(k), int(d), int(seed), G)


def project(m, x):
    """``G x`` for a point, or row-wise for an ``(n, d)`` batch."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != m.d or x.ndim not in (1, 2):
        raise DimensionMismatch(f"expected points of dimension {m.d}, got shape {x.shape}")
    return x @ m.entries.T
