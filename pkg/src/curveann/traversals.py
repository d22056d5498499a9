"""Traversal signatures ``(l, A, B)``.

A traversal of length ``l`` has ``l - 1`` steps, numbered ``1 .. l-1``; step
``k`` moves from pair ``k`` to pair ``k + 1``. ``A`` holds the steps where
only the second curve advances and ``B`` the steps where both advance; on
every other step only the first curve advances. The triple determines the
traversal, and each curve can be padded ("expanded") to a sequence of
``l`` points so that the traversal cost becomes an l_p-product distance
between the two expansions.

In the index the first curve is the stored data curve and the second the
query.

Canonical key format: ``"<l>:<A>:<B>"`` with each set written as ascending
comma-separated step numbers, or ``-`` when empty, e.g. ``"3:1:2"``,
``"2:-:1"``.
"""

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleSignature, InvalidSignature, LimitExceeded
from .geometry import Curve
from .metrics import Traversal

__all__ = [
    "DEFAULT_M_MAX",
    "Side",
    "TraversalSignature",
    "compatible",
    "enumerate_signatures",
    "expand",
    "expansion_indices",
    "signature_of",
    "signatures_between",
    "traversal_of",
]

DEFAULT_M_MAX = 12


class Side(enum.Enum):
    FIRST = "first"
    SECOND = "second"


def _fmt_set(s):
    return ",".join(str(k) for k in sorted(s)) if s else "-"


def _parse_set(text):
    if text == "-":
        return frozenset()
    return frozenset(int(t) for t in text.split(","))


@dataclass(frozen=True, order=False)
class TraversalSignature:
    l: int
    A: frozenset
    B: frozenset

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 1:
            raise InvalidSignature(f"l must be a positive integer, got {self.l}")
        A = frozenset(int(k) for k in self.A)
        B = frozenset(int(k) for k in self.B)
        steps = range(1, self.l)
        if A & B:
            raise InvalidSignature(f"A and B overlap: {sorted(A & B)}")
        if any(k not in steps for k in A | B):
            raise InvalidSignature(f"step indices must lie in 1..{self.l - 1}")
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def m1(self):
        """Length of the first curve this signature applies to."""
        return self.l - len(self.A)

    @property
    def m2(self):
        """Length of the second curve this signature applies to."""
        return len(self.A) + len(self.B) + 1

    @property
    def key(self):
        return f"{self.l}:{_fmt_set(self.A)}:{_fmt_set(self.B)}"

    @classmethod
    def from_key(cls, key):
        try:
            l, a, b = key.split(":")
            return cls(int(l), _parse_set(a), _parse_set(b))
        except ValueError as exc:
            if isinstance(exc, InvalidSignature):
                raise
            raise InvalidSignature(f"malformed signature key {key!r}") from None

    def sort_key(self):
        return (self.l, tuple(sorted(self.A)), tuple(sorted(self.B)))

    def __str__(self):
        return self.key


def signature_of(t):
    """Signature of a traversal (a :class:`Traversal` or a pair sequence)."""
    if not isinstance(t, Traversal):
        t = Traversal(tuple(t))
    A, B = set(), set()
    for k, ((i0, j0), (i1, j1)) in enumerate(zip(t.pairs, t.pairs[1:]), start=1):
        if i1 == i0:
            A.add(k)
        elif j1 > j0:
            B.add(k)
    return TraversalSignature(len(t.pairs), frozenset(A), frozenset(B))


def traversal_of(s):
    """Rebuild the unique traversal with signature ``s``."""
    i = j = 1
    pairs = [(1, 1)]
    for k in range(1, s.l):
        if k in s.A:
            j += 1
        elif k in s.B:
            i += 1
            j += 1
        else:
            i += 1
        pairs.append((i, j))
    return Traversal(tuple(pairs))


def signatures_between(m1, m2):
    """All signatures with implied lengths exactly ``(m1, m2)``, sorted."""
    out = []
    for b in range(min(m1, m2)):
        l = m1 + m2 - 1 - b
        a = m2 - 1 - b
        steps = range(1, l)
        for A in itertools.combinations(steps, a):
            rest = [k for k in steps if k not in A]
            for B in itertools.combinations(rest, b):
                out.append(TraversalSignature(l, frozenset(A), frozenset(B)))
    out.sort(key=TraversalSignature.sort_key)
    return out


def enumerate_signatures(m_data, m_query, side=Side.SECOND, m_max=DEFAULT_M_MAX):
    """Lazily enumerate the signatures relevant to one side of a search.

    With ``side=SECOND`` (query side) the second-curve length is exactly
    ``m_query`` and the first-curve length ranges over ``1 .. m_data``. With
    ``side=FIRST`` (data side) the first-curve length is exactly ``m_data``
    and the second ranges over ``1 .. m_query``. Output is ordered by ``l``,
    then ``A``, then ``B`` (as ascending tuples).
    """
    side = Side(side)
    if m_data < 1 or m_query < 1:
        raise ValueError("curve lengths must be positive")
    if m_data > m_max or m_query > m_max:
        raise LimitExceeded(
            f"curve length {max(m_data, m_query)} exceeds the enumeration cap {m_max}"
        )
    if side is Side.SECOND:
        shapes = [(m1, m_query) for m1 in range(1, m_data + 1)]
    else:
        shapes = [(m_data, m2) for m2 in range(1, m_query + 1)]
    by_l = {}
    for m1, m2 in shapes:
        for s in signatures_between(m1, m2):
            by_l.setdefault(s.l, []).append(s)
    for l in sorted(by_l):
        yield from sorted(by_l[l], key=TraversalSignature.sort_key)


def _length(c):
    return len(c) if isinstance(c, Curve) else len(np.asarray(c))


def compatible(c, s, side):
    """Whether curve ``c`` has the length signature ``s`` expects on ``side``."""
    side = Side(side)
    want = s.m1 if side is Side.FIRST else s.m2
    return _length(c) == want


def expansion_indices(s, side):
    """0-based vertex index of each of the ``l`` expanded positions."""
    side = Side(side)
    idx = np.zeros(s.l, dtype=np.intp)
    pos = 0
    for k in range(1, s.l):
        if side is Side.FIRST:
            if k not in s.A:
                pos += 1
        elif k in s.A or k in s.B:
            pos += 1
        idx[k] = pos
    return idx


def expand(c, s, side):
    """Pad curve ``c`` to the ``l``-point sequence dictated by ``s``.

    Returns an ``(l, d)`` array (consecutive duplicates allowed).
    """
    side = Side(side)
    if not compatible(c, s, side):
        want = s.m1 if side is Side.FIRST else s.m2
        raise IncompatibleSignature(
            f"signature {s.key} needs a {want}-point curve on side {side.value}, got {_length(c)}"
        )
    pts = c.points if isinstance(c, Curve) else np.asarray(c, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    return pts[expansion_indices(s, side)]
