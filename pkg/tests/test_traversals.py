import math

import numpy as np
import pytest

from curveann import (
    Curve,
    Side,
    TraversalSignature,
    compatible,
    count_traversals,
    enumerate_signatures,
    expand,
    lp_curve_distance,
    signature_of,
    traversal_of,
)
from curveann.errors import IncompatibleSignature, InvalidSignature, LimitExceeded
from curveann.traversals import signatures_between

from conftest import all_traversals, path_cost


def sig(l, A=(), B=()):
    return TraversalSignature(l, frozenset(A), frozenset(B))


@pytest.mark.parametrize(
    "pairs, expected",
    [
        ([(1, 1), (2, 2)], sig(2, (), (1,))),
        ([(1, 1), (1, 2), (2, 3)], sig(3, (1,), (2,))),
        ([(1, 1), (2, 1)], sig(2)),
        ([(1, 1)], sig(1)),
    ],
)
def test_signature_round_trip_examples(pairs, expected):
    assert signature_of(pairs) == expected
    assert traversal_of(expected).pairs == tuple(pairs)


def test_implied_lengths():
    s = sig(3, (1,), (2,))
    assert (s.m1, s.m2) == (2, 3)
    assert (sig(1).m1, sig(1).m2) == (1, 1)


def test_signature_validation():
    for bad in (lambda: sig(0), lambda: sig(3, (1,), (1,)), lambda: sig(2, (2,)), lambda: sig(2, (0,))):
        with pytest.raises(InvalidSignature):
            bad()


def test_key_format():
    assert sig(3, (1,), (2,)).key == "3:1:2"
    assert sig(2, (), (1,)).key == "2:-:1"
    assert sig(1).key == "1:-:-"
    assert sig(6, (4, 1), (2, 5)).key == "6:1,4:2,5"
    for s in (sig(1), sig(6, (4, 1), (2, 5)), sig(3, (1,))):
        assert TraversalSignature.from_key(s.key) == s
    with pytest.raises(InvalidSignature):
        TraversalSignature.from_key("3:x:-")


def test_bijection_over_all_small_grids():
    for m1 in range(1, 8):
        for m2 in range(1, 11 - m1):
            travs = all_traversals(m1, m2) if m1 + m2 <= 9 else None
            sigs = signatures_between(m1, m2)
            assert len(sigs) == count_traversals(m1, m2)
            assert len({s.key for s in sigs}) == len(sigs)
            for s in sigs:
                t = traversal_of(s)
                assert t.shape == (m1, m2)
                assert signature_of(t) == s
            if travs is not None:
                assert {signature_of(t).key for t in travs} == {s.key for s in sigs}


def test_enumerate_small_cases():
    assert list(enumerate_signatures(1, 1)) == [sig(1)]
    assert list(enumerate_signatures(1, 1, side=Side.FIRST)) == [sig(1)]
    both = [s for s in enumerate_signatures(2, 2, side=Side.SECOND) if s.m1 == 2]
    assert len(both) == 3 == count_traversals(2, 2)


def test_enumerate_sides_and_order():
    q = list(enumerate_signatures(3, 2, side=Side.SECOND))
    assert all(s.m2 == 2 and s.m1 <= 3 for s in q)
    assert len(q) == sum(count_traversals(m1, 2) for m1 in range(1, 4))
    d = list(enumerate_signatures(3, 2, side=Side.FIRST))
    assert all(s.m1 == 3 and s.m2 <= 2 for s in d)
    assert len(d) == sum(count_traversals(3, m2) for m2 in range(1, 3))
    keys = [s.sort_key() for s in q]
    assert keys == sorted(keys)


def test_enumerate_count_bound():
    for m in range(1, 7):
        total = sum(len(signatures_between(a, b)) for a in range(1, m + 1) for b in range(1, m + 1))
        assert total <= math.comb(4 * m + 1, m + 1) <= (4 * math.e) ** (m + 1)


def test_enumerate_guard():
    with pytest.raises(LimitExceeded):
        next(enumerate_signatures(13, 2))
    assert next(enumerate_signatures(13, 2, m_max=13)).l == 2


def test_expand_examples():
    s = sig(3, (1,), (2,))
    np.testing.assert_array_equal(expand(Curve("v", [[0.0], [2.0]]), s, Side.FIRST), [[0.0], [0.0], [2.0]])
    np.testing.assert_array_equal(expand(Curve("u", [[0.0], [1.0], [2.0]]), s, Side.SECOND), [[0.0], [1.0], [2.0]])
    single = Curve("x", [[1.0, 2.0]])
    for side in Side:
        np.testing.assert_array_equal(expand(single, sig(1), side), single.points)


def test_expand_incompatible():
    with pytest.raises(IncompatibleSignature):
        expand(Curve("v", [[0.0], [1.0], [2.0]]), sig(3, (1,), (2,)), Side.FIRST)


def test_compatible_examples():
    s = sig(3, (1,), (2,))
    assert compatible(Curve("a", [[0.0], [1.0]]), s, Side.FIRST)
    assert not compatible(Curve("a", [[0.0], [1.0], [2.0]]), s, Side.FIRST)
    assert compatible(Curve("a", [[0.0]]), sig(1), Side.SECOND)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_expansion_cost_equals_traversal_cost(p, rng):
    for _ in range(20):
        m1, m2 = rng.integers(1, 6, size=2)
        V, Q = rng.standard_normal((m1, 2)), rng.standard_normal((m2, 2))
        best = math.inf
        for s in signatures_between(m1, m2):
            a, b = expand(V, s, Side.FIRST), expand(Q, s, Side.SECOND)
            cost = np.sum(np.linalg.norm(a - b, axis=1) ** p) ** (1 / p)
            assert cost == pytest.approx(path_cost(V, Q, traversal_of(s).pairs, p), rel=1e-12)
            best = min(best, cost)
        assert best == pytest.approx(lp_curve_distance(V, Q, p), rel=1e-9)
