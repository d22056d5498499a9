import itertools
import math

import numpy as np
import pytest

# Independent oracles: these deliberately avoid the package's own helpers.

STEPS = {"first": (1, 0), "second": (0, 1), "both": (1, 1)}


def all_traversals(m1, m2):
    """Every traversal of an m1 x m2 grid, by filtering all step words."""
    out = []
    for n_steps in range(max(m1, m2) - 1, m1 + m2 - 1):
        for word in itertools.product(STEPS.values(), repeat=n_steps):
            i = j = 1
            pairs = [(1, 1)]
            for di, dj in word:
                i += di
                j += dj
                pairs.append((i, j))
            if (i, j) == (m1, m2):
                out.append(tuple(pairs))
    return out


def path_cost(V, U, pairs, p):
    d = [math.dist(V[i - 1], U[j - 1]) for i, j in pairs]
    if math.isinf(p):
        return max(d)
    return sum(x**p for x in d) ** (1.0 / p)


def oracle_distance(V, U, p):
    V = np.asarray(V, dtype=float).reshape(len(V), -1)
    U = np.asarray(U, dtype=float).reshape(len(U), -1)
    return min(path_cost(V, U, t, p) for t in all_traversals(len(V), len(U)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
