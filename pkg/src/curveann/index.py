"""Approximate nearest-neighbour index for curves under the l_p-distance.

Every traversal of a data curve ``V`` and a query ``Q`` has a signature
``(l, A, B)``, and for a fixed signature the traversal cost is an
l_p-product distance between the two padded point sequences. The index
therefore keeps one product-space sub-index per signature, holding the
padded, projected data curves that fit it. A query probes every signature
matching its own length, collects one candidate per probe and returns the
candidate with the smallest exact curve distance. ``L`` independent
repetitions, each with its own projection matrix, amplify the success
probability.

Discrete Frechet distance is served by searching with the finite exponent
from :func:`p_for_dfd` and re-ranking with the exact Frechet distance.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .embedding import (
    GENERATOR_VERSION,
    EmbeddingConfig,
    choose_k,
    repetition_seed,
    sample_matrix,
)
from .errors import BuildBudgetExceeded, DimensionMismatch, EmptyIndex, LimitExceeded
from .geometry import Backend, Curve, check_epsilon, validate_dataset
from .metrics import dfd, dtw, lp_curve_distance
from .product import DEFAULT_GRID_DIM_CAP, ScanIndex, build_grid
from .traversals import DEFAULT_M_MAX, Side, expansion_indices, signatures_between

__all__ = [
    "CurveIndex",
    "DEFAULT_BUILD_BUDGET",
    "QueryResult",
    "Repetition",
    "build",
    "p_for_dfd",
    "query",
    "query_dfd",
    "query_dtw",
]

DEFAULT_BUILD_BUDGET = 5_000_000

METRIC_LP = "lp"
METRIC_DFD = "dfd"
METRIC_DTW = "dtw"


def p_for_dfd(m, epsilon):
    """Exponent at which the l_p-distance is within ``1 + eps`` of Frechet.

    Any traversal of two curves of length at most ``m`` has at most ``2m``
    pairs, and ``|T|^(1/p) <= 1 + eps`` once ``p >= log(2m) / log(1 + eps)``.

    >>> round(p_for_dfd(4, 0.5), 3)
    5.129
    """
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    epsilon = check_epsilon(epsilon)
    return max(1.0, math.log(2 * m) / math.log1p(epsilon))


@dataclass
class Repetition:
    """One independent copy: a projection matrix and its sub-indices."""

    matrix: object
    subindices: dict = field(default_factory=dict)


@dataclass(frozen=True)
class QueryResult:
    curve_id: str
    reported_distance: float
    candidates_examined: int
    signatures_probed: int
    fallback: bool = False


class CurveIndex:
    """Built by :func:`build`; query with :func:`query` or the methods below."""

    def __init__(self, params, curves, repetitions, *, d, m, k, p_effective,
                 max_query_length, grid_dim_cap=DEFAULT_GRID_DIM_CAP, build_seconds=0.0):
        self.params = params
        self.curves = {c.id: c for c in curves}
        self.order = [c.id for c in curves]
        self.repetitions = repetitions
        self.d = d
        self.m = m
        self.k = k
        self.p_effective = p_effective
        self.max_query_length = max_query_length
        self.grid_dim_cap = grid_dim_cap
        # informational, never persisted
        self.build_seconds = build_seconds
        self._query_plans = {}

    @property
    def n(self):
        return len(self.order)

    @property
    def generator(self):
        return GENERATOR_VERSION

    def metadata(self):
        pr = self.params
        return {
            "p_requested": "inf" if pr.is_dfd else pr.p,
            "p_effective": self.p_effective,
            "epsilon": pr.epsilon,
            "repetitions": pr.repetitions,
            "backend": pr.backend.value,
            "seed": pr.seed,
            "k_override": pr.k_override,
            "k_scale": pr.k_scale,
            "k": self.k,
            "d": self.d,
            "m": self.m,
            "n": self.n,
            "max_query_length": self.max_query_length,
            "grid_dim_cap": self.grid_dim_cap,
            "generator": GENERATOR_VERSION,
        }

    def query_plan(self, m_query):
        """Signatures a query of ``m_query`` points probes, with expansion indices."""
        plan = self._query_plans.get(m_query)
        if plan is None:
            plan = []
            for m1 in range(1, self.m + 1):
                for s in signatures_between(m1, m_query):
                    plan.append((s.key, expansion_indices(s, Side.SECOND)))
            self._query_plans[m_query] = plan
        return plan

    def query(self, Q, metric=None):
        return query(self, Q, metric=metric)

    def query_dfd(self, Q):
        return query_dfd(self, Q)

    def query_dtw(self, Q):
        return query_dtw(self, Q)

    def stored_vectors(self):
        return sum(len(sub) for rep in self.repetitions for sub in rep.subindices.values())


def _data_signatures(lengths, max_query_length):
    table = {}
    for m1 in sorted(lengths):
        sigs = []
        for m2 in range(1, max_query_length + 1):
            sigs.extend(signatures_between(m1, m2))
        table[m1] = [(s.key, expansion_indices(s, Side.FIRST)) for s in sigs]
    return table


def build(dataset, params, *, max_query_length=None, m_max=DEFAULT_M_MAX,
          budget=DEFAULT_BUILD_BUDGET, grid_dim_cap=DEFAULT_GRID_DIM_CAP):
    """Build a :class:`CurveIndex`.

    Parameters
    ----------
    dataset : sequence of Curve
    params : SearchParams
        ``params.p`` may be infinite, in which case the search exponent is
        :func:`p_for_dfd` of the longest curve.
    max_query_length : int, optional
        Longest query the index will serve through its sub-indices;
        defaults to the longest data curve. Longer queries fall back to an
        exact scan.
    m_max : int
        Hard cap on curve length; signature counts grow like ``(4e)^m``.
    budget : int
        Cap on stored vectors per repetition.
    """
    started = time.perf_counter()
    curves = list(dataset)
    d, m = validate_dataset(curves)
    if max_query_length is None:
        max_query_length = m
    if m > m_max or max_query_length > m_max:
        raise LimitExceeded(f"curve length {max(m, max_query_length)} exceeds m_max={m_max}")
    p_eff = p_for_dfd(m, params.epsilon) if params.is_dfd else params.p
    k = choose_k(d, EmbeddingConfig(p_eff, params.epsilon, params.k_scale, params.k_override))

    lengths = {len(c) for c in curves}
    sig_table = _data_signatures(lengths, max_query_length)
    groups = {}
    for c in curves:
        for key, idx in sig_table[len(c)]:
            groups.setdefault(key, (idx, []))[1].append(c)
    total = sum(len(members) for _, members in groups.values())
    if total > budget:
        raise BuildBudgetExceeded(
            f"{total} stored vectors per repetition exceeds the budget {budget}"
        )

    reps = []
    for r in range(params.repetitions):
        G = sample_matrix(k, d, repetition_seed(params.seed, r))
        projected = {c.id: c.points @ G.entries.T for c in curves}
        subs = {}
        for key in sorted(groups):
            idx, members = groups[key]
            owners = [c.id for c in members]
            table = np.stack([projected[c.id][idx].ravel() for c in members])
            if params.backend is Backend.SCAN:
                subs[key] = ScanIndex(owners, table, p_eff)
            else:
                subs[key] = build_grid((owners, table), p_eff, params.epsilon,
                                       grid_dim_cap=grid_dim_cap)
        reps.append(Repetition(G, subs))
    return CurveIndex(params, curves, reps, d=d, m=m, k=k, p_effective=p_eff,
                      max_query_length=max_query_length, grid_dim_cap=grid_dim_cap,
                      build_seconds=time.perf_counter() - started)


def _exact(metric, p):
    if metric == METRIC_DFD:
        return dfd
    if metric == METRIC_DTW:
        return dtw
    return lambda a, b: lp_curve_distance(a, b, p)


def _best(Q, ids, index, dist):
    best = None
    for cid in ids:
        v = dist(Q, index.curves[cid])
        if best is None or (v, cid) < best:
            best = (v, cid)
    return best


def query(index, Q, metric=None):
    """Approximate nearest curve to ``Q``.

    ``metric`` is ``"lp"`` (the index exponent), ``"dfd"`` or ``"dtw"``;
    by default it follows the index (``"dfd"`` for an index built with
    ``p = inf``). The projected search uses the exponent that matches the
    metric; candidates are always re-ranked by the exact distance, ties
    going to the smaller curve id.
    """
    if index.n == 0:
        raise EmptyIndex("index holds no curves")
    if not isinstance(Q, Curve):
        Q = Curve("query", Q)
    if Q.dim != index.d:
        raise DimensionMismatch(f"query has dimension {Q.dim}, index has {index.d}")
    if metric is None:
        metric = METRIC_DFD if index.params.is_dfd else METRIC_LP
    if metric == METRIC_DFD:
        p_search = index.p_effective if index.params.is_dfd else p_for_dfd(index.m, index.params.epsilon)
    elif metric == METRIC_DTW:
        p_search = 1.0
    elif metric == METRIC_LP:
        p_search = index.p_effective
    else:
        raise ValueError(f"unknown metric {metric!r}")
    dist = _exact(metric, p_search)

    candidates = set()
    probes = 0
    if len(Q) <= index.max_query_length:
        plan = index.query_plan(len(Q))
        for rep in index.repetitions:
            projected = Q.points @ rep.matrix.entries.T
            for key, idx in plan:
                sub = rep.subindices.get(key)
                if sub is None:
                    continue
                probes += 1
                owner = sub.query(projected[idx].ravel(), p_search)
                if owner is not None:
                    candidates.add(owner)
    if not candidates:
        v, cid = _best(Q, index.order, index, dist)
        return QueryResult(cid, float(v), 0, probes, fallback=True)
    v, cid = _best(Q, sorted(candidates), index, dist)
    return QueryResult(cid, float(v), len(candidates), probes)


def query_dfd(index, Q):
    return query(index, Q, metric=METRIC_DFD)


def query_dtw(index, Q):
    return query(index, Q, metric=METRIC_DTW)
