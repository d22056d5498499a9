"""Synthetic data, exact baselines and empirical checks.

Two kinds of experiment live here:

* :func:`run_eval` builds an index, answers queries and compares every
  answer against the exact nearest neighbour found by a linear scan with
  the dynamic-programming distances.
* :func:`run_concentration_suite` measures by Monte Carlo the moment and
  tail behaviour of ``||Gv||_p^p`` that the projection relies on.

Report text format (``EvalReport.to_text``), one ``key=value`` record per
line, fields separated by single spaces::

    query id=<qid> result=<cid> exact=<cid> exact_distance=<float>
          returned_distance=<float> factor=<float> success=<0|1>
          fallback=<0|1> candidates=<int> probes=<int> [seconds=<float>]
    summary queries=<int> success_rate=<float> mean_factor=<float>
          p95_factor=<float> stored_vectors=<int> [build_seconds=<float>]

(each record is a single line). Floats use Python's shortest round-trip
``repr``. Timing fields appear only when requested.
"""

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .embedding import EmbeddingConfig, choose_k, moment_constant, sample_matrix, standard_normals
from .geometry import Curve
from .index import build, query
from .metrics import curve_distance, dfd, dtw

__all__ = [
    "Check",
    "ConcentrationReport",
    "EvalReport",
    "Model",
    "QueryRecord",
    "exact_scan_nn",
    "gen_curves",
    "run_concentration_suite",
    "run_eval",
]

SUCCESS_SLACK = 1e-9


class Model(enum.Enum):
    GAUSS_WALK = "gauss_walk"
    UNIFORM_BOX = "uniform_box"
    PERTURBED_COPIES = "perturbed_copies"


def gen_curves(n, m_range, d, seed, model=Model.GAUSS_WALK, *, perturbation=0.05,
               cluster_size=5, prefix="c"):
    """Generate ``n`` random curves with lengths drawn from ``m_range``.

    ``m_range`` is an inclusive ``(lo, hi)`` pair or a single int.
    ``PERTURBED_COPIES`` produces clusters of ``cluster_size`` copies of a
    random walk with i.i.d. ``N(0, perturbation^2)`` noise added.
    """
    model = Model(model)
    lo, hi = (m_range, m_range) if np.isscalar(m_range) else m_range
    rng = np.random.default_rng(seed)
    width = max(4, len(str(max(n - 1, 0))))
    ids = [f"{prefix}{i:0{width}d}" for i in range(n)]
    out = []
    if model is Model.PERTURBED_COPIES:
        base = None
        for i in range(n):
            if i % cluster_size == 0:
                m = int(rng.integers(lo, hi + 1))
                base = np.cumsum(rng.standard_normal((m, d)), axis=0)
            noise = perturbation * rng.standard_normal(base.shape) if perturbation else 0.0
            out.append(Curve(ids[i], base + noise))
        return out
    for i in range(n):
        m = int(rng.integers(lo, hi + 1))
        if model is Model.GAUSS_WALK:
            pts = np.cumsum(rng.standard_normal((m, d)), axis=0)
        else:
            pts = rng.random((m, d))
        out.append(Curve(ids[i], pts))
    return out


def _distance_fn(p):
    if isinstance(p, str):
        name = p.lower()
        if name == "dfd":
            return dfd
        if name == "dtw":
            return dtw
        p = float(name)
    return lambda a, b: curve_distance(a, b, p)


def exact_scan_nn(dataset, Q, p):
    """Exact nearest curve by linear scan; ``p`` is a number, ``inf``, ``"dfd"`` or ``"dtw"``.

    Ties go to the smaller id.
    """
    dist = _distance_fn(p)
    best = None
    for c in dataset:
        v = dist(Q, c)
        if best is None or (v, c.id) < best:
            best = (v, c.id)
    if best is None:
        raise ValueError("empty dataset")
    return best[1], float(best[0])


@dataclass(frozen=True)
class QueryRecord:
    query_id: str
    result_id: str
    exact_id: str
    exact_distance: float
    returned_distance: float
    approx_factor: float
    success: bool
    fallback: bool
    candidates: int
    probes: int
    seconds: float = 0.0


def _factor(returned, exact):
    if exact == 0.0:
        return 1.0 if returned <= SUCCESS_SLACK else math.inf
    return returned / exact


@dataclass
class EvalReport:
    epsilon: float
    records: list = field(default_factory=list)
    stored_vectors: int = 0
    build_seconds: float = 0.0

    @property
    def success_rate(self):
        if not self.records:
            return 0.0
        return sum(r.success for r in self.records) / len(self.records)

    @property
    def factors(self):
        return np.array([r.approx_factor for r in self.records])

    @property
    def mean_factor(self):
        return float(np.mean(self.factors)) if self.records else math.nan

    @property
    def p95_factor(self):
        return float(np.percentile(self.factors, 95)) if self.records else math.nan

    @property
    def fallback_rate(self):
        if not self.records:
            return 0.0
        return sum(r.fallback for r in self.records) / len(self.records)

    def to_text(self, timing=False):
        lines = []
        for r in self.records:
            line = (
                f"query id={r.query_id} result={r.result_id} exact={r.exact_id} "
                f"exact_distance={r.exact_distance!r} returned_distance={r.returned_distance!r} "
                f"factor={r.approx_factor!r} success={int(r.success)} fallback={int(r.fallback)} "
                f"candidates={r.candidates} probes={r.probes}"
            )
            if timing:
                line += f" seconds={r.seconds!r}"
            lines.append(line)
        summary = (
            f"summary queries={len(self.records)} success_rate={self.success_rate!r} "
            f"mean_factor={self.mean_factor!r} p95_factor={self.p95_factor!r} "
            f"stored_vectors={self.stored_vectors}"
        )
        if timing:
            summary += f" build_seconds={self.build_seconds!r}"
        lines.append(summary)
        return "\n".join(lines) + "\n"


def run_eval(dataset, queries, params, *, metric=None, index=None, **build_kwargs):
    """Build (unless ``index`` is given), query and score against the exact scan.

    ``metric`` is forwarded to :func:`curveann.index.query`; the exact
    baseline uses the same distance.
    """
    dataset = list(dataset)
    if index is None:
        index = build(dataset, params, **build_kwargs)
    if metric is None:
        metric = "dfd" if params.is_dfd else "lp"
    oracle_p = index.p_effective if metric == "lp" else metric
    report = EvalReport(params.epsilon, stored_vectors=index.stored_vectors(),
                        build_seconds=index.build_seconds)
    for Q in queries:
        t0 = time.perf_counter()
        res = query(index, Q, metric=metric)
        elapsed = time.perf_counter() - t0
        exact_id, exact = exact_scan_nn(dataset, Q, oracle_p)
        # recompute from primitives rather than trusting the index
        returned = exact_scan_nn([index.curves[res.curve_id]], Q, oracle_p)[1]
        factor = _factor(returned, exact)
        report.records.append(QueryRecord(
            Q.id, res.curve_id, exact_id, exact, returned, factor,
            factor <= 1.0 + params.epsilon + SUCCESS_SLACK, res.fallback,
            res.candidates_examined, res.signatures_probed, elapsed,
        ))
    return report


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: str
    passed: bool

    def __str__(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value!r} ({self.threshold})"


@dataclass
class ConcentrationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_text(self):
        return "\n".join(str(c) for c in self.checks) + "\n"

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _unit_vectors(n, d, rng):
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def projected_norms_pp(trials, k, d, p, seed, chunk=None):
    """``||G_t v_t||_p^p`` for ``trials`` fresh matrices and unit vectors."""
    rng = np.random.default_rng([seed, 1])
    chunk = chunk or max(1, 4_000_000 // (k * d))
    out = np.empty(trials)
    for i, start in enumerate(range(0, trials, chunk)):
        stop = min(trials, start + chunk)
        G = standard_normals(seed * 1_000_003 + i, (stop - start, k, d))
        v = _unit_vectors(stop - start, d, rng)
        gv = np.einsum("tkd,td->tk", G, v)
        out[start:stop] = np.sum(np.abs(gv) ** p, axis=1)
    return out


def run_concentration_suite(trials=10_000, p_list=(1, 2, 3, 4), k_list=(25, 50, 100), *,
                            seed=0, moment_rows=64, threshold_trials=None, d=3,
                            sweep=((1, 0.25), (2, 0.25), (4, 0.5)), sweep_dim=5):
    """Monte Carlo checks of the Gaussian projection.

    Parameters
    ----------
    trials : int
        Independent matrices per statistic.
    moment_rows : int
        Rows per matrix in the mean test, so ``trials * moment_rows``
        one-row draws enter each mean.
    threshold_trials : int, optional
        Trials for the lower-tail frequency at the largest ``k`` (defaults
        to ``trials``). At ``k = 100`` the lower-tail
        probability is about 0.00985, so resolving it against 0.01 takes
        millions of trials.
    """
    threshold_trials = threshold_trials or trials
    report = ConcentrationReport()
    k_list = sorted(k_list)

    for p in p_list:
        cp = moment_constant(p)
        pp = projected_norms_pp(trials, moment_rows, d, p, seed + 11 * int(10 * p))
        ratio = float(np.mean(pp) / (cp * moment_rows))
        report.checks.append(Check(f"mean_ratio_p{p:g}", ratio, "|ratio - 1| <= 0.02",
                                   abs(ratio - 1.0) <= 0.02))

    for tag, p, bound, below in (("lower_tail_p2", 2.0, 0.7, True), ("upper_tail_p1", 1.0, 3.0, False)):
        cp = moment_constant(p)
        freqs = []
        for k in k_list:
            n = threshold_trials if below and k == k_list[-1] else trials
            pp = projected_norms_pp(n, k, d, p, seed + 1000 * k + int(p))
            hit = pp <= bound * cp * k if below else pp >= bound * cp * k
            freqs.append(float(np.mean(hit)))
            report.checks.append(Check(f"{tag}_k{k}", freqs[-1], "informational", True))
        if below:
            trend = all(a > b for a, b in zip(freqs, freqs[1:]))
            rule = "strictly decreasing in k"
        else:
            trend = all(a >= b for a, b in zip(freqs, freqs[1:]))
            rule = "non-increasing in k"
        report.checks.append(Check(f"{tag}_trend", float(trend), rule, trend))
        report.checks.append(Check(f"{tag}_at_k{k_list[-1]}", freqs[-1], "< 0.01", freqs[-1] < 0.01))

    rng = np.random.default_rng([seed, 2])
    v = _unit_vectors(trials, d, rng)
    G = standard_normals(seed + 77, (trials, d))
    coord = np.einsum("td,td->t", G, v)
    ks = float(stats.kstest(coord, "norm").statistic)
    report.checks.append(Check("ks_two_stability", ks, "< 0.02", ks < 0.02))

    for p, eps in sweep:
        k = choose_k(sweep_dim, EmbeddingConfig(p, eps))
        G = sample_matrix(k, sweep_dim, seed + 500 + int(100 * p * eps))
        v = _unit_vectors(trials, sweep_dim, rng)
        norms = np.sum(np.abs(v @ G.entries.T) ** p, axis=1) ** (1.0 / p)
        floor = (moment_constant(p) * k) ** (1.0 / p) / (1.0 + eps)
        freq = float(np.mean(norms < floor))
        report.checks.append(Check(f"no_contraction_p{p:g}_eps{eps:g}_k{k}", freq, "< 0.05", freq < 0.05))
    return report
