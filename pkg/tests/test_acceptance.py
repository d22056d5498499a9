"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the criterion lines
are printed even when pytest captures output.
"""

import functools
import math
import time

import numpy as np

from conftest import all_traversals
from curveann import (
    SearchParams,
    brute_force_lp_distance,
    build,
    count_traversals,
    curve_distance,
    dfd,
    lp_curve_distance,
    moment_constant,
    query,
    signature_of,
    signatures_between,
    traversal_of,
)
from curveann.evaluation import Model, exact_scan_nn, gen_curves, run_concentration_suite, run_eval
from curveann.geometry import Curve
from curveann.io import dumps_index, load_index, save_index
from curveann.metrics import iter_traversals
from curveann.product import VectorizedSequence, build_grid, build_scan, query_grid

P_VALUES = (1.0, 1.5, 2.0, 3.0, math.inf)


def report(capsys, number, name, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number} ({name}): {detail}")
    assert ok, detail


def random_pairs(count=500, seed=2024):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m1, m2, d = (int(x) for x in rng.integers(1, [6, 6, 4]))
        out.append((rng.standard_normal((m1, d)), rng.standard_normal((m2, d))))
    return out


@functools.lru_cache(maxsize=None)
def _pair_index(m1, m2):
    return [np.array(t) - 1 for t in all_traversals(m1, m2)]


def independent_distance(V, U, p):
    # every traversal from step words, costs from a dense distance table
    dist = np.sqrt(((V[:, None, :] - U[None, :, :]) ** 2).sum(-1))
    best = math.inf
    for idx in _pair_index(len(V), len(U)):
        path = dist[idx[:, 0], idx[:, 1]]
        cost = path.max() if math.isinf(p) else float((path**p).sum() ** (1.0 / p))
        best = min(best, cost)
    return best


def test_criterion_1_oracle_equivalence(capsys):
    pairs = random_pairs()
    started = time.perf_counter()
    worst = worst_indep = 0.0
    for V, U in pairs:
        for p in P_VALUES:
            dp = curve_distance(V, U, p)
            worst = max(worst, abs(dp - brute_force_lp_distance(V, U, p)))
            worst_indep = max(worst_indep, abs(dp - independent_distance(V, U, p)))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-9 and worst_indep <= 1e-9 and elapsed < 10.0
    report(capsys, 1, "oracle equivalence", ok,
           f"{len(pairs)} pairs x {len(P_VALUES)} p, max |dp - brute| = {worst:.2e}, "
           f"max |dp - step-word oracle| = {worst_indep:.2e}, {elapsed:.1f}s (< 10s)")


def test_criterion_2_large_p_frechet_sandwich(capsys):
    violations = checked = 0
    worst_ratio = 0.0
    for V, U in random_pairs():
        f = dfd(V, U)
        for eps in (0.1, 0.25, 0.5):
            p = math.log(len(V) + len(U)) / math.log1p(eps)
            dp = lp_curve_distance(V, U, p)
            checked += 1
            if not (f <= dp <= (1 + eps) * f):
                violations += 1
            if f > 0:
                worst_ratio = max(worst_ratio, dp / f / (1 + eps))
    report(capsys, 2, "large-p Frechet sandwich", violations == 0,
           f"{checked} checks, {violations} violations of dfd <= d_p <= (1+eps) dfd, "
           f"max d_p / ((1+eps) dfd) = {worst_ratio:.6f}")


def test_criterion_3_signature_combinatorics(capsys):
    mismatches = []
    for m1 in range(1, 12):
        for m2 in range(1, 13 - m1):
            sigs = signatures_between(m1, m2)
            keys = {s.key for s in sigs}
            from_traversals = {signature_of(t).key for t in iter_traversals(m1, m2)}
            round_trip = all(signature_of(traversal_of(s)) == s for s in sigs)
            exact_lengths = all((s.m1, s.m2) == (m1, m2) for s in sigs)
            n = count_traversals(m1, m2)
            if not (len(sigs) == len(keys) == n == len(from_traversals)
                    and keys == from_traversals and round_trip and exact_lengths):
                mismatches.append((m1, m2))
    # step-word count as an independent check on the small cases
    for m1 in range(1, 5):
        for m2 in range(1, 5):
            if len(all_traversals(m1, m2)) != len(signatures_between(m1, m2)):
                mismatches.append((m1, m2, "words"))
    totals = []
    for m in range(1, 7):
        total = sum(len(signatures_between(a, b)) for a in range(1, m + 1) for b in range(1, m + 1))
        totals.append((m, total, math.comb(4 * m + 1, m + 1)))
    bound_ok = all(t <= b for _, t, b in totals)
    report(capsys, 3, "signature combinatorics", not mismatches and bound_ok,
           f"bijection on all m1+m2 <= 12 ({'ok' if not mismatches else mismatches}); "
           f"totals vs C(4m+1,m+1): {', '.join(f'm={m}:{t}<={b}' for m, t, b in totals)}")


def test_criterion_4_moment_constant(capsys):
    gamma_formula = {p: 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi) for p in (1, 4)}
    exact_ok = moment_constant(2) == 1.0
    err1 = abs(moment_constant(1) - gamma_formula[1])
    err4 = abs(moment_constant(4) - gamma_formula[4])
    started = time.perf_counter()
    suite = run_concentration_suite(trials=10_000, k_list=(25,), sweep=())
    elapsed = time.perf_counter() - started
    ratios = {p: suite[f"mean_ratio_p{p}"].value for p in (1, 2, 3, 4)}
    mc_ok = all(abs(r - 1) <= 0.02 for r in ratios.values())
    ok = exact_ok and err1 <= 1e-12 and err4 <= 1e-12 and mc_ok and elapsed < 30
    report(capsys, 4, "moment constant", ok,
           f"c_2 == 1: {exact_ok}; |c_1 - gamma| = {err1:.1e}; |c_4 - gamma| = {err4:.1e}; "
           f"mean ratios {', '.join(f'p={p}:{r:.4f}' for p, r in ratios.items())} "
           f"(10^4 matrices x 64 rows); {elapsed:.1f}s (< 30s)")


def test_criterion_5_tail_behaviour(capsys):
    # the lower-tail probability at k=100 is about 0.00985, so its estimate
    # needs millions of trials to separate from 0.01
    suite = run_concentration_suite(trials=10_000, threshold_trials=4_000_000, d=2, sweep=())
    names = ["lower_tail_p2_k25", "lower_tail_p2_k50", "lower_tail_p2_k100",
             "lower_tail_p2_trend", "lower_tail_p2_at_k100",
             "upper_tail_p1_k25", "upper_tail_p1_k50", "upper_tail_p1_k100",
             "upper_tail_p1_trend", "upper_tail_p1_at_k100"]
    checks = [suite[n] for n in names]
    ok = all(c.passed for c in checks)
    report(capsys, 5, "tail behaviour", ok,
           "; ".join(f"{c.name}={c.value:g}" for c in checks)
           + " (k=100 lower tail over 4e6 trials, others 1e4)")


def test_criterion_6_grid_vs_scan(capsys):
    rng = np.random.default_rng(6)
    answered = missed = bad_factor = scan_wrong = 0
    worst = 0.0
    for dim in (2, 3, 4):
        for p in (1.0, 2.0):
            eps = 0.5
            data = rng.standard_normal((50, dim))
            vecs = [VectorizedSequence(f"v{i:02d}", "x", row) for i, row in enumerate(data)]
            grid = build_grid(vecs, p, eps)
            scan = build_scan(vecs, p)
            for q in rng.standard_normal((60, dim)) * 1.5:
                brute = [(sum(abs(a - b) ** p for a, b in zip(row, q)) ** (1 / p), i)
                         for i, row in enumerate(data)]
                best, best_i = min(brute)
                owner, dist = scan.nearest(q)
                if owner != f"v{best_i:02d}" or abs(dist - best) > 1e-9 * max(1, best):
                    scan_wrong += 1
                hit = query_grid(grid, q)
                if hit is None:
                    missed += 1
                    continue
                answered += 1
                got = brute[int(hit[1:])][0]
                worst = max(worst, got / best)
                if got > (1 + 3 * eps) * best:
                    bad_factor += 1
    ok = bad_factor == 0 and scan_wrong == 0 and answered > 0
    report(capsys, 6, "grid vs scan product ANN", ok,
           f"d' in {{2,3,4}}, p in {{1,2}}, n=50, eps=0.5: grid answered {answered}, "
           f"fell back {missed}, factor > 1+3eps {bad_factor}, worst factor {worst:.4f}; "
           f"scan != brute-force argmin {scan_wrong}")


def _dtw_family():
    data = gen_curves(50, (1, 4), 2, 7, Model.GAUSS_WALK)
    queries = gen_curves(100, (1, 4), 2, 8, Model.GAUSS_WALK, prefix="q")
    return data, queries


def test_criterion_7_end_to_end_dtw(capsys):
    data, queries = _dtw_family()
    started = time.perf_counter()
    rates, hits = {}, {}
    for L in (8, 1):
        params = SearchParams(p=1, epsilon=0.5, repetitions=L, k_override=32, backend="scan", seed=0)
        rep = run_eval(data, queries, params, metric="dtw")
        rates[L] = rep.success_rate
        hits[L] = sum(r.result_id == r.exact_id for r in rep.records)
    elapsed = time.perf_counter() - started
    ok = rates[8] >= 0.9 and rates[1] < rates[8] and elapsed < 120
    report(capsys, 7, "end-to-end DTW", ok,
           f"success L=8: {rates[8]:.2f} (>= 0.90); L=1: {rates[1]:.2f} (must be < L=8); "
           f"exact nearest returned L=8: {hits[8]}/100, L=1: {hits[1]}/100; {elapsed:.1f}s (< 120s)")


def test_criterion_8_end_to_end_dfd(capsys):
    data, queries = _dtw_family()
    started = time.perf_counter()
    params = SearchParams(p=math.inf, epsilon=0.5, repetitions=8, k_override=32, backend="scan", seed=0)
    rep = run_eval(data, queries, params, metric="dfd")
    elapsed = time.perf_counter() - started
    ok = rep.success_rate >= 0.85 and elapsed < 120
    report(capsys, 8, "end-to-end DFD", ok,
           f"success {rep.success_rate:.2f} (>= 0.85), mean factor {rep.mean_factor:.4f}, "
           f"{elapsed:.1f}s (< 120s)")


def test_criterion_9_determinism_and_persistence(capsys, tmp_path):
    data = gen_curves(30, (1, 3), 2, 9)
    queries = gen_curves(20, (1, 3), 2, 10, prefix="q")
    identical = same_answers = 0
    configs = [SearchParams(p=1, epsilon=0.5, repetitions=4, k_override=8, seed=5),
               SearchParams(p=math.inf, epsilon=0.25, repetitions=2, seed=11),
               SearchParams(p=2, epsilon=0.5, repetitions=2, k_override=1, backend="grid", seed=3)]
    for i, params in enumerate(configs):
        subset = data if params.backend.value == "scan" else [c for c in data if len(c) <= 2]
        qs = queries if params.backend.value == "scan" else [q for q in queries if len(q) <= 2]
        first, second = build(subset, params), build(subset, params)
        identical += dumps_index(first) == dumps_index(second)
        path = tmp_path / f"idx{i}.crvx"
        save_index(first, path)
        loaded = load_index(path)
        same_answers += all(query(loaded, Q) == query(first, Q) for Q in qs)
    ok = identical == len(configs) and same_answers == len(configs)
    report(capsys, 9, "determinism and persistence", ok,
           f"byte-identical rebuilds {identical}/{len(configs)}, "
           f"save/load query-equivalent {same_answers}/{len(configs)} (20 queries each, grid on m <= 2)")


def test_criterion_10_degenerate_inputs(capsys):
    rng = np.random.default_rng(10)
    walk = lambda m: np.cumsum(rng.standard_normal((m, 2)), axis=0)  # noqa: E731
    same = walk(3)
    cases = {
        "single curve": ([Curve("a", walk(3))], [Curve("q0", walk(2)), Curve("q1", walk(4))]),
        "single-point curves": ([Curve(f"p{i}", rng.standard_normal((1, 2))) for i in range(12)], None),
        "duplicate curves": ([Curve(f"d{i}", same if i % 3 == 0 else walk(3)) for i in range(9)], None),
        "all identical": ([Curve(f"s{i}", same) for i in range(6)], [Curve("q", walk(3)), Curve("q2", same)]),
    }
    failures = []
    for name, (data, queries) in cases.items():
        queries = queries or data
        for p in (1.0, 2.0, math.inf):
            for backend, k in (("scan", None), ("grid", 1)):
                if backend == "grid" and max(len(c) for c in data + queries) > 2 and name != "all identical":
                    continue
                params = SearchParams(p=p, epsilon=0.5, repetitions=2, backend=backend, k_override=k)
                rep = run_eval(data, queries, params, max_query_length=max(len(q) for q in queries))
                for r in rep.records:
                    exact_id, _ = exact_scan_nn(data, [q for q in queries if q.id == r.query_id][0],
                                                "dfd" if math.isinf(p) else p)
                    if r.approx_factor != 1.0 or r.result_id != exact_id:
                        failures.append((name, p, backend, r.query_id, r.approx_factor))
    report(capsys, 10, "degenerate inputs", not failures,
           f"{len(cases)} cases x p in {{1,2,inf}} x scan/grid: "
           f"{'all exact with factor 1.0' if not failures else failures[:5]}")
