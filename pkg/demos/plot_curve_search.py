"""
Approximate nearest curves under DTW and Frechet
================================================

The curve index keeps one product-space index per traversal signature and
per repetition. A query probes the signatures that fit its length, takes
one candidate from each, and re-ranks the candidates by the exact
distance. Here it is compared with an exact linear scan.
"""

import math

from curveann import SearchParams, build, query_dfd, query_dtw
from curveann.evaluation import exact_scan_nn, gen_curves, run_eval

data = gen_curves(50, (1, 4), 2, seed=7)
queries = gen_curves(20, (1, 4), 2, seed=8, prefix="q")

index = build(data, SearchParams(p=1, epsilon=0.5, repetitions=8, k_override=32))
print("stored vectors:", index.stored_vectors())

Q = queries[0]
res = query_dtw(index, Q)
print("dtw answer:", res.curve_id, round(res.reported_distance, 4),
      "exact:", exact_scan_nn(data, Q, "dtw"))
print(f"probed {res.signatures_probed} signatures, re-ranked {res.candidates_examined} candidates")

# an index built with p = inf searches with a large finite p
dfd_index = build(data, SearchParams(p=math.inf, epsilon=0.5, repetitions=8, k_override=32))
print("search exponent for dfd:", round(dfd_index.p_effective, 3))
res = query_dfd(dfd_index, Q)
print("dfd answer:", res.curve_id, round(res.reported_distance, 4),
      "exact:", exact_scan_nn(data, Q, "dfd"))

report = run_eval(data, queries, index.params, index=index, metric="dtw")
print(report.to_text().splitlines()[-1])
