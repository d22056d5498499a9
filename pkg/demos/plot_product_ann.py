"""
Nearest neighbours in an l_p-product space
==========================================

Point sequences of a fixed length are projected point by point with one
shared matrix and concatenated, so their l_p-product distance becomes a
plain l_p distance. The scan backend answers exactly; the grid backend
looks the query up in a ladder of cell tables and returns an owner within
a small factor of the nearest one.
"""

import numpy as np

from curveann import build_grid, build_scan, query_grid, sample_matrix, vectorize
from curveann.product import VectorizedSequence, lp_norm

rng = np.random.default_rng(3)
G = sample_matrix(1, 2, seed=7)

# 40 sequences of two points each, so d' = k * 2 = 2
seqs = [rng.standard_normal((2, 2)) for _ in range(40)]
vecs = [VectorizedSequence(f"s{i:02d}", "demo", vectorize(s, G)) for i, s in enumerate(seqs)]

scan = build_scan(vecs, p=2)
grid = build_grid(vecs, p=2, epsilon=0.5)
print("grid radii:", len(grid.radii), "cells:", grid.bucket_count())

table = np.array([v.vec for v in vecs])
for _ in range(5):
    q = vectorize(rng.standard_normal((2, 2)), G)
    owner, dist = scan.nearest(q)
    hit = query_grid(grid, q)
    approx = lp_norm(table[int(hit[1:])] - q, 2) if hit else float("nan")
    print(f"scan {owner} at {dist:.3f}   grid {hit} at {approx:.3f}")
