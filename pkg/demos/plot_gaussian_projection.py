"""
Gaussian projection from l_2 into l_p
=====================================

A k x d matrix of i.i.d. standard normals maps a unit vector v to Gv,
whose coordinates are again standard normal. So E ||Gv||_p^p = c_p k with
c_p = E|X|^p, and for large enough k the norm rarely strays far from its
mean. The matrices are generated from a seed and can be re-derived later.
"""

import numpy as np

from curveann import EmbeddingConfig, choose_k, moment_constant, project, sample_matrix

for p in (1, 2, 3, 4):
    print(f"c_{p} = {moment_constant(p):.6f}")

# projection dimension for 3-d points
for p, eps in ((1, 0.5), (2, 0.25), (4, 0.5)):
    print(f"p={p} eps={eps}: k = {choose_k(3, EmbeddingConfig(p, eps))}")

# same seed, same matrix
G = sample_matrix(200, 3, seed=42)
assert np.array_equal(G.entries, sample_matrix(200, 3, seed=42).entries)

# ||Gv||_p^p / (c_p k) over many unit vectors; G is fixed here, so the
# mean carries that one matrix's deviation, within a few percent at k = 200
rng = np.random.default_rng(1)
v = rng.standard_normal((5000, 3))
v /= np.linalg.norm(v, axis=1, keepdims=True)
gv = project(G, v)
for p in (1, 2, 4):
    ratio = np.sum(np.abs(gv) ** p, axis=1) / (moment_constant(p) * G.k)
    print(f"p={p}: mean ratio {ratio.mean():.4f}, 1% quantile {np.quantile(ratio, 0.01):.3f}")
