"""
Curve distances from DTW to discrete Frechet
============================================

The l_p-distance of two curves takes the cheapest traversal, measuring
each traversal by the l_p norm of its paired point distances. ``p = 1``
is dynamic time warping and ``p = inf`` is the discrete Frechet distance;
in between the value moves smoothly from one to the other.
"""

import math

import numpy as np

from curveann import Curve, count_traversals, curve_distance, dfd, dtw, lp_curve_distance

# two short random walks in the plane
rng = np.random.default_rng(0)
V = Curve("V", np.cumsum(rng.standard_normal((5, 2)), axis=0))
U = Curve("U", np.cumsum(rng.standard_normal((4, 2)), axis=0))

print("traversals of a 5 x 4 pair:", count_traversals(5, 4))
print("dtw  :", dtw(V, U))
print("dfd  :", dfd(V, U))

# the distance is non-increasing in p and settles on the Frechet value
for p in (1, 1.5, 2, 4, 8, 32, math.inf):
    print(f"p = {p:>4}: {curve_distance(V, U, p):.6f}")

# once p >= log(m1 + m2) / log(1 + eps) the l_p value is within 1 + eps of dfd
eps = 0.1
p = math.log(len(V) + len(U)) / math.log1p(eps)
ratio = lp_curve_distance(V, U, p) / dfd(V, U)
print(f"p = {p:.2f} gives d_p / dfd = {ratio:.4f} (<= {1 + eps})")
