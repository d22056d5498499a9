"""(1+eps)-approximate nearest-neighbour search for polygonal curves.

Distances are l_p-distances of curves: dynamic time warping at ``p = 1``
and discrete Frechet at ``p = inf``. The index projects points with a
seeded Gaussian matrix, pads curves along every traversal signature and
searches each signature class in the projected l_p space.
"""

from .errors import *  # noqa: F401,F403
from .geometry import INFINITY, Backend, Curve, SearchParams, euclid, validate_dataset
from .metrics import (
    Traversal,
    brute_force_lp_distance,
    count_traversals,
    curve_distance,
    dfd,
    dtw,
    lp_curve_distance,
)
from .traversals import (
    Side,
    TraversalSignature,
    compatible,
    enumerate_signatures,
    expand,
    signature_of,
    signatures_between,
    traversal_of,
)
from .embedding import (
    EmbeddingConfig,
    EmbeddingMatrix,
    choose_k,
    moment_constant,
    project,
    sample_matrix,
)
from .product import GridIndex, ScanIndex, build_grid, build_scan, query_grid, radius_ladder, vectorize
from .index import CurveIndex, QueryResult, build, p_for_dfd, query, query_dfd, query_dtw
from .evaluation import Model, exact_scan_nn, gen_curves, run_concentration_suite, run_eval
from .io import load_index, parse_dataset, save_index, write_dataset

__version__ = "0.1.0"
