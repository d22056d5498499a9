"""Command-line interface: ``curveann build|query|eval|selftest``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal failure.
Results go to stdout and are deterministic; timings and diagnostics go to
stderr.
"""

import argparse
import math
import sys

import numpy as np

from .errors import CorruptIndex, CurveANNError, DataError, VersionMismatch
from .evaluation import gen_curves, run_concentration_suite, run_eval
from .geometry import SearchParams
from .index import build, query
from .io import load_index, parse_dataset, save_index
from .metrics import brute_force_lp_distance, curve_distance

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _p_arg(text):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid p {text!r}") from None


def _add_params(sub):
    sub.add_argument("--p", type=_p_arg, default=1.0, help="exponent (>= 1) or 'inf' for Frechet")
    sub.add_argument("--eps", type=float, default=0.5, help="approximation slack in (0, 1/2]")
    sub.add_argument("--reps", type=int, default=None, help="repetitions L (default ceil(4/eps))")
    sub.add_argument("--backend", choices=["grid", "scan"], default="scan")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--k", type=int, default=None, help="override the projection dimension")
    sub.add_argument("--k-scale", type=float, default=1.0)


def _metric_flags(sub):
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--dfd", action="store_const", const="dfd", dest="metric")
    group.add_argument("--dtw", action="store_const", const="dtw", dest="metric")


def make_parser():
    parser = _Parser(prog="curveann", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)

    b = subs.add_parser("build", help="build and save an index")
    b.add_argument("--data", required=True)
    b.add_argument("--out", required=True)
    _add_params(b)

    q = subs.add_parser("query", help="query a saved index")
    q.add_argument("--index", required=True)
    q.add_argument("--query", required=True)
    _metric_flags(q)

    e = subs.add_parser("eval", help="build, query and compare with exact search")
    e.add_argument("--data", required=True)
    e.add_argument("--queries", required=True)
    _add_params(e)
    _metric_flags(e)

    s = subs.add_parser("selftest", help="Monte Carlo and oracle self checks")
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--threshold-trials", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    return parser


def _params(args):
    try:
        return SearchParams(p=args.p, epsilon=args.eps, repetitions=args.reps,
                            backend=args.backend, seed=args.seed,
                            k_override=args.k, k_scale=args.k_scale)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_build(args, out, err):
    params = _params(args)
    curves = parse_dataset(args.data)
    index = build(curves, params)
    save_index(index, args.out)
    out.write(f"built n={index.n} d={index.d} m={index.m} k={index.k} "
              f"p_effective={index.p_effective!r} repetitions={params.repetitions} "
              f"stored_vectors={index.stored_vectors()}\n")
    err.write(f"build took {index.build_seconds:.3f}s\n")


def _cmd_query(args, out, err):
    index = load_index(args.index)
    for Q in parse_dataset(args.query):
        r = query(index, Q, metric=args.metric)
        out.write(f"{Q.id} {r.curve_id} {r.reported_distance!r} probes={r.signatures_probed} "
                  f"candidates={r.candidates_examined} fallback={int(r.fallback)}\n")


def _cmd_eval(args, out, err):
    params = _params(args)
    data = parse_dataset(args.data)
    queries = parse_dataset(args.queries)
    report = run_eval(data, queries, params, metric=args.metric)
    out.write(report.to_text())
    err.write(f"build {report.build_seconds:.3f}s, "
              f"queries {sum(r.seconds for r in report.records):.3f}s\n")


def _oracle_checks(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        m1, m2, d = rng.integers(1, 6), rng.integers(1, 6), rng.integers(1, 4)
        V, U = rng.standard_normal((m1, d)), rng.standard_normal((m2, d))
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            a = curve_distance(V, U, p)
            b = brute_force_lp_distance(V, U, p)
            worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    return worst


def _cmd_selftest(args, out, err):
    report = run_concentration_suite(args.trials, seed=args.seed,
                                     threshold_trials=args.threshold_trials)
    out.write(report.to_text())
    worst = _oracle_checks(args.seed)
    ok_oracle = worst <= 1e-9
    out.write(f"{'PASS' if ok_oracle else 'FAIL'} oracle_equivalence: {worst!r} (<= 1e-9)\n")
    data = gen_curves(20, (1, 3), 2, seed=args.seed)
    queries = gen_curves(20, (1, 3), 2, seed=args.seed + 1, prefix="q")
    ev = run_eval(data, queries, SearchParams(p=1, epsilon=0.5, repetitions=4, k_override=16))
    ok_eval = ev.success_rate >= 0.9
    out.write(f"{'PASS' if ok_eval else 'FAIL'} dtw_success_rate: {ev.success_rate!r} (>= 0.9)\n")
    if not (report.passed and ok_oracle and ok_eval):
        raise RuntimeError("self test failed")


_COMMANDS = {
    "build": _cmd_build,
    "query": _cmd_query,
    "eval": _cmd_eval,
    "selftest": _cmd_selftest,
}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        _COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        err.write(parser.format_usage())
        return EXIT_USAGE
    except (DataError, CorruptIndex, VersionMismatch, OSError) as exc:
        err.write(f"data error: {exc}\n")
        return EXIT_DATA
    except CurveANNError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        err.write(f"internal failure: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
