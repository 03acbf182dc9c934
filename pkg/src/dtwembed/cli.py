"""Command-line front end: similarity -> factorize -> eval, or transform end to end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import evaluation
from .dtw import DtwConfig, default_window
from .factorization import FactorizeConfig, factorize, read_features, write_features, write_trace
from .sampling import build_partial_similarity, default_budget, read_sparse, sample_pairs, write_sparse
from .timeseries_io import DataError, Dataset, load_dataset

log = logging.getLogger("dtwembed")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3

# stage ids for seed derivation; fixed so that transform == similarity + factorize
_STAGE_SAMPLE, _STAGE_INIT, _STAGE_EVAL = 0, 1, 2

SIMILARITY_FILE = "similarity.txt"
FEATURES_FILE = "features.csv"
TRACE_FILE = "trace.csv"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def stage_seed(seed: int, stage: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), stage])


def _read_inputs(args) -> Dataset:
    parts = [load_dataset(p, has_labels=args.labels) for p in args.input]
    ds = Dataset.concat(parts)
    if args.znorm:
        ds = ds.znormalized()
    return ds


def _add_data_flags(p):
    p.add_argument("--input", action="append", required=True, metavar="FILE",
                   help="UCR-style dataset file; repeat to merge files in order")
    p.add_argument("--labels", action="store_true", help="first field of each row is an integer label")
    p.add_argument("--znorm", action="store_true", help="z-normalize each series before DTW")


def _add_similarity_flags(p):
    p.add_argument("--window", type=int, default=None,
                   help="DTW band half-width (default: min(40, round(mean length / 10)))")
    p.add_argument("--sample-c", type=float, default=20.0, help="sample round(c n ln n) pairs")
    p.add_argument("--budget", type=int, default=None, help="explicit number of sampled pairs")
    p.add_argument("--threads", type=int, default=None, help="DTW worker threads (default: all)")


def _add_factorize_flags(p):
    p.add_argument("--d", type=int, default=30, help="feature dimension")
    p.add_argument("--iters", type=int, default=20, help="outer coordinate descent passes")
    p.add_argument("--init", choices=("zero", "perturbed"), default="zero")
    p.add_argument("--tol", type=float, default=None,
                   help="stop early once the relative objective change drops below this")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dtwembed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("similarity", help="sample pairs and write the sparse similarity matrix")
    _add_data_flags(p)
    _add_similarity_flags(p)
    _add_common(p)

    p = sub.add_parser("factorize", help="factorize a sparse similarity file into features")
    p.add_argument("--matrix", type=Path, default=None,
                   help=f"sparse similarity file (default: OUT_DIR/{SIMILARITY_FILE})")
    _add_factorize_flags(p)
    _add_common(p)

    p = sub.add_parser("transform", help="similarity + factorize in one go")
    _add_data_flags(p)
    _add_similarity_flags(p)
    _add_factorize_flags(p)
    _add_common(p)

    p = sub.add_parser("eval", help="score features on clustering or classification")
    _add_data_flags(p)
    p.add_argument("--features", type=Path, default=None,
                   help=f"feature CSV (default: OUT_DIR/{FEATURES_FILE})")
    p.add_argument("--task", choices=("cluster", "classify"), default="cluster")
    p.add_argument("--k", type=int, default=None, help="clusters (default: number of classes)")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--test-frac", type=float, default=0.3,
                   help="held-out fraction when a single input file is given for classify")
    p.add_argument("--format", choices=("kv", "csv"), default="kv")
    _add_common(p)
    return parser


def _validate(args):
    if getattr(args, "d", 1) < 1:
        raise UsageError("--d must be >= 1")
    if getattr(args, "iters", 1) < 1:
        raise UsageError("--iters must be >= 1")
    if getattr(args, "window", None) is not None and args.window < 0:
        raise UsageError("--window must be >= 0")
    if getattr(args, "budget", None) is not None and args.budget < 0:
        raise UsageError("--budget must be >= 0")
    if getattr(args, "sample_c", 1.0) <= 0:
        raise UsageError("--sample-c must be positive")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        raise UsageError("--threads must be >= 1")
    if getattr(args, "trials", 1) < 1 or getattr(args, "restarts", 1) < 1:
        raise UsageError("--trials and --restarts must be >= 1")
    if not 0.0 < getattr(args, "test_frac", 0.5) < 1.0:
        raise UsageError("--test-frac must lie in (0, 1)")


def run_similarity(args):
    ds = _read_inputs(args)
    n = len(ds)
    if n < 2:
        raise DataError(f"need at least 2 series, got {n}")
    window = default_window(ds) if args.window is None else args.window
    budget = default_budget(n, args.sample_c) if args.budget is None else args.budget
    start = time.perf_counter()
    sample = sample_pairs(n, budget, stage_seed(args.seed, _STAGE_SAMPLE))
    A = build_partial_similarity(ds, sample, DtwConfig(window), threads=args.threads)
    elapsed = time.perf_counter() - start
    args.out_dir.mkdir(parents=True, exist_ok=True)
    path = args.out_dir / SIMILARITY_FILE
    write_sparse(A, path)
    print(f"n={n} pairs={len(sample)} entries={len(A)} window={window} elapsed={elapsed:.3f}s")
    log.info("wrote %s", path)
    return A


def run_factorize(args, A=None):
    if A is None:
        path = args.matrix or args.out_dir / SIMILARITY_FILE
        A = read_sparse(path)
    cfg = FactorizeConfig(
        d=args.d, iterations=args.iters, seed=stage_seed(args.seed, _STAGE_INIT),
        init_mode=args.init, tol=args.tol,
    )
    start = time.perf_counter()
    X, trace = factorize(A, cfg)
    elapsed = time.perf_counter() - start
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_features(X, args.out_dir / FEATURES_FILE)
    write_trace(trace, args.out_dir / TRACE_FILE)
    print(
        f"n={A.n} d={cfg.d} iterations={trace.iterations} "
        f"observed_error={trace.observed_error[-1]:.6g} elapsed={elapsed:.3f}s"
    )
    return X


def run_transform(args):
    # factorize from the file just written so the result is identical to the two-step run
    run_similarity(args)
    args.matrix = args.out_dir / SIMILARITY_FILE
    return run_factorize(args)


def _split(n, labels, frac, seed):
    rng = np.random.default_rng(stage_seed(seed, _STAGE_EVAL))
    perm = rng.permutation(n)
    n_test = max(1, int(round(frac * n)))
    test = np.sort(perm[:n_test])
    train = np.sort(perm[n_test:])
    return train, test


def _classify_metrics(args, X, ds, parts_sizes):
    y = ds.labels
    if len(parts_sizes) > 1:
        n_train = parts_sizes[0]
        train = np.arange(n_train)
        test = np.arange(n_train, len(y))
    else:
        train, test = _split(len(y), y, args.test_frac, args.seed)
    if train.size == 0 or test.size == 0:
        raise DataError("classification needs nonempty train and test sets")
    pred = evaluation.knn1_classify(X[train], y[train], X[test])
    metrics = {"task": "classify", "n_train": int(train.size), "n_test": int(test.size),
               "accuracy": evaluation.accuracy(pred, y[test])}
    classes = np.unique(y[train])
    if classes.size == 2:
        pos = classes[1]
        truth = (y[test] == pos).astype(int)
        if 0 < truth.sum() < truth.size:
            scores = evaluation.knn1_margin_scores(X[train], y[train], X[test], pos)
            metrics["auc"] = evaluation.auc_binary(scores, truth)
    elif classes.size > 2:
        aucs = []
        for c in classes:
            truth = (y[test] == c).astype(int)
            if 0 < truth.sum() < truth.size:
                scores = evaluation.knn1_margin_scores(X[train], y[train], X[test], c)
                aucs.append(evaluation.auc_binary(scores, truth))
        if aucs:
            metrics["auc_macro_ovr"] = float(np.mean(aucs))
    return metrics


def _cluster_metrics(args, X, ds):
    y = ds.labels
    k = args.k or int(np.unique(y).size)
    root = stage_seed(args.seed, _STAGE_EVAL)
    scores = []
    for child in root.spawn(args.trials):
        res = evaluation.kmeans(X, k, restarts=args.restarts, seed=child)
        scores.append(evaluation.nmi(res.assignments, y))
    metrics = {"task": "cluster", "k": k, "trials": args.trials,
               "nmi_mean": float(np.mean(scores)), "nmi_std": float(np.std(scores))}
    for t, s in enumerate(scores):
        metrics[f"nmi_trial{t}"] = s
    return metrics


def format_metrics(metrics: dict, fmt: str) -> str:
    def val(v):
        return f"{v:.6g}" if isinstance(v, float) else str(v)

    if fmt == "csv":
        return "metric,value\n" + "".join(f"{k},{val(v)}\n" for k, v in metrics.items())
    return "".join(f"{k}={val(v)}\n" for k, v in metrics.items())


def run_eval(args):
    parts = [load_dataset(p, has_labels=True) for p in args.input]
    ds = Dataset.concat(parts)
    X = read_features(args.features or args.out_dir / FEATURES_FILE)
    if X.shape[0] != len(ds):
        raise DataError(f"{X.shape[0]} feature rows but {len(ds)} labelled series")
    if args.task == "cluster":
        metrics = _cluster_metrics(args, X, ds)
    else:
        metrics = _classify_metrics(args, X, ds, [len(p) for p in parts])
    text = format_metrics(metrics, args.format)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / ("metrics.csv" if args.format == "csv" else "metrics.txt")).write_text(text)
    sys.stdout.write(text)
    return metrics


_COMMANDS = {
    "similarity": run_similarity,
    "factorize": run_factorize,
    "transform": run_transform,
    "eval": run_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        _validate(args)
        _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dtwembed {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, IndexError, ValueError) as exc:
        print(f"dtwembed {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FloatingPointError as exc:
        print(f"dtwembed {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
