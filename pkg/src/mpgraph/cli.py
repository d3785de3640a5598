"""Command-line interface: ``mpgraph fit | simulate | benchmark``.

Exit codes: 0 success, 1 numerical or runtime failure, 2 usage or I/O error.
"""

import argparse
import json
import logging
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .evaluation import curve_patch_size, recovery_curve, run_benchmark
from .exceptions import MatrixParseError
from .io import (
    FORMATS,
    file_digest,
    parse_matrix,
    write_edge_list,
    write_manifest,
    write_matrix,
)
from .minipatch import DEFAULT_M_FRAC, MPGraphConfig, resolve_patch_size, run_mpgraph
from .synth import SCENARIOS, make_model, sample_gaussian
from .tglasso import BaseEstimatorConfig

log = logging.getLogger("mpgraph")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _manifest(command, config, inputs, seed, runtime):
    return {
        "command": command,
        "config": config,
        "inputs": inputs,
        "seed": seed,
        "version": __version__,
        "runtime_seconds": runtime,
    }


def _check_finite(X):
    bad = np.argwhere(~np.isfinite(X))
    if bad.size:
        r, c = bad[0]
        raise UsageError(f"non-finite value {X[r, c]} at row {r + 1}, column {c + 1}")


def _load(path, fmt):
    if not Path(path).is_file():
        raise UsageError(f"input file not found: {path}")
    try:
        X = parse_matrix(path, fmt)
    except MatrixParseError as exc:
        raise UsageError(str(exc)) from None
    _check_finite(X)
    return X


def _resolve_fit(args, N, M):
    if args.n is not None and args.n > N:
        raise UsageError(f"--n {args.n} exceeds the number of rows N={N}")
    if args.m is not None and args.m > M:
        raise UsageError(f"--m {args.m} exceeds the number of columns M={M}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        n, m = resolve_patch_size(N, M, n=args.n, m=args.m, m_frac=args.m_frac)
    for w in caught:
        log.warning("%s", w.message)
    return n, m


def cmd_fit(args):
    if args.replay:
        replay = json.loads(Path(args.replay).read_text())
        cfg = replay["config"]
        inp = replay["inputs"]["input"]
        args.input, args.format = inp["path"], inp["format"]
        args.n, args.m, args.K = cfg["n"], cfg["m"], cfg["K"]
        args.pi_thr, args.gamma = cfg["pi_thr"], cfg["gamma"]
        args.seed, args.workers = cfg["master_seed"], cfg["workers"]
    if args.input is None:
        raise UsageError("--input is required")
    if args.out is None:
        raise UsageError("--out is required")

    X = _load(args.input, args.format)
    N, M = X.shape
    if N < 2 or M < 2:
        raise UsageError(f"data must have at least 2 rows and 2 columns, got {N} x {M}")
    digest = file_digest(args.input)
    if args.replay and digest != inp.get("sha256"):
        log.warning("input digest differs from the manifest")
    n, m = _resolve_fit(args, N, M)
    try:
        config = MPGraphConfig(
            n=n, m=m, K=args.K, pi_thr=args.pi_thr,
            base=BaseEstimatorConfig(gamma=args.gamma),
            master_seed=args.seed, workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    if args.log:
        with open(out / "iterations.jsonl", "w") as fh:
            result = run_mpgraph(X, config, log=fh)
    else:
        result = run_mpgraph(X, config)
    runtime = time.perf_counter() - start

    write_edge_list(out / "edges.tsv", result.stable_edges, result.frequencies)
    if args.emit_frequencies:
        freq = result.frequencies
        write_matrix(out / "frequencies.f64bin", freq + freq.T, "f64bin")
    write_manifest(
        out / "manifest.json",
        _manifest(
            "fit",
            config.to_dict(),
            {"input": {"path": str(Path(args.input).resolve()), "format": args.format, "sha256": digest}},
            args.seed,
            runtime,
        ),
    )
    log.info("%d stable edges written to %s", len(result.stable_edges), out / "edges.tsv")
    return EXIT_OK


def cmd_simulate(args):
    try:
        model = make_model(args.scenario, args.M, args.seed)
        X = sample_gaussian(model, args.N, np.random.SeedSequence(args.seed, spawn_key=(1,)))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    data_name = "data.csv" if args.format == "csv" else "data.f64bin"
    write_matrix(out / data_name, X, args.format)
    write_edge_list(out / "truth_edges.tsv", model.edges)
    (out / "model.txt").write_text(model.to_text())
    write_manifest(
        out / "manifest.json",
        _manifest(
            "simulate",
            {"scenario": args.scenario, "M": args.M, "N": args.N, "format": args.format,
             "pd_repair_applied": model.pd_repair_applied},
            {},
            args.seed,
            time.perf_counter() - start,
        ),
    )
    return EXIT_OK


def _fmt(v):
    if isinstance(v, float):
        return "nan" if np.isnan(v) else f"{v:.6f}"
    return str(v)


def _write_table(path, header, rows):
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(_fmt(row[h]) for h in header))
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_benchmark(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = BaseEstimatorConfig(gamma=args.gamma)
    start = time.perf_counter()
    try:
        if args.curve:
            Ns = [int(v) for v in args.N_grid.split(",")] if args.N_grid else [args.N]
            Ms = [int(v) for v in args.M_grid.split(",")] if args.M_grid else [args.M]
            m_frac = 0.2 if args.m_frac is None else args.m_frac
            rows = recovery_curve(
                args.scenario, Ms, Ns, args.trials, m_frac=m_frac, n=args.n, m=args.m,
                K=args.K, pi_thr=args.pi_thr, base=base, seed=args.seed, workers=args.workers,
            )
            header = ["scenario", "M", "N", "trial_count", "recovery_rate", "failures"]
            _write_table(out / "curve.tsv", header, [r.__dict__ for r in rows])
            config = {"mode": "curve", "M": Ms, "N": Ns, "trials": args.trials,
                      "patch_sizes": {str(M): list(curve_patch_size(M, m_frac)) for M in Ms}}
        else:
            m_frac = DEFAULT_M_FRAC if args.m_frac is None else args.m_frac
            rows = run_benchmark(
                args.scenario, args.M, args.N, args.trials, n=args.n, m=args.m, m_frac=m_frac,
                K=args.K, pi_thr=args.pi_thr, base=base, seed=args.seed, workers=args.workers,
            )
            header = ["scenario", "M", "N", "trial", "selected", "tpr", "precision", "f1", "seconds"]
            _write_table(out / "report.tsv", header, [r.__dict__ for r in rows])
            n, m = resolve_patch_size(args.N, args.M, n=args.n, m=args.m, m_frac=m_frac)
            config = {"mode": "table", "scenario": args.scenario, "M": args.M, "N": args.N,
                      "trials": args.trials, "n": n, "m": m, "K": args.K,
                      "pi_thr": args.pi_thr, "gamma": args.gamma, "workers": args.workers}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    config["scenario"] = args.scenario
    write_manifest(out / "manifest.json",
                   _manifest("benchmark", config, {}, args.seed, time.perf_counter() - start))
    for row in rows:
        print("\t".join(_fmt(v) for v in row.__dict__.values()))
    return EXIT_OK


def _add_run_options(p):
    p.add_argument("--n", type=int, default=None, help="observations per minipatch")
    p.add_argument("--m", type=int, default=None, help="nodes per minipatch")
    p.add_argument("--pi-thr", type=float, default=0.5)
    p.add_argument("--K", type=int, default=1000, help="number of minipatches")
    p.add_argument("--gamma", type=float, default=0.5, help="eBIC weight")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="mpgraph", description="Gaussian graphical model selection with minipatch ensembles.")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="select a graph from a data matrix")
    p.add_argument("--input", default=None)
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--m-frac", type=float, default=DEFAULT_M_FRAC)
    _add_run_options(p)
    p.add_argument("--emit-frequencies", action="store_true",
                   help="also write the full frequency matrix (f64bin)")
    p.add_argument("--log", action="store_true", help="write a per-minipatch JSON-lines log")
    p.add_argument("--replay", default=None, metavar="MANIFEST",
                   help="rerun with the configuration recorded in a fit manifest")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", parents=[common], help="generate a ground-truth model and data")
    p.add_argument("--scenario", choices=SCENARIOS, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("benchmark", parents=[common], help="simulate, fit and score")
    p.add_argument("--scenario", choices=SCENARIOS, required=True)
    p.add_argument("--M", type=int, default=1000)
    p.add_argument("--N", type=int, default=500)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--m-frac", type=float, default=None,
                   help="node fraction (default 0.05, or 0.2 with --curve)")
    _add_run_options(p)
    p.add_argument("--curve", action="store_true", help="exact-recovery curve over --N-grid")
    p.add_argument("--N-grid", default=None, help="comma-separated N values for --curve")
    p.add_argument("--M-grid", default=None, help="comma-separated M values for --curve")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="mpgraph: %(message)s")
    if getattr(args, "out", "") is None and args.command == "benchmark":
        parser.error("--out is required")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mpgraph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"mpgraph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError, RuntimeError, ValueError) as exc:
        print(f"mpgraph: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
