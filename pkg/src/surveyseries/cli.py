"""Command-line interface.

Subcommands::

    surveyseries estimate  --input survey.csv --out-coeffs fit.json --out-density grid.csv
    surveyseries eval      --coeffs fit.json (--at U ... | --grid G)
    surveyseries benchmark --config study.json --out-csv mise.csv
    surveyseries theory    --k 1 --Q 1 --b 2 --N 1000
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace

import numpy as np

from .basis import DomainError, fit_scaling
from .design import WeightedSample
from .estimator import (
    ProjectionError,
    design_variance_hat,
    fit,
    project_to_density,
    unit_grid,
)
from .export import (
    ExportError,
    SurveyCSVError,
    evaluate_projected,
    read_export,
    read_survey_csv,
    write_export,
)
from .harness import StudyFailure, load_config, run_study
from .theory import SobolevParams, H1, H2, pinsker_constant, theory_table

log = logging.getLogger("surveyseries")


def _pop_size(text: str) -> str | int:
    if text == "sum-weights":
        return text
    try:
        N = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'sum-weights'") from None
    if N < 1:
        raise argparse.ArgumentTypeError("population size must be positive")
    return N


def _delta(text: str) -> str | float:
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a number or 'auto'") from None


def _unit(text: str) -> float:
    u = float(text)
    if not 0.0 <= u <= 1.0:
        raise argparse.ArgumentTypeError("u must lie in [0, 1]")
    return u


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surveyseries",
        description="Cosine-series density estimation for complex survey samples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="fit a density to weighted survey data")
    p.add_argument("--input", required=True, help="CSV with columns x[, weight][, stratum]")
    p.add_argument("--pop-size", type=_pop_size, default="sum-weights",
                   help="population size N, or 'sum-weights' for round(sum of weights)")
    p.add_argument("--method", choices=("truncated", "smoothed", "iid-baseline"),
                   default="truncated")
    p.add_argument("--delta", type=_delta, default="auto",
                   help="design delta, or 'auto' for -1/n")
    p.add_argument("--grid", type=int, default=1024, help="grid points for projection/output")
    p.add_argument("--margin", type=float, default=0.01,
                   help="fraction of the data range added on each side when scaling")
    p.add_argument("--out-coeffs", required=True, help="coefficient export (JSON)")
    p.add_argument("--out-density", help="density grid (CSV)")

    p = sub.add_parser("eval", help="evaluate a coefficient export")
    p.add_argument("--coeffs", required=True)
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--at", type=_unit, nargs="+", metavar="U")
    where.add_argument("--grid", type=int, metavar="G")
    p.add_argument("--raw", action="store_true", help="skip the projection onto densities")
    p.add_argument("--out", help="write CSV here instead of stdout")

    p = sub.add_parser("benchmark", help="run a Monte Carlo MISE study")
    p.add_argument("--config", required=True, help="study configuration (JSON)")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-json", help="provenance sidecar (JSON)")
    p.add_argument("--seed", type=int, help="override the configured master seed")
    p.add_argument("--workers", type=int, help="override the configured worker count")

    p = sub.add_parser("theory", help="print theoretical rates and constants")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--Q", type=float, default=1.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--N", type=int, nargs="+", default=[1000])
    return parser


def cmd_estimate(args) -> int:
    x, w, strata = read_survey_csv(args.input)
    n = x.size
    N = int(round(w.sum())) if args.pop_size == "sum-weights" else args.pop_size
    delta = -1.0 / n if args.delta == "auto" else args.delta
    sample = WeightedSample(x, w, N, delta, strata=strata)
    scaling = fit_scaling(x, margin=args.margin)
    est = fit(args.method, sample, scaling)
    proj = project_to_density(est, args.grid)
    write_export(args.out_coeffs, est, proj)
    log.info("fitted %s estimate: n=%d N=%d delta=%.6g J=%d c=%.6g",
             args.method, n, N, delta, est.J, proj.c)
    if args.out_density:
        grid = proj.grid
        sd = np.sqrt(np.maximum(0.0, design_variance_hat(est, grid)))
        xs = scaling.inverse(grid)
        with open(args.out_density, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["u", "x", "density", "density_x", "design_sd"])
            for row in zip(grid, xs, proj.values, proj.values / scaling.width, sd):
                out.writerow([repr(float(v)) for v in row])
    return 0


def cmd_eval(args) -> int:
    est, c = read_export(args.coeffs)
    if args.raw:
        c = None
    u = np.asarray(args.at, dtype=float) if args.at is not None else unit_grid(args.grid)
    values = np.atleast_1d(evaluate_projected(est, c, u))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["u", "x", "density"])
        for ui, xi, vi in zip(u, np.atleast_1d(est.scaling.inverse(u)), values):
            out.writerow([repr(float(ui)), repr(float(xi)), repr(float(vi))])
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_benchmark(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    log.info("running study %s (seed %d, %d x %d replicates, n in %s)",
             cfg.config_hash()[:12], cfg.seed, cfg.m1, cfg.m2, list(cfg.sample_sizes))
    report = run_study(cfg)
    report.write(args.out_csv, args.out_json)
    log.info("wrote %s", args.out_csv)
    return 0


def cmd_theory(args) -> int:
    p = SobolevParams(k=args.k, Q=args.Q, b=args.b, c=args.c)
    print(f"# k={p.k:g} Q={p.Q:g} b={p.b:g} c={p.c:g}")
    print(f"# P(k,Q,b) = {pinsker_constant(p):.6e}  H1 = {H1(p):.6e}  H2 = {H2(p):.6e}")
    print("N,minimax_lower_bound,optimal_J,mise_min")
    for row in theory_table(p, args.N):
        print(f"{row['N']},{row['minimax_lower_bound']:.6e},"
              f"{row['optimal_J']:.6f},{row['mise_min']:.6e}")
    return 0


COMMANDS = {
    "estimate": cmd_estimate,
    "eval": cmd_eval,
    "benchmark": cmd_benchmark,
    "theory": cmd_theory,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, SurveyCSVError, ExportError, DomainError,
            ProjectionError, StudyFailure, KeyError) as exc:
        print(f"surveyseries {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
