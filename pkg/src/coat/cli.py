"""Command line interface: ``coat estimate|simulate|roc|stability``.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import re
import sys
import time
from pathlib import Path


from . import io as cio
from .compositional import clr
from .errors import CoatError
from .estimator import ThresholdRule, coat, min_eigenvalue
from .parallel import default_threads, rng_for
from .selection import DEFAULT_FOLDS, DEFAULT_GRID_SIZE, cross_validate_scores
from .simulation import (
    METHODS,
    SimConfig,
    TRANSFORMS,
    auc,
    bases_to_composition,
    generate_omega0,
    roc_curve,
    run_simulation,
    sample_bases,
    spurious_correlation_study,
)
from .stability import bootstrap_stability, edge_sign_split, export_network

RULE_CHOICES = ("hard", "soft", "al")


def _positive_int(value):
    v = int(value)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return v


def _nonneg_int(value):
    v = int(value)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return v


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker threads (default: $COAT_THREADS or 1)")
    p.add_argument("--out", type=Path, required=True, help="output directory")


def _add_rule(p, default):
    p.add_argument("--rule", choices=RULE_CHOICES, default=default)
    p.add_argument("--eta", type=float, default=None, help="adaptive lasso exponent (>= 1, rule al only)")
    p.add_argument("--preserve-diagonal", action="store_true", help="do not threshold diagonal entries")


def _add_input(p):
    p.add_argument("--input", type=Path, required=True, help="sample x taxon count table (CSV/TSV)")
    p.add_argument("--min-prevalence", type=_nonneg_int, default=0)
    p.add_argument("--pseudo", type=float, default=cio.PSEUDO_COUNT, help="zero replacement value")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="CV-tuned COAT estimate from a count table")
    _add_input(p)
    _add_rule(p, "hard")
    p.add_argument("--folds", type=_positive_int, default=DEFAULT_FOLDS)
    p.add_argument("--pd", action="store_true", help="restrict to positive definite estimates")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid-size", type=_positive_int, default=None,
                   help=f"lambda grid points including 0 (default {DEFAULT_GRID_SIZE})")
    g.add_argument("--lambda", dest="lam", type=float, default=None, help="fixed lambda, skips CV")
    p.add_argument("--record-runtime", action="store_true", help="add wall time to report.json")
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of the four estimators")
    p.add_argument("--model", choices=("1", "2"), default="2")
    p.add_argument("--dist", choices=("normal", "gamma"), default="normal")
    p.add_argument("--n", type=_positive_int, default=100)
    p.add_argument("--p", type=_positive_int, default=50)
    p.add_argument("--reps", type=_positive_int, default=1)
    p.add_argument("--folds", type=_positive_int, default=DEFAULT_FOLDS)
    p.add_argument("--preserve-diagonal", action="store_true")
    _add_common(p)

    p = sub.add_parser("roc", help="support-recovery ROC curves on simulated data")
    p.add_argument("--model", choices=("1", "2"), default="2")
    p.add_argument("--dist", choices=("normal", "gamma"), default="normal")
    p.add_argument("--n", type=_positive_int, default=100)
    p.add_argument("--p", type=_positive_int, default=50)
    p.add_argument("--rule", choices=RULE_CHOICES, default="hard")
    p.add_argument("--eta", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("stability", help="bootstrap stability of the COAT network")
    _add_input(p)
    _add_rule(p, "soft")
    p.add_argument("--groups", type=Path, default=None, help="sample_id,group file; one network per group")
    p.add_argument("--folds", type=_positive_int, default=DEFAULT_FOLDS)
    p.add_argument("--boot", type=_positive_int, default=100)
    p.add_argument("--retain", type=_nonneg_int, default=80)
    p.add_argument("--grid-size", type=_positive_int, default=DEFAULT_GRID_SIZE)
    p.add_argument("--fixed-lambda", action="store_true", help="reuse the base lambda in every replicate")
    p.add_argument("--no-pd", action="store_true", help="drop the positive definiteness constraint")
    _add_common(p)
    return parser


def _rule(args, parser) -> ThresholdRule:
    if args.eta is not None and args.rule != "al":
        parser.error("--eta only applies to --rule al")
    return ThresholdRule(args.rule, 1.0 if args.eta is None else args.eta)


def cmd_estimate(args, parser) -> None:
    rule = _rule(args, parser)
    if args.lam is not None and args.pd:
        parser.error("--lambda and --pd are mutually exclusive")
    if args.lam is not None and args.lam < 0:
        parser.error("--lambda must be nonnegative")
    start = time.perf_counter()
    x = cio.ingest_counts(args.input, args.min_prevalence, args.pseudo)
    args.out.mkdir(parents=True, exist_ok=True)
    report = {
        "n": x.n,
        "p": x.p,
        "rule": rule.kind,
        "eta": rule.eta,
        "folds": args.folds,
        "seed": args.seed,
        "preserve_diagonal": args.preserve_diagonal,
    }
    if args.lam is None:
        size = DEFAULT_GRID_SIZE if args.grid_size is None else args.grid_size
        cv = cross_validate_scores(
            clr(x), folds=args.folds, rule=rule, seed=args.seed,
            preserve_diagonal=args.preserve_diagonal, pd=args.pd, grid_size=size,
        )
        lam = cv.chosen_lambda
        cio.write_csv(args.out / "cv_curve.csv", ("lambda", "cv_error"), zip(cv.grid, cv.errors))
        report.update(grid_size=len(cv.grid), pd=args.pd, pd_unattained=cv.pd_unattained)
    else:
        lam = float(args.lam)
        cio.write_csv(args.out / "cv_curve.csv", ("lambda", "cv_error"), [])
        report.update(grid_size=0, pd=False, pd_unattained=False)
    est = coat(x, lam, rule, preserve_diagonal=args.preserve_diagonal)
    cio.write_matrix(args.out / "omega_hat.csv", est.omega_hat.values, x.taxon_ids)
    report.update(
        chosen_lambda=lam,
        min_eigenvalue=min_eigenvalue(est.omega_hat.values),
        nnz_offdiag=est.nnz_offdiag,
    )
    if args.record_runtime:
        report["runtime_seconds"] = time.perf_counter() - start
    cio.write_json(args.out / "report.json", report)


def cmd_simulate(args, parser) -> None:
    config = SimConfig(args.model, args.dist, args.n, args.p, args.seed, args.reps)
    args.out.mkdir(parents=True, exist_ok=True)
    result = run_simulation(config, folds=args.folds, threads=args.threads,
                            preserve_diagonal=args.preserve_diagonal)
    cio.write_matrix(args.out / "omega0.csv", result.omega0.values, [f"T{j}" for j in range(args.p)])
    cio.write_csv(args.out / "results.csv", ("rep", "method", "rule", "metric", "value"), result.rows)
    cio.write_csv(args.out / "lambdas.csv", ("rep", "method", "rule", "lambda"), result.lambdas)
    cio.write_csv(args.out / "summary.csv", ("method", "rule", "metric", "mean", "se"), result.summary())
    if config.model == "identity":
        study = spurious_correlation_study(config)
        cio.write_csv(
            args.out / "spurious.csv", ("transform", "correlation"),
            ((t, float(v)) for t in TRANSFORMS for v in study["samples"][t]),
        )
        keys = ("min", "q25", "median", "q75", "max", "mean")
        cio.write_csv(
            args.out / "spurious_summary.csv", ("transform", *keys),
            ((t, *(study["summary"][t][k] for k in keys)) for t in TRANSFORMS),
        )


def cmd_roc(args, parser) -> None:
    rule = _rule(args, parser)
    config = SimConfig(args.model, args.dist, args.n, args.p, args.seed, 1)
    args.out.mkdir(parents=True, exist_ok=True)
    omega0 = generate_omega0(config.model, config.p, config.seed).values
    y = sample_bases(config.n, None, omega0, config.dist, rng_for(config.seed, 1, 0))
    x = bases_to_composition(y)
    rows, areas = [], []
    for method in METHODS:
        pts = roc_curve(y if method == "oracle" else x, omega0, rule, method=method)
        rows.extend((method, pt.lam, pt.fpr, pt.tpr) for pt in pts)
        areas.append((method, auc(pts)))
    cio.write_csv(args.out / "roc.csv", ("method", "lambda", "fpr", "tpr"), rows)
    cio.write_csv(args.out / "auc.csv", ("method", "auc"), areas)


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name) or "group"


def cmd_stability(args, parser) -> None:
    rule = _rule(args, parser)
    if args.retain > args.boot:
        parser.error(f"--retain ({args.retain}) cannot exceed --boot ({args.boot})")
    table = cio.read_counts(args.input)
    if args.groups is None:
        groups = {"": list(table.sample_ids)}
    else:
        groups = cio.read_groups(args.groups)
    args.out.mkdir(parents=True, exist_ok=True)
    summary = []
    for name, samples in groups.items():
        x = cio.counts_to_composition(table.subset(samples), args.min_prevalence, args.pseudo)
        net = bootstrap_stability(
            x, rule=rule, folds=args.folds, B=args.boot, retain=args.retain, seed=args.seed,
            pd=not args.no_pd, fixed_lambda=args.fixed_lambda,
            preserve_diagonal=args.preserve_diagonal, grid_size=args.grid_size, threads=args.threads,
        )
        stem = "network" if name == "" else f"network_{_safe_name(name)}"
        (args.out / f"{stem}.csv").write_bytes(export_network(net, "edge_csv"))
        (args.out / f"{stem}.json").write_bytes(export_network(net, "json"))
        pos, neg = edge_sign_split(net)
        summary.append((name, x.n, x.p, len(net.edges), len(net.retained), pos, neg,
                        "" if net.stability is None else net.stability))
    cio.write_csv(
        args.out / "stability_summary.csv",
        ("group", "n", "p", "edges", "retained", "positive", "negative", "stability"),
        summary,
    )


COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "roc": cmd_roc,
    "stability": cmd_stability,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is None:
        args.threads = default_threads()
    try:
        COMMANDS[args.command](args, parser)
    except CoatError as exc:
        print(f"coat {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
