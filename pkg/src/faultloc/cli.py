"""Command line entry point: ``faultloc <subcommand> ...``.

Exit status: 0 success, 1 usage error, 2 runtime failure.  Diagnostics go
to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io
from .errors import FaultLocError
from .faultsim import DEFAULT_GRID, DEFAULT_TRANSFERS, generate_dataset
from .impute import ImputerConfig, impute, mean_fill
from .localize import (
    Localizer,
    predict_failures,
    ranking,
    score_mse,
    score_r2,
    top_k_accuracy,
    train_localizer,
    write_rankings,
)
from .missing import MODES, MaskedMatrix, apply_mask, sample_mask
from .pipeline import ExperimentConfig, run_pipeline
from .regress import ExtraTrees, ForestParams, Knn, Lasso, Ols, Ridge
from .topology import PRESETS, Topology, build_preset, component_list, compute_routes, path_index

log = logging.getLogger("faultloc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _estimator(args):
    kind = args.estimator
    if kind == "ols":
        return Ols()
    if kind == "ridge":
        return Ridge(args.lam if args.lam is not None else 1.0)
    if kind == "lasso":
        return Lasso(args.lam if args.lam is not None else 1e-4)
    if kind == "knn":
        return Knn(args.k)
    if kind == "extratrees":
        return ExtraTrees(ForestParams(n_trees=args.trees), seed=args.seed)
    raise UsageError(f"unknown estimator {kind!r}")


def _load_topology(args) -> Topology:
    if getattr(args, "topology", None):
        return Topology.load(args.topology)
    return build_preset(args.preset, args.seed)


def cmd_topo(args):
    topo = _load_topology(args)
    if args.out:
        topo.save(args.out)
    comps = component_list(topo)
    summary = {
        "name": topo.name,
        "hosts": len(topo.hosts),
        "routers": len(topo.routers),
        "links": len(topo.links),
        "interfaces": topo.n_interfaces,
        "components": len(comps),
        "paths": len(path_index(topo)),
    }
    if args.components:
        summary["component_order"] = [c.label for c in comps]
    if args.routes:
        routes = compute_routes(topo)
        summary["routes"] = {
            f"{s}>{d}": [comps[c].label for c in routes[(s, d)].components]
            for s, d in path_index(topo).paths
        }
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_gen(args):
    topo = _load_topology(args)
    grid = [float(g) for g in args.grid.split(",")] if args.grid else list(DEFAULT_GRID)
    data = generate_dataset(topo, grid, args.transfers, args.rounds, args.seed)
    data.save(args.out)
    topo.save(f"{args.out}/topology.json")
    log.info("wrote %d samples x %d paths to %s", data.n_samples, data.X.shape[1], args.out)


def cmd_mask(args):
    X, header = io.read_matrix(args.input)
    if np.isnan(X).any():
        raise FaultLocError(f"{args.input} already has missing cells")
    mask = sample_mask(X.shape[0], X.shape[1], args.rate, args.mode, args.seed)
    io.write_matrix(args.out, apply_mask(X, mask).values, header)
    if args.mask_out:
        io.write_mask(args.mask_out, mask.observed, header)


def cmd_impute(args):
    values, header = io.read_matrix(args.input)
    masked = MaskedMatrix.from_values(values)
    if not masked.mask.missing.any():
        log.warning("%s has no missing cells; output equals input", args.input)
    if args.estimator == "mean":
        results = [mean_fill(masked)]
    else:
        clip = (0.0, 1.0) if args.clip else None
        results = []
        for i in range(args.n_imputations):
            est = _estimator(args)
            cfg = ImputerConfig(est, args.max_rounds, args.tolerance, args.seed + i,
                                args.initial_fill, clip)
            results.append(impute(masked, cfg))
    for i, res in enumerate(results):
        out = args.out if len(results) == 1 else _numbered(args.out, i)
        io.write_matrix(out, res.completed, header)
        if args.report:
            rep = args.report if len(results) == 1 else _numbered(args.report, i)
            res.save_report(rep)


def _numbered(path: str, i: int) -> str:
    stem, dot, ext = path.rpartition(".")
    return f"{stem}_{i}.{ext}" if dot else f"{path}_{i}"


def cmd_train(args):
    X, paths = io.read_matrix(args.features)
    Y, comps = io.read_matrix(args.labels)
    loc = train_localizer(X, Y, _estimator(args), args.degree, comps, paths)
    loc.save(args.out)


def cmd_eval(args):
    loc = Localizer.load(args.model)
    X, _ = io.read_matrix(args.features)
    Y, _ = io.read_matrix(args.labels)
    Yh = predict_failures(loc, X)
    order = ranking(Yh)
    truth = np.argmax(Y, axis=1)
    metrics = {"mse": score_mse(Yh, Y)}
    try:
        metrics["r2"] = score_r2(Yh, Y)
    except ValueError as exc:
        log.warning("%s", exc)
    for k in range(1, min(args.k, Y.shape[1]) + 1):
        metrics[f"top{k}"] = top_k_accuracy(order, truth, k)
    if args.rankings:
        write_rankings(args.rankings, Yh, loc.component_labels, k=args.k)
    text = json.dumps(metrics, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def cmd_pipeline(args):
    config = ExperimentConfig.load(args.config)
    report = run_pipeline(config, args.out)
    failed = sum(r["status"] != "ok" for r in report.records)
    log.info("%d combinations, %d failed", len(report.records), failed)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="faultloc", description="Fault localization from path failure rates.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def topo_args(sp):
        sp.add_argument("--preset", choices=PRESETS, default="internet2-like")
        sp.add_argument("--topology", help="topology JSON file (overrides --preset)")
        sp.add_argument("--seed", type=int, default=0)

    def est_args(sp, choices, default):
        sp.add_argument("--estimator", "--predictor", dest="estimator", choices=choices,
                        default=default)
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--k", type=int, default=5, help="neighbors for knn")
        sp.add_argument("--trees", type=int, default=100, help="trees for extratrees")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("topo", help="describe or export a topology")
    topo_args(sp)
    sp.add_argument("--out", help="write topology JSON here")
    sp.add_argument("--components", action="store_true", help="list component order")
    sp.add_argument("--routes", action="store_true", help="list simulator routes")
    sp.set_defaults(func=cmd_topo)

    sp = sub.add_parser("gen", help="generate a labeled dataset")
    topo_args(sp)
    sp.add_argument("--grid", help="comma separated error probabilities")
    sp.add_argument("--transfers", type=int, default=DEFAULT_TRANSFERS)
    sp.add_argument("--rounds", type=int, default=1)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("mask", help="blank out cells of a feature CSV")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--rate", type=float, required=True)
    sp.add_argument("--mode", choices=MODES, default="mcar-cell")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--mask-out", help="also write the 0/1 mask")
    sp.set_defaults(func=cmd_mask)

    sp = sub.add_parser("impute", help="fill missing cells of a feature CSV")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)
    est_args(sp, ("lasso", "ridge", "knn", "extratrees", "mean"), "lasso")
    sp.add_argument("--max-rounds", type=int, default=10)
    sp.add_argument("--tolerance", type=float, default=1e-3)
    sp.add_argument("--initial-fill", choices=("column-mean", "zero"), default="column-mean")
    sp.add_argument("--clip", action="store_true", help="clamp imputed values to [0, 1]")
    sp.add_argument("--n-imputations", type=int, default=1,
                    help="repeat with seeds seed, seed+1, ...; outputs get a _i suffix")
    sp.add_argument("--report", help="JSON convergence report")
    sp.set_defaults(func=cmd_impute)

    sp = sub.add_parser("train", help="train a localizer")
    sp.add_argument("--features", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--degree", type=int, default=1)
    sp.add_argument("--out", required=True, help="model JSON")
    est_args(sp, ("ridge", "lasso", "ols", "knn", "extratrees"), "ridge")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="score a localizer on labeled data")
    sp.add_argument("--model", required=True)
    sp.add_argument("--features", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--k", type=int, default=4, help="largest top-k to report")
    sp.add_argument("--rankings", help="write ranked components CSV")
    sp.add_argument("--out", help="also write metrics JSON here")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("pipeline", help="run a full experiment sweep")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", help="output directory (overrides the config)")
    sp.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"faultloc: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command == "train" and args.degree not in (1, 2):
        print("faultloc: error: --degree must be 1 or 2", file=sys.stderr)
        return 1
    try:
        args.func(args)
    except UsageError as exc:
        print(f"faultloc: error: {exc}", file=sys.stderr)
        return 1
    except (FaultLocError, ValueError, OSError) as exc:
        print(f"faultloc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
