"""End-to-end experiment: generate, split, mask, impute, localize, score.

Every (missing rate, imputer, predictor) combination yields exactly one
report record, whether it succeeded or failed.  Seeds for masks are derived
from the configured mask seed, the rate value and the split side, so
combinations can be re-run in isolation with identical results.  Wall
times go to ``timings.json`` and never into the report itself, which keeps
reports byte-identical across runs.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import ConfigError
from .faultsim import DEFAULT_GRID, DEFAULT_TRANSFERS, Dataset, generate_dataset
from .impute import ImputerConfig, imputation_rmse, impute
from .localize import (
    predict_failures,
    ranking,
    score_mse,
    score_r2,
    top_k_accuracy,
    train_localizer,
    write_rankings,
)
from .missing import MODES, MaskedMatrix, apply_mask, sample_mask
from .regress import estimator_from_dict
from .topology import Topology, build_preset

log = logging.getLogger(__name__)

TOP_K = (1, 2, 3, 4)


def _default_imputers():
    return [{"kind": "lasso", "lambda": 1e-4}]


def _default_predictors():
    return [
        {"kind": "ridge", "lambda": 0.1},
        {"kind": "ridge", "lambda": 0.01},
        {"kind": "lasso", "lambda": 1e-6},
        {"kind": "extratrees"},
    ]


@dataclass
class ExperimentConfig:
    """All knobs of one sweep.  ``from_dict`` accepts the JSON keys below."""

    topology: dict = field(default_factory=lambda: {"preset": "internet2-like", "seed": 7})
    seed: int = 7
    error_grid: list = field(default_factory=lambda: list(DEFAULT_GRID))
    transfers_per_pair: int = DEFAULT_TRANSFERS
    rounds_per_cell: int = 1
    train_fraction: float = 0.7
    split_seed: int = 0
    missing_rates: list = field(default_factory=lambda: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    mask_mode: str = "mcar-cell"
    mask_seed: int = 0
    imputers: list = field(default_factory=_default_imputers)
    imputer_settings: dict = field(default_factory=dict)
    predictors: list = field(default_factory=_default_predictors)
    degree: int = 1
    transductive: bool = False
    write_intermediates: bool = True
    output_dir: str = "results"

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if not self.missing_rates or not self.imputers or not self.predictors:
            raise ConfigError("missing_rates, imputers and predictors must be nonempty")
        if any(not 0.0 <= r < 1.0 for r in self.missing_rates):
            raise ConfigError("missing rates must lie in [0, 1)")
        if self.mask_mode not in MODES:
            raise ConfigError(f"mask_mode must be one of {MODES}")
        if self.degree not in (1, 2):
            raise ConfigError("degree must be 1 or 2")
        try:
            for spec in self.imputers + self.predictors:
                estimator_from_dict(spec)
            self.imputer_config(self.imputers[0])
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return asdict(self)

    def imputer_config(self, spec: dict) -> ImputerConfig:
        s = dict(self.imputer_settings)
        if "clip" in s and s["clip"] is not None:
            s["clip"] = tuple(s["clip"])
        return ImputerConfig(estimator=estimator_from_dict(spec), **s)


def build_topology(spec: dict) -> Topology:
    if "file" in spec:
        return Topology.load(spec["file"])
    return build_preset(spec.get("preset", "internet2-like"), spec.get("seed", 0),
                        spec.get("params"))


def split_rows(n: int, train_fraction: float, seed: int):
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    n_train = min(max(int(round(train_fraction * n)), 1), n - 1)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def mask_seed(base: int, rate: float, side: int) -> int:
    ss = np.random.SeedSequence([int(base), int(round(rate * 1_000_000)), side])
    return int(ss.generate_state(1, np.uint64)[0])


def _label(spec: dict) -> str:
    return spec.get("label") or estimator_from_dict(spec).label


@dataclass
class EvalReport:
    records: list
    config: dict

    def find(self, rate, imputer, predictor) -> dict:
        for rec in self.records:
            if rec["rate"] == rate and rec["imputer"] == imputer and rec["predictor"] == predictor:
                return rec
        raise KeyError((rate, imputer, predictor))

    def to_json(self) -> str:
        return json.dumps({"config": self.config, "records": self.records},
                          indent=2, sort_keys=True) + "\n"

    def long_rows(self):
        for rec in self.records:
            for name, value in sorted(rec["metrics"].items()):
                if value is not None:
                    yield [io.format_value(rec["rate"]), rec["imputer"], rec["predictor"],
                           name, io.format_value(value)]

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.json").write_text(self.to_json(), encoding="utf-8")
        with open(d / "report.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rate", "imputer", "predictor", "metric", "value"])
            w.writerows(self.long_rows())

    @classmethod
    def load(cls, path) -> "EvalReport":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(doc["records"], doc["config"])


def _impute_side(masked: MaskedMatrix, cfg: ImputerConfig):
    if not masked.mask.missing.any():
        return masked.values.copy()
    return impute(masked, cfg).completed


def _metrics(loc, X_test, test: Dataset) -> dict:
    Yh = predict_failures(loc, X_test)
    order = ranking(Yh)
    truth = test.true_components()
    out = {"r2": score_r2(Yh, test.Y), "mse": score_mse(Yh, test.Y)}
    for k in TOP_K:
        out[f"top{k}"] = top_k_accuracy(order, truth, k)
    return out, Yh


def run_pipeline(config: ExperimentConfig, output_dir=None) -> EvalReport:
    out = Path(output_dir or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    inter = out / "intermediate"
    timings = []

    topo = build_topology(config.topology)
    data = generate_dataset(topo, config.error_grid, config.transfers_per_pair,
                            config.rounds_per_cell, config.seed)
    train_idx, test_idx = split_rows(data.n_samples, config.train_fraction, config.split_seed)
    train, test = data.subset(train_idx), data.subset(test_idx)
    if config.write_intermediates:
        data.save(out / "dataset")
        topo.save(out / "dataset" / "topology.json")
        (out / "dataset" / "split.json").write_text(
            json.dumps({"train": train_idx.tolist(), "test": test_idx.tolist()}) + "\n",
            encoding="utf-8",
        )

    records = []
    for rate in config.missing_rates:
        rate = float(rate)
        masks = [sample_mask(*side.X.shape, rate, config.mask_mode, mask_seed(config.mask_seed, rate, k))
                 for k, side in enumerate((train, test))]
        masked = [apply_mask(side.X, m) for side, m in zip((train, test), masks)]
        tag = f"r{io.format_value(rate)}"
        if config.write_intermediates:
            inter.mkdir(parents=True, exist_ok=True)
            io.write_matrix(inter / f"{tag}_train_masked.csv", masked[0].values, data.path_labels)
            io.write_matrix(inter / f"{tag}_test_masked.csv", masked[1].values, data.path_labels)

        for ispec in config.imputers:
            ilabel = _label(ispec)
            t0 = time.perf_counter()
            error, completed, imp_metrics = None, None, {}
            try:
                cfg = config.imputer_config(ispec)
                if config.transductive:
                    joint = MaskedMatrix.from_values(np.vstack([m.values for m in masked]))
                    full = _impute_side(joint, cfg)
                    completed = [full[:len(train_idx)], full[len(train_idx):]]
                else:
                    completed = [_impute_side(m, cfg) for m in masked]
                for name, side, m, comp in zip(("train", "test"), (train, test), masks, completed):
                    imp_metrics[f"imputation_rmse_{name}"] = (
                        imputation_rmse(side.X, comp, m) if m.n_missing else None
                    )
                if config.write_intermediates:
                    safe = ilabel.replace("(", "_").replace(")", "")
                    io.write_matrix(inter / f"{tag}_{safe}_train_imputed.csv", completed[0],
                                    data.path_labels)
                    io.write_matrix(inter / f"{tag}_{safe}_test_imputed.csv", completed[1],
                                    data.path_labels)
            except Exception as exc:  # recorded, sweep continues
                error = f"imputation failed: {type(exc).__name__}: {exc}"
                log.error("rate %s imputer %s: %s", rate, ilabel, error)
            timings.append({"rate": rate, "imputer": ilabel, "stage": "impute",
                            "seconds": time.perf_counter() - t0})

            for pspec in config.predictors:
                plabel = _label(pspec)
                rec = {"rate": rate, "imputer": ilabel, "predictor": plabel,
                       "status": "ok", "error": None, "metrics": dict(imp_metrics)}
                t0 = time.perf_counter()
                if error is not None:
                    rec["status"], rec["error"] = "failed", error
                else:
                    try:
                        loc = train_localizer(completed[0], train.Y, estimator_from_dict(pspec),
                                              config.degree, data.component_labels,
                                              data.path_labels)
                        metrics, Yh = _metrics(loc, completed[1], test)
                        rec["metrics"].update(metrics)
                        if config.write_intermediates:
                            safe = f"{ilabel}_{plabel}".replace("(", "_").replace(")", "")
                            write_rankings(inter / f"{tag}_{safe}_rankings.csv", Yh,
                                           data.component_labels, k=max(TOP_K))
                    except Exception as exc:  # recorded, sweep continues
                        rec["status"] = "failed"
                        rec["error"] = f"{type(exc).__name__}: {exc}"
                        log.error("rate %s %s + %s: %s", rate, ilabel, plabel, rec["error"])
                timings.append({"rate": rate, "imputer": ilabel, "predictor": plabel,
                                "stage": "localize", "seconds": time.perf_counter() - t0})
                records.append(rec)

    report = EvalReport(records, config.to_dict())
    report.save(out)
    (out / "timings.json").write_text(json.dumps(timings, indent=2) + "\n", encoding="utf-8")
    return report
