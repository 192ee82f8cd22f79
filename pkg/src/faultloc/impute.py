"""Round-robin multivariate imputation and a column-mean baseline.

Each incomplete column is regressed on every other column (using the
current filled-in values), restricted to the rows where that column is
observed, and the fitted model overwrites the column's missing cells.
Columns are visited by ascending number of missing cells; rounds repeat
until the largest change of any imputed cell drops below the tolerance.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ImputationError
from .missing import Mask, MaskedMatrix
from .regress import Lasso

log = logging.getLogger(__name__)

INITIAL_FILLS = ("column-mean", "zero")


@dataclass(frozen=True)
class ImputerConfig:
    estimator: object = field(default_factory=lambda: Lasso(1e-4))
    max_rounds: int = 10
    tolerance: float = 1e-3
    seed: int = 0
    initial_fill: str = "column-mean"
    clip: tuple[float, float] | None = None
    # reuse last round's coefficients as the starting point of iterative fits
    warm_start: bool = True

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.initial_fill not in INITIAL_FILLS:
            raise ValueError(f"initial_fill must be one of {INITIAL_FILLS}")


@dataclass
class ImputationResult:
    completed: np.ndarray
    rounds_used: int = 0
    converged: bool = True
    trace: list[float] = field(default_factory=list)

    def report(self) -> dict:
        return {"rounds_used": self.rounds_used, "converged": self.converged,
                "max_change_per_round": self.trace}

    def save_report(self, path) -> None:
        Path(path).write_text(json.dumps(self.report(), indent=2) + "\n", encoding="utf-8")


def _check(masked: MaskedMatrix):
    values = np.asarray(masked.values, dtype=float)
    observed = np.asarray(masked.mask.observed, dtype=bool)
    if values.ndim != 2 or values.shape != observed.shape:
        raise ImputationError("values and mask shapes differ")
    if not observed.any():
        raise ImputationError("matrix has no observed cells")
    if not np.isfinite(values[observed]).all():
        raise ImputationError("observed cells must be finite")
    return values, observed


def _column_means(values, observed):
    global_mean = values[observed].mean()
    counts = observed.sum(axis=0)
    sums = np.where(observed, values, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = sums / counts
    return np.where(counts > 0, means, global_mean)


def mean_fill(masked: MaskedMatrix) -> ImputationResult:
    values, observed = _check(masked)
    out = np.where(observed, values, _column_means(values, observed))
    return ImputationResult(out, rounds_used=1 if (~observed).any() else 0)


def _estimator_for(config: ImputerConfig, rnd: int, col: int):
    est = config.estimator
    if hasattr(est, "seed"):
        derived = np.random.SeedSequence([config.seed, rnd, col]).generate_state(1)[0]
        est = dataclasses.replace(est, seed=int(derived))
    return est


def impute(masked: MaskedMatrix, config: ImputerConfig | None = None) -> ImputationResult:
    config = config or ImputerConfig()
    values, observed = _check(masked)
    n, d = values.shape
    if n < 2 or d < 2:
        raise ImputationError("need at least 2 rows and 2 columns")
    missing = ~observed
    if not missing.any():
        return ImputationResult(values.copy(), 0, True, [])

    counts = observed.sum(axis=0)
    fill = _column_means(values, observed)
    if config.initial_fill == "zero":
        fill = np.where(counts > 0, 0.0, fill)
    X = np.where(observed, values, fill)

    n_missing = missing.sum(axis=0)
    order = sorted((c for c in range(d) if n_missing[c] > 0 and counts[c] > 0),
                   key=lambda c: (n_missing[c], c))
    skipped = [c for c in range(d) if counts[c] == 0]
    if skipped:
        log.warning("%d fully missing column(s) keep the global mean: %s", len(skipped), skipped)

    coefs = {}
    trace = []
    converged = False
    rounds = 0
    for rnd in range(config.max_rounds):
        before = X[missing].copy()
        for col in order:
            rows = observed[:, col]
            others = np.delete(X, col, axis=1)
            est = _estimator_for(config, rnd, col)
            try:
                model = est.fit(others[rows], X[rows, col],
                                warm_start=coefs.get(col) if config.warm_start else None)
                pred = model.predict(others[~rows])
            except Exception as exc:
                raise ImputationError(f"column {col}: {exc}") from exc
            if hasattr(model, "weights"):
                coefs[col] = model.weights
            if config.clip is not None:
                pred = np.clip(pred, *config.clip)
            X[~rows, col] = pred
        rounds = rnd + 1
        change = float(np.max(np.abs(X[missing] - before))) if order else 0.0
        trace.append(change)
        if change < config.tolerance:
            converged = True
            break
    # observed cells are restored verbatim
    X[observed] = values[observed]
    return ImputationResult(X, rounds, converged, trace)


def imputation_rmse(original, result, mask: Mask) -> float:
    """RMSE over the cells the mask marks as missing."""
    original = np.asarray(original, dtype=float)
    completed = result.completed if isinstance(result, ImputationResult) else np.asarray(result)
    missing = mask.missing
    if original.shape != completed.shape or original.shape != missing.shape:
        raise ImputationError("original, completed and mask shapes differ")
    if not missing.any():
        raise ImputationError("RMSE is undefined when no cell is missing")
    diff = original[missing] - completed[missing]
    return float(np.sqrt(np.mean(diff ** 2)))
