"""Multi-output failure localization from path failure rates.

One regression output per component maps the (optionally polynomial)
path-rate vector to that component's failure probability.  For the
linear kinds the outputs share a design matrix and are solved in one call;
the objective separates by output, so this is the same as fitting them one
at a time.  Components are ranked by descending predicted probability,
ties going to the lower component index.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, FaultLocError
from .io import format_value
from .regress import estimator_from_dict, model_from_dict, polynomial_features


@dataclass
class Localizer:
    estimator: object
    model: object
    degree: int
    component_labels: list[str]
    path_labels: list[str]

    @property
    def n_components(self) -> int:
        return len(self.component_labels)

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator.to_dict(),
            "degree": self.degree,
            "components": list(self.component_labels),
            "paths": list(self.path_labels),
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Localizer":
        return cls(estimator_from_dict(doc["estimator"]), model_from_dict(doc["model"]),
                   int(doc["degree"]), list(doc["components"]), list(doc["paths"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Localizer":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_localizer(X, Y, estimator, degree: int = 1, component_labels=None,
                    path_labels=None) -> Localizer:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.ndim != 2:
        raise DimensionError("X and Y must be 2-D")
    if X.shape[0] != Y.shape[0]:
        raise DimensionError(f"X has {X.shape[0]} rows, Y has {Y.shape[0]}")
    if np.isnan(X).any():
        raise FaultLocError("features contain missing values; impute them first")
    component_labels = list(component_labels or [f"c{j}" for j in range(Y.shape[1])])
    path_labels = list(path_labels or [f"p{j}" for j in range(X.shape[1])])
    if len(component_labels) != Y.shape[1] or len(path_labels) != X.shape[1]:
        raise DimensionError("label lists do not match matrix shapes")
    model = estimator.fit(polynomial_features(X, degree), Y)
    return Localizer(estimator, model, degree, component_labels, path_labels)


def predict_failures(localizer: Localizer, x) -> np.ndarray:
    """Raw (unclamped) failure scores for one row or a matrix of rows."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(localizer.path_labels):
        raise DimensionError(
            f"expected {len(localizer.path_labels)} path features, got {x.shape[-1]}"
        )
    return np.asarray(localizer.model.predict(polynomial_features(x, localizer.degree)))


def ranking(scores) -> np.ndarray:
    """Component indices by descending score, ascending index on ties."""
    scores = np.asarray(scores, dtype=float)
    return np.argsort(-scores, axis=-1, kind="stable")


def top_k(scores, k: int) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    if not 1 <= k <= scores.shape[-1]:
        raise ValueError(f"k must lie in [1, {scores.shape[-1]}], got {k}")
    return ranking(scores)[..., :k]


def top_k_accuracy(rankings, truth, k: int) -> float:
    """Fraction of samples whose true component is among the first k ranked."""
    rankings = np.asarray(rankings)
    truth = np.asarray(truth)
    if rankings.ndim != 2 or rankings.shape[0] == 0:
        raise ValueError("need a nonempty (n_samples, n_ranked) array of rankings")
    if truth.shape != (rankings.shape[0],):
        raise DimensionError("one true component per ranking is required")
    if not 1 <= k <= rankings.shape[1]:
        raise ValueError(f"k must lie in [1, {rankings.shape[1]}], got {k}")
    hits = (rankings[:, :k] == truth[:, None]).any(axis=1)
    return float(hits.mean())


def score_mse(Y_pred, Y) -> float:
    Y_pred, Y = np.asarray(Y_pred, dtype=float), np.asarray(Y, dtype=float)
    if Y_pred.shape != Y.shape:
        raise DimensionError("prediction and target shapes differ")
    return float(np.mean((Y - Y_pred) ** 2))


def score_r2(Y_pred, Y) -> float:
    """Coefficient of determination pooled over every cell (each cell weighs the same)."""
    Y_pred, Y = np.asarray(Y_pred, dtype=float), np.asarray(Y, dtype=float)
    if Y_pred.shape != Y.shape:
        raise DimensionError("prediction and target shapes differ")
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("R^2 is undefined for a constant target")
    return 1.0 - float(np.sum((Y - Y_pred) ** 2)) / ss_tot


def write_rankings(path, scores, component_labels, k: int | None = None) -> None:
    """Long-form CSV: sample, rank (1-based), component, score."""
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    order = ranking(scores)
    if k is not None:
        order = order[:, :k]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "rank", "component", "score"])
        for i, row in enumerate(order):
            for r, c in enumerate(row, start=1):
                w.writerow([i, r, component_labels[c], format_value(float(scores[i, c]))])
