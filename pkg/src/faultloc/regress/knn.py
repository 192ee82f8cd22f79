"""Brute-force k-nearest-neighbors regression (Euclidean, uniform weights)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError

_CHUNK = 256


@dataclass
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def predict(self, X) -> np.ndarray:
        return predict_knn(self, X)

    def to_dict(self) -> dict:
        return {"kind": "knn", "k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "KnnModel":
        return cls(np.asarray(doc["X"], dtype=float), np.asarray(doc["y"], dtype=float),
                   int(doc["k"]))


def fit_knn(X, y, k: int = 5) -> KnnModel:
    X = np.array(X, dtype=float)
    y = np.array(y, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DimensionError("empty training set")
    if y.shape[0] != X.shape[0]:
        raise DimensionError("X and y row counts differ")
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k must lie in [1, {X.shape[0]}], got {k}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("inputs contain missing or non-finite values")
    return KnnModel(X, y, int(k))


def neighbors(model: KnnModel, X) -> np.ndarray:
    """Indices of the k nearest training rows; ties go to the lower index."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise DimensionError(f"model expects {model.n_features} features, got {X.shape[1]}")
    out = np.empty((X.shape[0], model.k), dtype=np.int64)
    for start in range(0, X.shape[0], _CHUNK):
        q = X[start:start + _CHUNK]
        # direct differences keep exact duplicates at distance exactly 0
        d2 = ((q[:, None, :] - model.X[None, :, :]) ** 2).sum(axis=2)
        out[start:start + len(q)] = np.argsort(d2, axis=1, kind="stable")[:, :model.k]
    return out


def predict_knn(model: KnnModel, X) -> np.ndarray:
    single = np.asarray(X).ndim == 1
    idx = neighbors(model, X)
    pred = model.y[idx].mean(axis=1)
    return pred[0] if single else pred
