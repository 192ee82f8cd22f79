"""Regression numerics plus small estimator specs used by the imputer and localizer.

An estimator spec is a frozen description (kind + hyperparameters) with a
``fit(X, y)`` method returning a trained model that has ``predict``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .forest import ForestModel, ForestParams, fit_forest, predict_forest
from .knn import KnnModel, fit_knn, predict_knn
from .linear import LinearModel, fit_linear, lasso_objective, predict_linear
from .poly import polynomial_features

__all__ = [
    "ExtraTrees", "ForestModel", "ForestParams", "Knn", "KnnModel", "Lasso",
    "LinearModel", "Ols", "Ridge", "estimator_from_dict", "fit_forest", "fit_knn",
    "fit_linear", "lasso_objective", "model_from_dict", "polynomial_features",
    "predict_forest", "predict_knn", "predict_linear",
]


@dataclass(frozen=True)
class Ols:
    kind = "ols"

    def fit(self, X, y, warm_start=None):
        return fit_linear(X, y, "none")

    @property
    def label(self):
        return "ols"

    def to_dict(self):
        return {"kind": "ols"}


@dataclass(frozen=True)
class Ridge:
    lam: float = 1.0
    kind = "ridge"

    def fit(self, X, y, warm_start=None):
        return fit_linear(X, y, "l2", self.lam)

    @property
    def label(self):
        return f"ridge({self.lam:g})"

    def to_dict(self):
        return {"kind": "ridge", "lambda": self.lam}


@dataclass(frozen=True)
class Lasso:
    lam: float = 1e-4
    tol: float = 1e-6
    max_iter: int = 1000
    kind = "lasso"

    def fit(self, X, y, warm_start=None):
        return fit_linear(X, y, "l1", self.lam, self.tol, self.max_iter, warm_start)

    @property
    def label(self):
        return f"lasso({self.lam:g})"

    def to_dict(self):
        return {"kind": "lasso", "lambda": self.lam, "tol": self.tol, "max_iter": self.max_iter}


@dataclass(frozen=True)
class Knn:
    k: int = 5
    kind = "knn"

    def fit(self, X, y, warm_start=None):
        return fit_knn(X, y, min(self.k, len(X)))

    @property
    def label(self):
        return f"knn({self.k})"

    def to_dict(self):
        return {"kind": "knn", "k": self.k}


@dataclass(frozen=True)
class ExtraTrees:
    params: ForestParams = field(default_factory=ForestParams)
    seed: int = 0
    kind = "extratrees"

    def fit(self, X, y, warm_start=None):
        return fit_forest(X, y, self.params, self.seed)

    @property
    def label(self):
        return "extratrees"

    def to_dict(self):
        return {"kind": "extratrees", "seed": self.seed, **self.params.__dict__}


def estimator_from_dict(doc: dict):
    """Build an estimator spec from a config mapping such as ``{"kind": "lasso", "lambda": 1e-4}``."""
    doc = dict(doc)
    kind = str(doc.pop("kind", "")).lower()
    doc.pop("label", None)
    try:
        if kind == "ols":
            est = Ols()
        elif kind == "ridge":
            est = Ridge(float(doc.pop("lambda", 1.0)))
        elif kind == "lasso":
            est = Lasso(float(doc.pop("lambda", 1e-4)), float(doc.pop("tol", 1e-6)),
                        int(doc.pop("max_iter", 1000)))
        elif kind == "knn":
            est = Knn(int(doc.pop("k", 5)))
        elif kind == "extratrees":
            seed = int(doc.pop("seed", 0))
            est = ExtraTrees(ForestParams(**doc), seed)
            doc = {}
        else:
            raise ValueError(f"unknown estimator kind {kind!r}")
    except TypeError as exc:
        raise ValueError(f"bad {kind} parameters: {exc}") from exc
    if doc:
        raise ValueError(f"unexpected {kind} parameters: {sorted(doc)}")
    return est


def model_from_dict(doc: dict):
    kind = doc.get("kind")
    if kind == "linear":
        return LinearModel.from_dict(doc)
    if kind == "knn":
        return KnnModel.from_dict(doc)
    if kind == "forest":
        return ForestModel.from_dict(doc)
    raise ValueError(f"unknown model kind {kind!r}")
