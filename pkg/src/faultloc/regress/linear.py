"""Least squares, Ridge and Lasso on mean-centered data.

Objective scaling
-----------------
Ridge solves ``(Xc'Xc + lam*I) W = Xc'yc`` (unscaled penalty).
Lasso minimizes ``1/(2n) * ||yc - Xc W||^2 + lam * ||W||_1`` so a given
``lam`` means the same thing whatever the number of rows.  ``Xc`` and
``yc`` are the column-centered data; the intercept is recovered as
``mean(y) - mean(X) @ W``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..errors import DimensionError, SingularMatrixError
from ._cd import lasso_cd_gram

PENALTIES = ("none", "l2", "l1")


@dataclass
class LinearModel:
    weights: np.ndarray  # (p,) or (p, m)
    intercept: np.ndarray | float
    penalty: str = "none"
    lam: float = 0.0
    n_iter: int = 0
    converged: bool = True
    objective_trace: np.ndarray | None = None

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def predict(self, X) -> np.ndarray:
        return predict_linear(self, X)

    def to_dict(self) -> dict:
        return {
            "kind": "linear",
            "penalty": self.penalty,
            "lambda": self.lam,
            "weights": np.asarray(self.weights).tolist(),
            "intercept": np.asarray(self.intercept).tolist(),
            "n_iter": int(self.n_iter),
            "converged": bool(self.converged),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LinearModel":
        intercept = np.asarray(doc["intercept"], dtype=float)
        return cls(
            weights=np.asarray(doc["weights"], dtype=float),
            intercept=float(intercept) if intercept.ndim == 0 else intercept,
            penalty=doc["penalty"],
            lam=float(doc["lambda"]),
            n_iter=int(doc.get("n_iter", 0)),
            converged=bool(doc.get("converged", True)),
        )


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise DimensionError("X must be a 2-D matrix")
    if y.ndim not in (1, 2) or y.shape[0] != X.shape[0]:
        raise DimensionError(f"X has {X.shape[0]} rows but y has shape {y.shape}")
    if X.shape[0] == 0:
        raise DimensionError("cannot fit on zero rows")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("inputs contain missing or non-finite values")
    return X, y


def lasso_objective(X, y, weights, intercept, lam) -> float:
    """The scaled Lasso objective evaluated on raw (uncentered) data."""
    r = np.asarray(y) - np.asarray(X) @ weights - intercept
    return float(0.5 * np.sum(r * r) / len(r) + lam * np.abs(weights).sum())


def fit_linear(X, y, penalty: str = "none", lam: float = 0.0, tol: float = 1e-6,
               max_iter: int = 1000, warm_start=None) -> LinearModel:
    """Fit an affine model; ``y`` may be a vector or a (n, m) matrix.

    Multi-output fits share one Gram matrix; the objectives are separable
    across output columns, so this equals fitting each column alone.
    """
    if penalty not in PENALTIES:
        raise ValueError(f"unknown penalty {penalty!r}")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tolerance must be > 0 and max_iter >= 1")
    X, y = _check_xy(X, y)
    vector = y.ndim == 1
    Y = y[:, None] if vector else y
    n, p = X.shape

    x_mean = X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Xc = X - x_mean
    Yc = Y - y_mean

    n_iter, converged, trace = 0, True, None
    if penalty == "l1":
        G = Xc.T @ Xc / n
        C = Xc.T @ Yc / n
        if warm_start is None:
            W = np.zeros((p, Y.shape[1]))
        else:
            W = np.array(np.reshape(warm_start, (p, Y.shape[1])), dtype=float)
        objective = np.full((max_iter, Y.shape[1]), np.nan)
        done = np.zeros(Y.shape[1], dtype=np.bool_)
        sweeps = lasso_cd_gram(G, np.ascontiguousarray(C), W, float(lam), float(tol),
                               int(max_iter), objective, done)
        n_iter = int(sweeps.max())
        converged = bool(done.all())
        trace = objective[:n_iter]
    else:
        A = Xc.T @ Xc
        if penalty == "l2":
            A[np.diag_indices(p)] += lam
        B = Xc.T @ Yc
        if penalty == "none":
            eig = np.linalg.eigvalsh(A)
            if eig[0] <= max(eig[-1], 1.0) * 1e-12:
                raise SingularMatrixError(
                    "normal matrix is singular; use a penalty instead of plain least squares"
                )
        try:
            W = linalg.solve(A, B, assume_a="pos")
        except (linalg.LinAlgError, ValueError) as exc:
            raise SingularMatrixError(f"normal matrix is not positive definite: {exc}") from exc

    intercept = y_mean - x_mean @ W
    if vector:
        W = W[:, 0]
        intercept = float(intercept[0])
        if trace is not None:
            trace = trace[:, 0]
    if not np.isfinite(W).all():
        raise ValueError("fit produced non-finite weights")
    return LinearModel(W, intercept, penalty, float(lam), n_iter, converged, trace)


def predict_linear(model: LinearModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise DimensionError(f"model expects {model.n_features} features, got {X.shape[1]}")
    out = X @ model.weights + model.intercept
    return out[0] if single else out
