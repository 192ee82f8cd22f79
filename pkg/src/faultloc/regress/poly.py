from __future__ import annotations

import numpy as np

MAX_DEGREE = 2


def polynomial_features(X, degree: int = 1) -> np.ndarray:
    """Expand features to the given degree, without a bias column.

    Degree 2 appends all squares, then all pairwise products ``x_i * x_j``
    (``i < j``) in lexicographic order.  Higher degrees are refused: at 210
    paths degree 2 already yields 22365 columns.
    """
    X = np.asarray(X, dtype=float)
    if degree < 1:
        raise ValueError("degree must be >= 1")
    if degree > MAX_DEGREE:
        raise ValueError(f"degree > {MAX_DEGREE} is not supported")
    if degree == 1:
        return X
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    i, j = np.triu_indices(X2.shape[1], k=1)
    out = np.hstack([X2, X2 ** 2, X2[:, i] * X2[:, j]])
    return out[0] if single else out


def n_output_features(n_features: int, degree: int) -> int:
    if degree == 1:
        return n_features
    return 2 * n_features + n_features * (n_features - 1) // 2
