"""Extremely randomized regression trees.

Each tree sees the whole training sample.  At a node a random subset of
features is considered; for each one a single threshold is drawn uniformly
between the node's min and max of that feature, and the candidate with the
smallest summed child squared error wins.  Rows with ``x <= threshold`` go
left.  Targets may be multi-output, in which case squared errors are
summed over outputs.

The random draws at a node depend only on the node's feature ranges, so
training is invariant to the order of the rows.  Tree ``t`` of a forest
with seed ``s`` draws from ``PCG64(SeedSequence(s).spawn(n_trees)[t])``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import DimensionError


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 12
    min_samples_leaf: int = 2
    max_features: int | None = None  # None -> floor(sqrt(n_features))

    def n_candidates(self, n_features: int) -> int:
        if self.max_features is None:
            return max(1, int(np.sqrt(n_features)))
        return max(1, min(int(self.max_features), n_features))


@dataclass
class Tree:
    feature: np.ndarray    # -1 at leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # (n_nodes, n_outputs)
    n_samples: np.ndarray

    def apply(self, X) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node]
            inner = feat >= 0
            if not inner.any():
                return node
            go_left = X[rows, np.where(inner, feat, 0)] <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(inner, nxt, node)

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {k: v.tolist() for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, doc: dict) -> "Tree":
        return cls(
            feature=np.asarray(doc["feature"], dtype=np.int64),
            threshold=np.asarray(doc["threshold"], dtype=float),
            left=np.asarray(doc["left"], dtype=np.int64),
            right=np.asarray(doc["right"], dtype=np.int64),
            value=np.asarray(doc["value"], dtype=float),
            n_samples=np.asarray(doc["n_samples"], dtype=np.int64),
        )


def build_tree(X, Y, params: ForestParams, rng: np.random.Generator) -> Tree:
    n, d = X.shape
    k = params.n_candidates(d)
    msl = params.min_samples_leaf
    feature, threshold, left, right, value, counts = [], [], [], [], [], []

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(Y[rows].mean(axis=0))
        counts.append(len(rows))
        return len(feature) - 1

    root_rows = np.arange(n)
    stack = [(new_node(root_rows), root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        if depth >= params.max_depth or len(rows) < 2 * msl:
            continue
        Yn = Y[rows]
        if np.all(Yn == Yn[0]):
            continue
        split = _draw_split(X[rows], Yn, k, msl, rng)
        if split is None:
            continue
        f, t = split
        go_left = X[rows, f] <= t
        feature[node], threshold[node] = f, t
        lrows, rrows = rows[go_left], rows[~go_left]
        left[node] = new_node(lrows)
        right[node] = new_node(rrows)
        # push right first so the left subtree is expanded (and drawn) first
        stack.append((right[node], rrows, depth + 1))
        stack.append((left[node], lrows, depth + 1))

    return Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=float),
        np.asarray(counts, dtype=np.int64),
    )


def _draw_split(Xn, Yn, k, msl, rng):
    lo = Xn.min(axis=0)
    hi = Xn.max(axis=0)
    feats, thresholds = [], []
    for f in rng.permutation(Xn.shape[1]):
        if hi[f] > lo[f]:
            feats.append(f)
            thresholds.append(rng.uniform(lo[f], hi[f]))
            if len(feats) == k:
                break
    if not feats:
        return None
    thresholds = np.asarray(thresholds)
    L = (Xn[:, feats] <= thresholds).T.astype(float)  # (k, n)
    n_left = L.sum(axis=1)
    n_right = Xn.shape[0] - n_left
    s_left = L @ Yn
    s_right = Yn.sum(axis=0) - s_left
    valid = (n_left >= msl) & (n_right >= msl)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = (s_left ** 2).sum(axis=1) / n_left + (s_right ** 2).sum(axis=1) / n_right
    gain[~valid] = -np.inf
    best = int(np.argmax(gain))
    return int(feats[best]), float(thresholds[best])


@dataclass
class ForestModel:
    trees: list[Tree]
    params: ForestParams
    seed: int
    n_features: int
    multi_output: bool = field(default=False)

    def predict(self, X) -> np.ndarray:
        return predict_forest(self, X)

    def to_dict(self) -> dict:
        return {
            "kind": "forest",
            "params": asdict(self.params),
            "seed": self.seed,
            "n_features": self.n_features,
            "multi_output": self.multi_output,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ForestModel":
        return cls(
            [Tree.from_dict(t) for t in doc["trees"]],
            ForestParams(**doc["params"]),
            int(doc["seed"]),
            int(doc["n_features"]),
            bool(doc["multi_output"]),
        )


def fit_forest(X, y, params: ForestParams | None = None, seed: int = 0) -> ForestModel:
    params = params or ForestParams()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape[0] != X.shape[0]:
        raise DimensionError("X and y row counts differ")
    if params.n_trees < 1 or params.max_depth < 0 or params.min_samples_leaf < 1:
        raise ValueError(f"invalid forest parameters {params}")
    if X.shape[0] < 2 * params.min_samples_leaf:
        raise ValueError(f"need at least {2 * params.min_samples_leaf} rows to grow a forest")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("inputs contain missing or non-finite values")
    multi = y.ndim == 2
    Y = y if multi else y[:, None]
    seeds = np.random.SeedSequence(seed).spawn(params.n_trees)
    trees = [build_tree(X, Y, params, np.random.Generator(np.random.PCG64(s))) for s in seeds]
    return ForestModel(trees, params, int(seed), X.shape[1], multi)


def predict_forest(model: ForestModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    if X2.shape[1] != model.n_features:
        raise DimensionError(f"model expects {model.n_features} features, got {X2.shape[1]}")
    pred = np.zeros((X2.shape[0], model.trees[0].value.shape[1]))
    for tree in model.trees:
        pred += tree.predict(X2)
    pred /= len(model.trees)
    if not model.multi_output:
        pred = pred[:, 0]
    return pred[0] if single else pred
