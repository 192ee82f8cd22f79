import json
import math

import numpy as np
import pytest

from faultloc.errors import DimensionError, FaultLocError
from faultloc.faultsim import path_failure_probability
from faultloc.localize import (
    Localizer,
    predict_failures,
    ranking,
    score_mse,
    score_r2,
    top_k,
    top_k_accuracy,
    train_localizer,
    write_rankings,
)
from faultloc.regress import ExtraTrees, ForestParams, Knn, Lasso, Ridge
from faultloc.topology import build_preset, compute_routes, path_index


@pytest.fixture(scope="module")
def ring_noiseless():
    """Exact path failure probabilities with one component at 0.5."""
    topo = build_preset("ring")
    routes, paths = compute_routes(topo), path_index(topo)
    n_comp = 16
    X = np.zeros((n_comp, len(paths)))
    Y = np.zeros((n_comp, n_comp))
    for c in range(n_comp):
        fault = np.zeros(n_comp)
        fault[c] = 0.5
        X[c] = [path_failure_probability(routes[pair].components, fault) for pair in paths.paths]
        Y[c, c] = 0.5
    return X, Y


def test_top_k_examples():
    assert list(top_k([0.1, 0.9, 0.3], 1)) == [1]
    assert list(top_k([0.5, 0.5], 2)) == [0, 1]
    assert sorted(top_k(np.random.default_rng(0).random(102), 102)) == list(range(102))
    with pytest.raises(ValueError):
        top_k([0.1, 0.2], 3)
    with pytest.raises(ValueError):
        top_k([0.1, 0.2], 0)


def test_ranking_ties_ascending_index():
    assert list(ranking([0.2, 0.7, 0.2, 0.7])) == [1, 3, 0, 2]


def test_top_k_accuracy_examples():
    r = np.array([[2, 0, 1], [1, 2, 0]])
    assert top_k_accuracy(r, [2, 1], 1) == 1.0
    assert top_k_accuracy(r, [0, 0], 1) == 0.0
    assert top_k_accuracy(r, [0, 0], 2) == 0.5
    assert top_k_accuracy(r, [0, 0], 3) == 1.0
    with pytest.raises(ValueError):
        top_k_accuracy(np.zeros((0, 3), dtype=int), [], 1)
    with pytest.raises(DimensionError):
        top_k_accuracy(r, [0], 1)


def test_top_k_accuracy_monotone_in_k():
    rng = np.random.default_rng(1)
    r = np.array([rng.permutation(20) for _ in range(200)])
    truth = rng.integers(0, 20, 200)
    acc = [top_k_accuracy(r, truth, k) for k in range(1, 21)]
    assert all(a <= b for a, b in zip(acc, acc[1:]))
    assert acc[-1] == 1.0


def test_random_rankings_hit_chance_rate():
    rng = np.random.default_rng(2)
    n = 10_000
    r = np.array([rng.permutation(102) for _ in range(n)])
    truth = rng.integers(0, 102, n)
    p = 1 / 102
    assert abs(top_k_accuracy(r, truth, 1) - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_scores_hand_case():
    Y = np.array([[0.0, 1.0], [1.0, 0.0]])
    Yh = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert score_mse(Yh, Y) == 0.5
    assert score_r2(Yh, Y) == -1.0
    assert score_r2(Y, Y) == 1.0 and score_mse(Y, Y) == 0.0
    assert score_r2(np.full_like(Y, Y.mean()), Y) == 0.0
    with pytest.raises(ValueError):
        score_r2(Y, np.ones((2, 2)))
    with pytest.raises(DimensionError):
        score_mse(Y, np.ones((2, 3)))


def test_ring_degree_two_recovers_labels(ring_noiseless):
    X, Y = ring_noiseless
    loc = train_localizer(X, Y, Lasso(1e-6), degree=2)
    assert np.abs(predict_failures(loc, X) - Y).max() < 0.05


def test_ring_degree_one_separates_components(ring_noiseless):
    X, Y = ring_noiseless
    for est in (Lasso(1e-6), Ridge(0.1)):
        loc = train_localizer(X, Y, est)
        assert top_k_accuracy(ranking(predict_failures(loc, X)), np.argmax(Y, axis=1), 1) == 1.0


def test_zero_target_column_predicts_zero(ring_noiseless):
    X, Y = ring_noiseless
    Y = Y.copy()
    Y[:, 3] = 0.0
    loc = train_localizer(X, Y, Lasso(1e-6))
    assert np.abs(predict_failures(loc, X)[:, 3]).max() < 1e-6


def test_identical_rows_identical_scores(ring_noiseless):
    X, Y = ring_noiseless
    loc = train_localizer(X, Y, Ridge(0.1))
    a = predict_failures(loc, X[[4, 4]])
    assert np.array_equal(a[0], a[1])
    assert np.array_equal(predict_failures(loc, X[4]), predict_failures(loc, X[4]))
    # batch size may change the BLAS kernel, hence the last-bit tolerance
    assert np.allclose(predict_failures(loc, X[4]), a[0], rtol=0, atol=1e-15)


def test_feature_scaling_keeps_rankings():
    rng = np.random.default_rng(3)
    X = rng.random((60, 10))
    Y = X @ rng.random((10, 6)) + 0.01 * rng.normal(size=(60, 6))
    q = rng.random((15, 10))
    base = ranking(predict_failures(train_localizer(X, Y, Lasso(0.0)), q))
    scaled = ranking(predict_failures(train_localizer(3.7 * X, Y, Lasso(0.0)), 3.7 * q))
    assert np.array_equal(base, scaled)


def test_strong_l1_degenerates_to_index_order(ring_noiseless):
    X, Y = ring_noiseless
    loc = train_localizer(X, Y, Lasso(10.0))
    assert np.all(loc.model.weights == 0)
    scores = predict_failures(loc, X)
    # every output predicts its column mean, all equal here
    assert np.array_equal(ranking(scores)[0], np.arange(16))


def test_joint_training_equals_per_column(ring_noiseless):
    X, Y = ring_noiseless
    joint = predict_failures(train_localizer(X, Y, Lasso(1e-3)), X)
    for j in (0, 5, 15):
        single = predict_failures(train_localizer(X, Y[:, [j]], Lasso(1e-3)), X)
        assert np.allclose(single[:, 0], joint[:, j], atol=1e-12)


@pytest.mark.parametrize("est", [Ridge(0.1), Lasso(1e-4), Knn(2),
                                 ExtraTrees(ForestParams(n_trees=3), seed=1)])
def test_serialization_round_trip(tmp_path, ring_noiseless, est):
    X, Y = ring_noiseless
    a = train_localizer(X, Y, est)
    b = train_localizer(X, Y, est)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    a.save(tmp_path / "m.json")
    back = Localizer.load(tmp_path / "m.json")
    assert np.array_equal(predict_failures(back, X), predict_failures(a, X))
    assert back.estimator == est


def test_training_errors(ring_noiseless):
    X, Y = ring_noiseless
    Xn = X.copy()
    Xn[0, 0] = np.nan
    with pytest.raises(FaultLocError):
        train_localizer(Xn, Y, Ridge(0.1))
    with pytest.raises(DimensionError):
        train_localizer(X, Y[:-1], Ridge(0.1))
    loc = train_localizer(X, Y, Ridge(0.1))
    with pytest.raises(DimensionError):
        predict_failures(loc, X[:, :-1])


def test_write_rankings(tmp_path):
    write_rankings(tmp_path / "r.csv", [[0.1, 0.9, 0.3]], ["a", "b", "c"], k=2)
    assert (tmp_path / "r.csv").read_text() == (
        "sample,rank,component,score\n0,1,b,0.9\n0,2,c,0.3\n"
    )
