import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultloc.errors import ImputationError
from faultloc.impute import ImputerConfig, imputation_rmse, impute, mean_fill
from faultloc.missing import Mask, MaskedMatrix, apply_mask, sample_mask
from faultloc.regress import ExtraTrees, ForestParams, Knn, Lasso, Ols, Ridge


def low_rank(seed, n=60, d=8):
    """Rate-like matrix whose columns are mixtures of two factors."""
    rng = np.random.default_rng(seed)
    F = rng.random((n, 2))
    W = rng.random((2, d)) / 2
    return np.clip(F @ W + 0.01 * rng.normal(size=(n, d)), 0, 1)


def test_nothing_missing_is_identity():
    X = low_rank(0)
    res = impute(apply_mask(X, sample_mask(*X.shape, 0.0)))
    assert np.array_equal(res.completed, X)
    assert res.rounds_used == 0 and res.converged


def test_correlated_columns_recovered():
    rng = np.random.default_rng(1)
    x1 = rng.random(20)
    X = np.column_stack([x1, x1])
    obs = np.ones_like(X, dtype=bool)
    obs[7, 1] = False
    res = impute(apply_mask(X, Mask(obs)), ImputerConfig(Ridge(1e-6)))
    assert abs(res.completed[7, 1] - x1[7]) < 1e-3


def test_mean_fill_examples():
    v = np.array([[1.0, 0.2], [np.nan, 0.6], [3.0, np.nan]])
    res = mean_fill(MaskedMatrix.from_values(v))
    assert res.completed[1, 0] == 2.0
    assert res.completed[2, 1] == pytest.approx(0.4)
    X = np.arange(6.0).reshape(3, 2)
    assert np.array_equal(mean_fill(MaskedMatrix.from_values(X)).completed, X)


def test_mean_fill_all_missing_column_uses_global_mean():
    v = np.array([[0.2, np.nan], [0.6, np.nan]])
    res = mean_fill(MaskedMatrix.from_values(v))
    assert np.allclose(res.completed[:, 1], 0.4)


def test_mean_fill_standard_normal_rmse():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(2000, 10))
    m = sample_mask(*X.shape, 0.2, seed=3)
    rmse = imputation_rmse(X, mean_fill(apply_mask(X, m)), m)
    assert 0.9 <= rmse <= 1.1


def test_rmse_examples():
    X = np.array([[0.5, 0.1], [0.2, 0.3]])
    obs = np.ones((2, 2), dtype=bool)
    obs[0, 0] = False
    guess = X.copy()
    guess[0, 0] = 0.3
    assert imputation_rmse(X, guess, Mask(obs)) == pytest.approx(0.2)
    assert imputation_rmse(X, X, Mask(obs)) == 0.0


def test_rmse_undefined_without_missing_cells():
    X = np.ones((2, 2))
    with pytest.raises(ImputationError):
        imputation_rmse(X, X, Mask(np.ones((2, 2), dtype=bool)))


def test_rmse_shape_mismatch():
    with pytest.raises(ImputationError):
        imputation_rmse(np.ones((2, 2)), np.ones((2, 3)), Mask(np.zeros((2, 2), dtype=bool)))


def test_errors():
    with pytest.raises(ImputationError):
        impute(MaskedMatrix.from_values(np.full((3, 3), np.nan)))
    with pytest.raises(ImputationError):
        impute(MaskedMatrix.from_values(np.array([[np.nan, 1.0]])))
    with pytest.raises(ImputationError):
        mean_fill(MaskedMatrix.from_values(np.full((2, 2), np.nan)))
    with pytest.raises(ValueError):
        ImputerConfig(tolerance=0)
    with pytest.raises(ValueError):
        ImputerConfig(max_rounds=0)


def test_estimator_failure_names_the_column():
    # unpenalized least squares on a constant predictor column is singular
    v = np.array([[0.5, 0.2], [0.5, np.nan], [0.5, 0.4]])
    with pytest.raises(ImputationError, match="column 1"):
        impute(MaskedMatrix.from_values(v), ImputerConfig(Ols()))


def test_fully_missing_column_keeps_global_mean(caplog):
    X = low_rank(4, n=30, d=4)
    v = X.copy()
    v[:, 2] = np.nan
    v[3, 0] = np.nan
    with caplog.at_level(logging.WARNING):
        res = impute(MaskedMatrix.from_values(v))
    observed = ~np.isnan(v)
    assert np.allclose(res.completed[:, 2], v[observed].mean())
    assert "fully missing" in caplog.text


@pytest.mark.filterwarnings("ignore::sklearn.exceptions.ConvergenceWarning")
def test_matches_sklearn_iterative_imputer():
    pytest.importorskip("sklearn")
    from sklearn.experimental import enable_iterative_imputer  # noqa: F401
    from sklearn.impute import IterativeImputer
    from sklearn.linear_model import Ridge as SkRidge

    X = low_rank(5, n=80, d=6)
    m = sample_mask(*X.shape, 0.2, seed=6)
    mm = apply_mask(X, m)
    ours = impute(mm, ImputerConfig(Ridge(0.01), max_rounds=10, tolerance=1e-12, warm_start=False))
    # both sides run exactly ten rounds; the stopping rules differ
    ref = IterativeImputer(estimator=SkRidge(alpha=0.01), max_iter=10, tol=1e-12,
                           random_state=0).fit_transform(mm.values)
    assert ours.rounds_used == 10
    assert np.abs(ours.completed - ref).max() < 1e-8


@pytest.mark.parametrize("estimator", [Lasso(1e-4), Ridge(0.01), Knn(3),
                                       ExtraTrees(ForestParams(n_trees=5), seed=0)])
def test_estimators_preserve_observed_cells(estimator):
    X = low_rank(7, n=40, d=5)
    m = sample_mask(*X.shape, 0.25, seed=8)
    res = impute(apply_mask(X, m), ImputerConfig(estimator, max_rounds=3))
    assert np.array_equal(res.completed[m.observed], X[m.observed])
    assert np.isfinite(res.completed).all()


def test_zero_initial_fill():
    X = low_rank(9, n=40, d=5)
    m = sample_mask(*X.shape, 0.2, seed=9)
    res = impute(apply_mask(X, m), ImputerConfig(Ridge(0.01), initial_fill="zero"))
    assert imputation_rmse(X, res, m) < imputation_rmse(X, mean_fill(apply_mask(X, m)), m)


def test_multivariate_beats_mean_fill_on_correlated_data():
    X = low_rank(10, n=100, d=10)
    m = sample_mask(*X.shape, 0.3, seed=11)
    mm = apply_mask(X, m)
    assert imputation_rmse(X, impute(mm), m) < 0.5 * imputation_rmse(X, mean_fill(mm), m)


def test_round_limit_reports_not_converged():
    X = low_rank(12, n=50, d=6)
    m = sample_mask(*X.shape, 0.4, seed=12)
    res = impute(apply_mask(X, m), ImputerConfig(Ridge(0.01), max_rounds=1, tolerance=1e-12))
    assert res.rounds_used == 1 and not res.converged
    assert len(res.trace) == 1
    assert res.report()["rounds_used"] == 1


def test_extratrees_imputer_deterministic():
    X = low_rank(13, n=30, d=4)
    mm = apply_mask(X, sample_mask(*X.shape, 0.2, seed=1))
    cfg = ImputerConfig(ExtraTrees(ForestParams(n_trees=4), seed=3), max_rounds=2)
    assert np.array_equal(impute(mm, cfg).completed, impute(mm, cfg).completed)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.5), st.sampled_from([None, (0.0, 1.0)]))
def test_impute_properties(seed, rate, clip):
    X = low_rank(seed, n=25, d=5)
    m = sample_mask(*X.shape, rate, seed=seed)
    mm = apply_mask(X, m)
    cfg = ImputerConfig(Lasso(1e-4), clip=clip)
    res = impute(mm, cfg)
    assert np.array_equal(res.completed[m.observed], X[m.observed])
    assert not np.isnan(res.completed).any()
    assert all(t >= 0 for t in res.trace)
    if m.n_missing and res.converged:
        assert res.trace[-1] < cfg.tolerance
    if clip is not None:
        assert res.completed.min() >= 0.0 and res.completed.max() <= 1.0
    assert np.array_equal(impute(mm, cfg).completed, res.completed)
