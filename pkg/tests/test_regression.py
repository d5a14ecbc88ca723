import numpy as np
import pytest

from scopebench.errors import ConfigError, DataError, DimensionMismatchError
from scopebench.regression import (
    expression_pipeline,
    pca_fit,
    pca_transform,
    ridge_fit,
    ridge_predict,
    variance_explained_first2,
)


# ----------------------------------------------------------------------
# PCA
# ----------------------------------------------------------------------


def test_pca_rank1_concentrates_variance():
    t = np.linspace(0, 1, 20)[:, None]
    x = t @ np.array([[2.0, -1.0, 0.5]])
    model = pca_fit(x, m=1)
    assert model.explained_variance_ratio[0] == pytest.approx(1.0, abs=1e-12)


def test_pca_eigen_oracle_duplicated_columns():
    # covariance eigen-oracle on a 3x4 matrix with duplicated feature columns
    base = np.array([[1.0, 2.0], [3.0, 5.0], [-1.0, 0.5]])
    x = np.hstack([base, base])  # duplicate the two features
    model = pca_fit(x, m=2)
    cov = np.cov(x, rowvar=False)
    eig = np.sort(np.linalg.eigvalsh(cov))[::-1]
    oracle = eig / eig.sum()
    assert np.allclose(model.explained_variance_ratio, oracle[:2], atol=1e-10)


def test_pca_caps_when_m_exceeds_rank():
    t = np.linspace(0, 1, 10)[:, None]
    x = t @ np.array([[1.0, 2.0, 3.0]])  # rank 1
    model = pca_fit(x, m=3)
    assert model.n_components == 1
    assert any("rank" in f for f in model.flags)


def test_pca_ratios_nonincreasing_and_bounded():
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = rng.normal(size=(30, 8)) * rng.uniform(0.1, 3.0, size=8)
        model = pca_fit(x, m=8)
        r = model.explained_variance_ratio
        assert (np.diff(r) <= 1e-12).all()
        assert r.sum() <= 1 + 1e-9
        assert (r >= 0).all()


def test_pca_components_orthonormal():
    rng = np.random.default_rng(1)
    model = pca_fit(rng.normal(size=(40, 6)), m=6)
    gram = model.components @ model.components.T
    assert np.abs(gram - np.eye(model.n_components)).max() < 1e-8


def test_pca_sign_convention_deterministic():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(25, 5))
    a = pca_fit(x, m=4)
    b = pca_fit(x.copy(), m=4)
    assert np.array_equal(a.components, b.components)
    for row in a.components:
        assert row[np.argmax(np.abs(row))] > 0


def test_pca_transform_mean_row_is_zero():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(15, 4))
    model = pca_fit(x, m=3)
    z = pca_transform(model, x.mean(axis=0, keepdims=True))
    assert np.abs(z).max() < 1e-12


def test_pca_training_projection_zero_mean():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(50, 7))
    model = pca_fit(x, m=5)
    z = pca_transform(model, x)
    assert np.abs(z.mean(axis=0)).max() < 1e-9


def test_pca_full_rank_round_trip():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(30, 5))
    model = pca_fit(x, m=5)
    z = pca_transform(model, x)
    back = z @ model.components + model.mean
    assert np.abs(back - x).max() < 1e-8


def test_pca_reconstruction_error_nonincreasing_in_m():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(40, 8)) * np.arange(1, 9)
    errors = []
    for m in range(1, 9):
        model = pca_fit(x, m=m)
        z = pca_transform(model, x)
        back = z @ model.components + model.mean
        errors.append(float(((x - back) ** 2).sum()))
    assert all(e1 >= e2 - 1e-9 for e1, e2 in zip(errors, errors[1:]))


def test_pca_projection_matches_manual_oracle():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(5, 3))
    model = pca_fit(x, m=2)
    manual = (x - x.mean(axis=0)) @ model.components.T
    assert np.abs(pca_transform(model, x) - manual).max() < 1e-10


def test_pca_input_validation():
    with pytest.raises(ConfigError):
        pca_fit(np.ones((1, 3)), m=1)
    model = pca_fit(np.random.default_rng(8).normal(size=(5, 3)), m=2)
    with pytest.raises(DimensionMismatchError):
        pca_transform(model, np.ones((2, 4)))


# ----------------------------------------------------------------------
# Ridge
# ----------------------------------------------------------------------


def test_ridge_identity_design_uncentered():
    model = ridge_fit(np.eye(2), np.array([1.0, 2.0]), alpha=0.0, fit_intercept=False)
    assert np.allclose(model.weights.ravel(), [1.0, 2.0], atol=1e-10)
    assert np.allclose(model.intercepts, 0.0)


def test_ridge_identity_design_centered_predictions():
    model = ridge_fit(np.eye(2), np.array([1.0, 2.0]), alpha=0.0)
    pred = ridge_predict(model, np.eye(2)).ravel()
    assert np.allclose(pred, [1.0, 2.0], atol=1e-9)


def test_ridge_hand_oracle_uncentered():
    # Z = [[1], [1]], y = [1, 1], alpha = 1: (2 + 1) w = 2 -> w = 2/3
    model = ridge_fit(np.ones((2, 1)), np.ones(2), alpha=1.0, fit_intercept=False)
    assert model.weights[0, 0] == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_ridge_shrinkage_monotone():
    rng = np.random.default_rng(9)
    z = rng.normal(size=(30, 4))
    y = rng.normal(size=(30, 2))
    norms = [
        float(np.linalg.norm(ridge_fit(z, y, alpha=a).weights))
        for a in (0.0, 0.1, 1.0, 10.0, 100.0, 1e4)
    ]
    assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-2


def test_ridge_optimality_spot_check():
    rng = np.random.default_rng(10)
    z = rng.normal(size=(25, 3))
    y = rng.normal(size=(25, 1))
    alpha = 0.7
    model = ridge_fit(z, y, alpha=alpha)

    def loss(w):
        resid = y - y.mean(0) - (z - z.mean(0)) @ w
        return float((resid**2).sum() + alpha * (w**2).sum())

    base = loss(model.weights)
    for _ in range(100):
        delta = rng.normal(size=model.weights.shape) * 0.01
        assert loss(model.weights + delta) >= base - 1e-12


def test_ridge_singular_fallback_flagged():
    z = np.ones((3, 2))  # rank 1 after centering -> singular at alpha=0
    y = np.array([1.0, 2.0, 3.0])
    model = ridge_fit(z, y, alpha=0.0)
    assert any("minimum-norm" in f for f in model.flags)


def test_ridge_rejects_negative_alpha():
    with pytest.raises(ConfigError):
        ridge_fit(np.eye(2), np.ones(2), alpha=-1.0)


# ----------------------------------------------------------------------
# Cross-validated pipeline
# ----------------------------------------------------------------------


def _linear_dataset(n=80, d=24, rank=12, g=6, seed=0):
    rng = np.random.default_rng(seed)
    loadings = rng.normal(size=(n, rank))
    basis = rng.normal(size=(rank, d))
    x = loadings @ basis
    w = rng.normal(size=(d, g))
    y = x @ w
    return x, y


def test_pipeline_noiseless_linear_targets_perfect_pcc():
    x, y = _linear_dataset()
    folds = np.arange(x.shape[0]) % 4
    report = expression_pipeline(x, y, folds, m=16, alpha=1e-8)
    assert np.nanmin(report.per_fold_pcc) >= 1 - 1e-6
    assert report.global_mean() >= 1 - 1e-6


def test_pipeline_shuffled_targets_null():
    x, y = _linear_dataset()
    rng = np.random.default_rng(1)
    means = []
    for _ in range(20):
        perm = rng.permutation(x.shape[0])
        folds = np.arange(x.shape[0]) % 4
        report = expression_pipeline(x, y[perm], folds, m=16, alpha=1e-3)
        means.append(report.global_mean())
    assert abs(np.mean(means)) <= 0.1


def test_pipeline_caps_components_beyond_samples():
    x, y = _linear_dataset(n=20, d=24, rank=5, g=2)
    folds = np.arange(20) % 2
    report = expression_pipeline(x, y, folds, m=256, alpha=1e-6)
    assert np.isfinite(report.per_fold_pcc).all()


def test_pipeline_no_test_leakage():
    # replacing the held-out rows with noise leaves train-side models
    # bit-identical
    x, y = _linear_dataset(n=40, d=10, rank=6, g=3)
    folds = np.array([0] * 30 + [1] * 10)
    rng = np.random.default_rng(2)
    x2, y2 = x.copy(), y.copy()
    x2[folds == 1] = rng.normal(size=(10, 10))
    y2[folds == 1] = rng.normal(size=(10, 3))
    r1 = expression_pipeline(x, y, folds, m=5, alpha=0.5, keep_models=True)
    r2 = expression_pipeline(x2, y2, folds, m=5, alpha=0.5, keep_models=True)
    pca1, ridge1 = r1.models[1]
    pca2, ridge2 = r2.models[1]
    assert np.array_equal(pca1.components, pca2.components)
    assert np.array_equal(pca1.mean, pca2.mean)
    assert np.array_equal(ridge1.weights, ridge2.weights)
    assert np.array_equal(ridge1.intercepts, ridge2.intercepts)


def test_pipeline_pcc_bounds_and_small_fold_flag():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(21, 6))
    y = rng.normal(size=(21, 4))
    folds = np.array([0] * 10 + [1] * 10 + [2])  # fold 2 has a single row
    report = expression_pipeline(x, y, folds, m=4, alpha=1.0)
    finite = report.per_fold_pcc[np.isfinite(report.per_fold_pcc)]
    assert (finite >= -1).all() and (finite <= 1).all()
    assert np.isnan(report.per_fold_pcc[2]).all()
    assert any("fewer than 2 test rows" in f for f in report.flags)


def test_pipeline_dataset_aggregation():
    x, y = _linear_dataset(n=40, d=8, rank=4, g=2)
    folds = np.arange(40) % 4
    report = expression_pipeline(
        x, y, folds, m=4, alpha=1e-8,
        dataset_of_fold={0: "dsA", 1: "dsA", 2: "dsB", 3: "dsB"},
    )
    means = report.dataset_means()
    assert set(means) == {"dsA", "dsB"}
    assert report.global_mean() == pytest.approx(np.mean(list(means.values())))


def test_pipeline_item_id_folds():
    x, y = _linear_dataset(n=12, d=6, rank=3, g=2)
    ids = [f"it{i}" for i in range(12)]
    folds = {i: k % 3 for k, i in enumerate(ids)}
    report = expression_pipeline(x, y, folds, item_ids=ids, m=3, alpha=1e-6)
    assert len(report.fold_ids) == 3
    with pytest.raises(ConfigError):
        expression_pipeline(x, y, folds, m=3)  # ids missing


# ----------------------------------------------------------------------
# Dimensionality diagnostic
# ----------------------------------------------------------------------


def test_first2_planar_data():
    rng = np.random.default_rng(4)
    basis = rng.normal(size=(2, 6))
    x = rng.normal(size=(50, 2)) @ basis
    assert variance_explained_first2(x) == pytest.approx(1.0, abs=1e-9)


def test_first2_rank1_data():
    t = np.linspace(-1, 1, 30)[:, None]
    x = t @ np.array([[1.0, 2.0, 3.0]])
    assert variance_explained_first2(x) == pytest.approx(1.0, abs=1e-9)


def test_first2_isotropic_gaussian_with_eigen_oracle():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(10_000, 10))
    mine = variance_explained_first2(x)
    eig = np.sort(np.linalg.eigvalsh(np.cov(x, rowvar=False)))[::-1]
    oracle = float(eig[:2].sum() / eig.sum())
    assert mine == pytest.approx(oracle, abs=1e-10)
    assert mine == pytest.approx(0.2, abs=0.02)


def test_first2_needs_three_rows():
    with pytest.raises(ConfigError):
        variance_explained_first2(np.ones((2, 3)))
