"""PCA reduction, ridge regression, and the expression-prediction pipeline.

The evaluation protocol reduces frozen patch embeddings to a fixed number
of principal components (256 by default), fits a linear ridge head on the
gene-expression targets of each cross-validation fold's training side, and
scores held-out predictions by per-gene Pearson correlation. Scores
aggregate per dataset and then into a global mean of dataset means.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, DimensionMismatchError


@dataclass
class PCAModel:
    mean: np.ndarray  # (D,)
    components: np.ndarray  # (m, D), orthonormal rows
    explained_variance_ratio: np.ndarray  # (m,)
    flags: list[str] = field(default_factory=list)

    @property
    def n_components(self) -> int:
        return int(self.components.shape[0])


def pca_fit(x: np.ndarray, m: int) -> PCAModel:
    """Principal axes of centered data via SVD.

    Requests beyond the data's rank are capped (flagged). Component signs
    follow a fixed convention: the coordinate of largest magnitude in each
    axis is positive. Variance ratios are relative to the total variance,
    so they sum to at most 1 even when components are truncated.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DataError("pca_fit expects a 2-D matrix")
    n, d = x.shape
    if n < 2:
        raise ConfigError("pca_fit needs at least 2 rows")
    if m < 1:
        raise ConfigError("m must be >= 1")
    mean = x.mean(axis=0)
    xc = x - mean
    u, s, vt = np.linalg.svd(xc, full_matrices=False)
    tol = s[0] * max(n, d) * np.finfo(np.float64).eps if s.size else 0.0
    rank = int((s > tol).sum())
    flags = []
    m_eff = min(m, n - 1, d)
    if rank < m_eff:
        m_eff = rank
        flags.append(f"rank-deficient: returning {m_eff} of {m} requested components")
    elif m_eff < m:
        flags.append(f"capped at min(n-1, D) = {m_eff} components")
    total_var = (s**2).sum() / (n - 1)
    comp = vt[:m_eff]
    # deterministic sign: largest-|entry| coordinate positive
    for row in comp:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    ratios = (s[:m_eff] ** 2 / (n - 1)) / total_var if total_var > 0 else np.zeros(m_eff)
    return PCAModel(mean=mean, components=comp, explained_variance_ratio=ratios, flags=flags)


def pca_transform(model: PCAModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.mean.size:
        raise DimensionMismatchError(
            f"expected (*, {model.mean.size}) input, got {x.shape}"
        )
    return (x - model.mean) @ model.components.T


def variance_explained_first2(x: np.ndarray) -> float:
    """Fraction of variance captured by the first two principal components."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 3:
        raise ConfigError("needs at least 3 rows")
    model = pca_fit(x, m=2)
    return float(model.explained_variance_ratio.sum())


@dataclass
class RidgeModel:
    weights: np.ndarray  # (m, G)
    intercepts: np.ndarray  # (G,)
    alpha: float
    flags: list[str] = field(default_factory=list)


def ridge_fit(
    z: np.ndarray, y: np.ndarray, alpha: float = 1.0, fit_intercept: bool = True
) -> RidgeModel:
    """Closed-form multi-target ridge regression.

    By default the system is solved on centered data, (Z'Z + alpha I) W =
    Z'Y, with intercepts recovered from the means; ``fit_intercept=False``
    solves the raw uncentered system with zero intercepts. A singular
    system at alpha = 0 falls back to the minimum-norm least-squares
    solution (flagged).
    """
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if z.shape[0] != y.shape[0]:
        raise DataError("feature/target row counts disagree")
    if z.shape[0] < 1:
        raise ConfigError("ridge_fit needs at least 1 row")
    if alpha < 0:
        raise ConfigError("alpha must be nonnegative")
    if fit_intercept:
        z_mean = z.mean(axis=0)
        y_mean = y.mean(axis=0)
    else:
        z_mean = np.zeros(z.shape[1])
        y_mean = np.zeros(y.shape[1])
    zc = z - z_mean
    yc = y - y_mean
    m = z.shape[1]
    gram = zc.T @ zc + alpha * np.eye(m)
    flags: list[str] = []
    try:
        if alpha == 0:
            # detect singularity explicitly; solve() may silently succeed
            cond = np.linalg.cond(gram)
            if not np.isfinite(cond) or cond > 1e12:
                raise np.linalg.LinAlgError("singular normal equations")
        w = np.linalg.solve(gram, zc.T @ yc)
    except np.linalg.LinAlgError:
        w, *_ = np.linalg.lstsq(zc, yc, rcond=None)
        flags.append("singular system at alpha=0: minimum-norm solution")
    intercepts = y_mean - z_mean @ w
    return RidgeModel(weights=w, intercepts=intercepts, alpha=alpha, flags=flags)


def ridge_predict(model: RidgeModel, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.shape[1] != model.weights.shape[0]:
        raise DimensionMismatchError(
            f"expected (*, {model.weights.shape[0]}) input, got {z.shape}"
        )
    return z @ model.weights + model.intercepts


# ----------------------------------------------------------------------
# Cross-validated expression prediction
# ----------------------------------------------------------------------


@dataclass
class RegressionReport:
    genes: list[str]
    fold_ids: list[int]
    # (n_folds, n_genes); NaN marks an undefined (excluded) entry
    per_fold_pcc: np.ndarray
    dataset_of_fold: dict[int, str]
    flags: list[str] = field(default_factory=list)
    # populated only on request: fold -> (PCAModel, RidgeModel)
    models: dict[int, tuple[PCAModel, RidgeModel]] = field(default_factory=dict)

    def gene_means(self) -> np.ndarray:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return np.nanmean(self.per_fold_pcc, axis=0)

    def dataset_means(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for ds in sorted(set(self.dataset_of_fold.values())):
            rows = [i for i, f in enumerate(self.fold_ids) if self.dataset_of_fold[f] == ds]
            vals = self.per_fold_pcc[rows]
            vals = vals[np.isfinite(vals)]
            out[ds] = float(vals.mean()) if vals.size else float("nan")
        return out

    def global_mean(self) -> float:
        means = [v for v in self.dataset_means().values() if np.isfinite(v)]
        return float(np.mean(means)) if means else float("nan")


def _pcc_columns(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Per-column Pearson correlation; 0 where either side has no variance."""
    pc = pred - pred.mean(axis=0)
    tc = truth - truth.mean(axis=0)
    num = (pc * tc).sum(axis=0)
    denom = np.sqrt((pc**2).sum(axis=0) * (tc**2).sum(axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
    return np.clip(r, -1.0, 1.0)


def expression_pipeline(
    x: np.ndarray,
    y: np.ndarray,
    folds: dict[str, int] | np.ndarray,
    item_ids: list[str] | None = None,
    gene_names: list[str] | None = None,
    m: int = 256,
    alpha: float = 1.0,
    dataset_of_fold: dict[int, str] | None = None,
    keep_models: bool = False,
) -> RegressionReport:
    """Cross-validated PCA + ridge expression prediction.

    For every fold, PCA and the ridge head are fitted on the other folds'
    rows only; the held-out rows are transformed, predicted, and scored by
    per-gene PCC. Genes with fewer than 2 held-out samples in a fold are
    recorded as NaN and excluded from aggregation. Component counts beyond
    the training rank are capped so small folds still run.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    n, d = x.shape
    if y.shape[0] != n:
        raise DataError("embedding/target row counts disagree")
    genes = gene_names if gene_names is not None else [f"g{i}" for i in range(y.shape[1])]
    if isinstance(folds, dict):
        if item_ids is None:
            raise ConfigError("item_ids required when folds map item ids")
        fold_arr = np.array([folds[i] for i in item_ids], dtype=np.int64)
    else:
        fold_arr = np.asarray(folds, dtype=np.int64)
    if fold_arr.size != n:
        raise DataError("fold assignment length disagrees with table")
    fold_ids = sorted(set(fold_arr.tolist()))
    if len(fold_ids) < 2:
        raise ConfigError("cross-validation needs at least 2 folds")
    per_fold = np.full((len(fold_ids), len(genes)), np.nan)
    flags: list[str] = []
    models: dict[int, tuple[PCAModel, RidgeModel]] = {}
    for fi, fold in enumerate(fold_ids):
        test_mask = fold_arr == fold
        train_mask = ~test_mask
        if train_mask.sum() < 2:
            flags.append(f"fold {fold}: fewer than 2 training rows; skipped")
            continue
        m_eff = min(m, int(train_mask.sum()) - 1, d)
        pca = pca_fit(x[train_mask], m_eff)
        z_train = pca_transform(pca, x[train_mask])
        z_test = pca_transform(pca, x[test_mask])
        ridge = ridge_fit(z_train, y[train_mask], alpha=alpha)
        if keep_models:
            models[fold] = (pca, ridge)
        pred = ridge_predict(ridge, z_test)
        if test_mask.sum() < 2:
            flags.append(f"fold {fold}: fewer than 2 test rows; PCC undefined")
            continue
        per_fold[fi] = _pcc_columns(pred, y[test_mask])
    dof = dataset_of_fold or {f: "default" for f in fold_ids}
    return RegressionReport(
        genes=list(genes),
        fold_ids=fold_ids,
        per_fold_pcc=per_fold,
        dataset_of_fold=dof,
        flags=flags,
        models=models,
    )
