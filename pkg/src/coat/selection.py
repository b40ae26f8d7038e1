"""Tuning-parameter selection by V-fold cross-validation.

The selection routines work on any transformed data matrix ``z`` (rows are
samples). COAT uses clr scores; the oracle and naive estimators in the
simulation bench reuse the same code on the log-basis, log X, or X.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compositional import as_composition, clr, sample_covariance
from .errors import ConfigurationError
from .estimator import ThresholdRule, covariance_and_theta, min_eigenvalue, threshold_matrix

DEFAULT_GRID_SIZE = 51
DEFAULT_FOLDS = 10


@dataclass(frozen=True)
class CvResult:
    grid: tuple
    errors: tuple
    chosen_lambda: float
    fold_assignment: tuple
    seed: int
    rule: ThresholdRule = ThresholdRule("hard")
    pd_constrained: bool = False
    pd_unattained: bool = False
    min_eigenvalues: tuple | None = field(default=None, repr=False)

    @property
    def chosen_index(self) -> int:
        return self.grid.index(self.chosen_lambda)


def threshold_ratios(cov, theta) -> np.ndarray:
    """|cov_ij| / sqrt(theta_ij) over i < j, dropping undefined ratios."""
    iu = np.triu_indices(cov.shape[0], k=1)
    num = np.abs(cov[iu])
    den = np.sqrt(theta[iu])
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    return r[np.isfinite(r)]


def default_grid(cov, theta, size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Zero followed by ``size - 1`` geometric points.

    The geometric part runs from the 10% quantile of the off-diagonal
    ratios |cov_ij|/sqrt(theta_ij) to 1.01 times their maximum, so it spans
    nearly-full to empty off-diagonal support.
    """
    if size < 1:
        raise ConfigurationError(f"grid size must be >= 1, got {size}")
    if size == 1:
        return np.array([0.0])
    r = threshold_ratios(cov, theta)
    r = r[r > 0]
    if r.size == 0:
        return np.array([0.0])
    hi = r.max() * 1.01
    lo = np.quantile(r, 0.1)
    if lo <= 0 or lo >= hi:
        lo = r.min()
    if size == 2:
        return np.array([0.0, hi])
    return np.concatenate([[0.0], np.geomspace(lo, hi, size - 1)])


def fold_assignment(n: int, folds: int, seed: int) -> np.ndarray:
    """Seeded shuffle of the sample indices split into ``folds`` contiguous parts."""
    perm = np.random.default_rng(seed).permutation(n)
    ids = np.empty(n, dtype=int)
    for v, block in enumerate(np.array_split(perm, folds)):
        ids[block] = v
    return ids


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ConfigurationError("lambda grid is empty")
    if np.any(~np.isfinite(grid)) or np.any(grid < 0):
        raise ConfigurationError("lambda grid must be finite and nonnegative")
    if np.any(np.diff(grid) <= 0):
        raise ConfigurationError("lambda grid must be strictly increasing")
    return grid


def _argmin_largest(values: np.ndarray) -> int:
    """Index of the minimum, ties broken toward the last index."""
    best = values.min()
    return int(np.flatnonzero(values == best)[-1])


def cv_errors(
    z,
    grid,
    folds: int,
    rule: ThresholdRule,
    seed: int,
    preserve_diagonal: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean squared Frobenius CV error for each grid point, and fold ids."""
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    if folds < 2:
        raise ConfigurationError(f"need at least 2 folds, got {folds}")
    if n < 2 * folds:
        raise ConfigurationError(f"n={n} is too small for {folds} folds (need n >= {2 * folds})")
    grid = _check_grid(grid)
    ids = fold_assignment(n, folds, seed)
    errors = np.zeros(grid.size)
    for v in range(folds):
        test = ids == v
        cov, theta = covariance_and_theta(z[~test])
        sqrt_theta = np.sqrt(theta)
        target = sample_covariance(z[test])
        for g, lam in enumerate(grid):
            est = threshold_matrix(cov, sqrt_theta, lam, rule, preserve_diagonal)
            diff = est - target
            errors[g] += np.sum(diff * diff)
    return errors / folds, ids


def cross_validate_scores(
    z,
    grid=None,
    folds: int = DEFAULT_FOLDS,
    rule: ThresholdRule | str = "hard",
    seed: int = 0,
    preserve_diagonal: bool = False,
    pd: bool = False,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> CvResult:
    """Cross-validated thresholding of the covariance of ``z``.

    With ``pd`` set, only grid points whose full-data estimate has a
    positive minimum eigenvalue are eligible. If none are, the point with the
    largest minimum eigenvalue wins and ``pd_unattained`` is set.
    """
    rule = ThresholdRule.parse(rule)
    z = np.asarray(z, dtype=float)
    if grid is None:
        cov, theta = covariance_and_theta(z)
        grid = default_grid(cov, theta, grid_size)
    grid = _check_grid(grid)
    errors, ids = cv_errors(z, grid, folds, rule, seed, preserve_diagonal)

    eigs = None
    unattained = False
    if pd:
        cov, theta = covariance_and_theta(z)
        sqrt_theta = np.sqrt(theta)
        eigs = np.array([
            min_eigenvalue(threshold_matrix(cov, sqrt_theta, lam, rule, preserve_diagonal))
            for lam in grid
        ])
        ok = eigs > 0
        if ok.any():
            masked = np.where(ok, errors, np.inf)
            idx = _argmin_largest(masked)
        else:
            unattained = True
            idx = int(np.flatnonzero(eigs == eigs.max())[-1])
    else:
        idx = _argmin_largest(errors)

    return CvResult(
        grid=tuple(float(g) for g in grid),
        errors=tuple(float(e) for e in errors),
        chosen_lambda=float(grid[idx]),
        fold_assignment=tuple(int(i) for i in ids),
        seed=int(seed),
        rule=rule,
        pd_constrained=pd,
        pd_unattained=unattained,
        min_eigenvalues=None if eigs is None else tuple(float(e) for e in eigs),
    )


def cross_validate(
    x,
    grid=None,
    folds: int = DEFAULT_FOLDS,
    rule: ThresholdRule | str = "hard",
    seed: int = 0,
    preserve_diagonal: bool = False,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> CvResult:
    """Choose the COAT tuning parameter by V-fold cross-validation.

    The error for each lambda is the fold average of the squared Frobenius
    distance between the estimate fitted without the fold and the sample
    clr covariance of the fold. Ties go to the largest lambda.
    """
    x = as_composition(x)
    return cross_validate_scores(
        clr(x), grid, folds, rule, seed, preserve_diagonal, pd=False, grid_size=grid_size
    )


def select_lambda_pd(
    x,
    grid=None,
    folds: int = DEFAULT_FOLDS,
    rule: ThresholdRule | str = "hard",
    seed: int = 0,
    preserve_diagonal: bool = False,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> CvResult:
    """Cross-validation restricted to positive definite COAT estimates."""
    x = as_composition(x)
    return cross_validate_scores(
        clr(x), grid, folds, rule, seed, preserve_diagonal, pd=True, grid_size=grid_size
    )
