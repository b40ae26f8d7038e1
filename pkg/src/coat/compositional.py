"""Compositional data primitives.

Transforms between compositions, log-ratios and centered log-ratios (clr),
the variation matrix and its rank-2 projection, and the population-level
identities relating a basis covariance to its clr and variation
counterparts.

All sample variances use divisor ``n``. Logs are natural logs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError

ROW_SUM_TOL = 1e-12
SYMMETRY_TOL = 1e-10
CLR_ROW_SUM_TOL = 1e-8

COV_KINDS = ("basis", "clr", "variation", "generic")


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2.0


def _check_positive(values: np.ndarray) -> None:
    bad = np.argwhere(~(values > 0))
    if bad.size:
        k, j = bad[0]
        raise DomainError(
            f"non-positive entry {values[k, j]!r} at row {k}, column {j}"
        )


@dataclass(frozen=True)
class CompositionMatrix:
    """n x p matrix of strictly positive proportions with unit row sums."""

    values: np.ndarray
    sample_ids: Sequence[str] = None
    taxon_ids: Sequence[str] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise DomainError(f"expected a 2-d array, got shape {values.shape}")
        n, p = values.shape
        if n < 2 or p < 2:
            raise DomainError(f"need n >= 2 and p >= 2, got n={n}, p={p}")
        _check_positive(values)
        dev = np.abs(values.sum(axis=1) - 1.0)
        if dev.max() > ROW_SUM_TOL:
            k = int(dev.argmax())
            raise DomainError(f"row {k} sums to {values[k].sum()!r}, not 1")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        sids = self.sample_ids
        tids = self.taxon_ids
        sids = [f"S{k}" for k in range(n)] if sids is None else [str(s) for s in sids]
        tids = [f"T{j}" for j in range(p)] if tids is None else [str(t) for t in tids]
        if len(sids) != n or len(tids) != p:
            raise DomainError("id sequences do not match the matrix shape")
        object.__setattr__(self, "sample_ids", tuple(sids))
        object.__setattr__(self, "taxon_ids", tuple(tids))

    @property
    def shape(self):
        return self.values.shape

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def subset(self, rows) -> "CompositionMatrix":
        """Rows ``rows`` (indices, may repeat) as a new composition."""
        rows = np.asarray(rows)
        return CompositionMatrix(
            self.values[rows],
            [self.sample_ids[k] for k in rows],
            self.taxon_ids,
        )

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def closure(w) -> np.ndarray:
    """Divide each row of a positive matrix by its row sum."""
    w = np.asarray(w, dtype=float)
    _check_positive(np.atleast_2d(w))
    return w / w.sum(axis=-1, keepdims=True)


def as_composition(x) -> CompositionMatrix:
    if isinstance(x, CompositionMatrix):
        return x
    return CompositionMatrix(x)


@dataclass(frozen=True)
class CovMatrix:
    """Symmetric p x p matrix tagged with the role it plays.

    ``kind`` is one of ``basis`` (Omega), ``clr`` (Gamma), ``variation`` (T)
    or ``generic``.
    """

    values: np.ndarray
    kind: str = "generic"
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {values.shape}")
        if self.kind not in COV_KINDS:
            raise DomainError(f"unknown covariance kind {self.kind!r}")
        if self.check:
            scale = max(1.0, float(np.abs(values).max(initial=0.0)))
            if np.abs(values - values.T).max(initial=0.0) > SYMMETRY_TOL * scale:
                raise DomainError("matrix is not symmetric")
            if self.kind == "variation":
                if np.any(np.diag(values) != 0) or np.any(values < 0):
                    raise DomainError(
                        "variation matrix needs zero diagonal and nonnegative entries"
                    )
            if self.kind == "clr":
                rs = np.abs(values.sum(axis=1)).max(initial=0.0)
                if rs > CLR_ROW_SUM_TOL * scale:
                    raise DomainError(f"clr matrix row sums deviate from zero by {rs:g}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self):
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True)
class Rank2Component:
    """Vector ``alpha`` inducing the rank-2 matrix alpha 1^T + 1 alpha^T."""

    alpha: np.ndarray

    def matrix(self) -> np.ndarray:
        a = np.asarray(self.alpha, dtype=float)
        return a[:, None] + a[None, :]


def clr(x) -> np.ndarray:
    """Centered log-ratio scores log(x_kj / g(x_k)), g the geometric mean."""
    values = np.asarray(x.values if isinstance(x, CompositionMatrix) else x, dtype=float)
    _check_positive(np.atleast_2d(values))
    logs = np.log(values)
    return logs - logs.mean(axis=-1, keepdims=True)


def sample_covariance(z) -> np.ndarray:
    """Covariance of the columns of ``z`` with divisor n, exactly symmetric."""
    z = np.asarray(z, dtype=float)
    zc = z - z.mean(axis=0)
    return _symmetrize(zc.T @ zc / z.shape[0])


def clr_cov_direct(x) -> CovMatrix:
    """Sample clr covariance, computed directly from the clr scores."""
    x = as_composition(x)
    return CovMatrix(sample_covariance(clr(x)), kind="clr")


def variation_matrix(x) -> CovMatrix:
    """Sample variation matrix: variances of all pairwise log-ratios.

    Entry (i, j) is the divisor-n variance of log(X_ki / X_kj) over samples.
    Only i < j is computed; the lower triangle is mirrored.
    """
    x = as_composition(x)
    logs = np.log(x.values)
    lc = logs - logs.mean(axis=0)
    p = x.p
    t = np.zeros((p, p))
    for i in range(p - 1):
        d = lc[:, i : i + 1] - lc[:, i + 1 :]
        t[i, i + 1 :] = np.mean(d * d, axis=0)
    t = t + t.T
    return CovMatrix(t, kind="variation")


def rank2_project(t) -> Rank2Component:
    """Project a variation matrix onto {alpha 1^T + 1 alpha^T}.

    alpha_i is the i-th row mean minus half the grand mean.
    """
    t = np.asarray(t, dtype=float)
    row_means = t.mean(axis=1)
    return Rank2Component(row_means - t.mean() / 2.0)


def clr_from_variation(t) -> CovMatrix:
    """Residual -(T - alpha 1^T - 1 alpha^T)/2 of the rank-2 projection."""
    t = np.asarray(t, dtype=float)
    resid = -(t - rank2_project(t).matrix()) / 2.0
    return CovMatrix(_symmetrize(resid), kind="clr")


def clr_cov_via_variation(x) -> CovMatrix:
    """Sample clr covariance obtained from the variation matrix route."""
    return clr_from_variation(variation_matrix(x).values)


def basis_to_clr_population(omega) -> CovMatrix:
    """Exact clr covariance implied by a basis covariance.

    gamma_ij = omega_ij - mean_i. - mean_.j + mean_.. (double centering).
    """
    w = np.asarray(omega, dtype=float)
    rm = w.mean(axis=1)
    cm = w.mean(axis=0)
    g = w - rm[:, None] - cm[None, :] + w.mean()
    return CovMatrix(_symmetrize(g), kind="clr")


def variation_matrix_population(omega) -> CovMatrix:
    """tau_ij = omega_ii + omega_jj - 2 omega_ij."""
    w = np.asarray(omega, dtype=float)
    d = np.diag(w)
    t = d[:, None] + d[None, :] - 2.0 * w
    np.fill_diagonal(t, 0.0)
    return CovMatrix(_symmetrize(t), kind="variation", check=False)


def nonidentifiable_pair(p: int, c: float) -> tuple[CovMatrix, CovMatrix]:
    """Two distinct basis covariances with identical variation matrices.

    Taxon 0 is linked to a block of size floor((p-1)/2) with covariance c in
    the first matrix, and to the remaining block with covariance -c in the
    second; the diagonal entry of taxon 0 is 1+c and 1-c respectively.
    """
    if int(p) != p or p < 5:
        raise DomainError(f"p must be an integer >= 5, got {p!r}")
    if not 0 < abs(c) < 1:
        raise DomainError(f"need 0 < |c| < 1, got {c!r}")
    p = int(p)
    p1 = (p - 1) // 2
    om1 = np.eye(p)
    om2 = np.eye(p)
    om1[0, 0] = 1 + c
    om1[0, 1 : 1 + p1] = c
    om1[1 : 1 + p1, 0] = c
    om2[0, 0] = 1 - c
    om2[0, 1 + p1 :] = -c
    om2[1 + p1 :, 0] = -c
    return CovMatrix(om1, kind="basis"), CovMatrix(om2, kind="basis")
