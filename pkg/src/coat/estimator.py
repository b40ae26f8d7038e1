"""Adaptive thresholding of the sample clr covariance (COAT)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compositional import CovMatrix, _symmetrize, as_composition, clr
from .errors import DomainError, ParameterError

RULE_ALIASES = {
    "hard": "hard",
    "soft": "soft",
    "al": "adaptive_lasso",
    "adaptive_lasso": "adaptive_lasso",
    "adaptive-lasso": "adaptive_lasso",
}


@dataclass(frozen=True)
class ThresholdRule:
    """A thresholding function S_lam.

    Every rule maps |z| <= lam to 0 and moves z by at most lam.

    * ``hard``: z if |z| > lam else 0
    * ``soft``: sgn(z) (|z| - lam)_+
    * ``adaptive_lasso``: z (1 - |lam/z|^eta)_+, eta >= 1
    """

    kind: str = "hard"
    eta: float = 1.0

    def __post_init__(self):
        kind = RULE_ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise ParameterError(f"unknown threshold rule {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not np.isfinite(self.eta) or self.eta < 1:
            raise ParameterError(f"eta must be >= 1, got {self.eta!r}")
        object.__setattr__(self, "eta", float(self.eta))

    @classmethod
    def parse(cls, rule) -> "ThresholdRule":
        if isinstance(rule, ThresholdRule):
            return rule
        return cls(rule)

    def __call__(self, z, lam):
        return threshold(z, lam, self)

    def __str__(self):
        if self.kind == "adaptive_lasso":
            return f"adaptive_lasso(eta={self.eta:g})"
        return self.kind


def threshold(z, lam, rule: ThresholdRule | str = "hard") -> np.ndarray:
    """Apply ``rule`` elementwise with (broadcastable) thresholds ``lam``."""
    rule = ThresholdRule.parse(rule)
    z = np.asarray(z, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ParameterError("thresholds must be nonnegative")
    az = np.abs(z)
    keep = az > lam
    if rule.kind == "hard":
        out = np.where(keep, z, 0.0)
    elif rule.kind == "soft":
        out = np.where(keep, np.sign(z) * (az - lam), 0.0)
    else:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            shrink = 1.0 - (lam / az) ** rule.eta
            out = np.where(keep, z * shrink, 0.0)
    return out


def apply_threshold(z: float, lam: float, rule: ThresholdRule | str = "hard") -> float:
    """Scalar version of :func:`threshold`."""
    if lam < 0:
        raise ParameterError(f"lambda must be >= 0, got {lam!r}")
    return float(threshold(z, lam, rule))


@dataclass(frozen=True)
class ThetaMatrix:
    """Estimated variances theta_ij of the products of centred scores."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if np.any(values < 0):
            raise DomainError("theta must be nonnegative")
        if not np.array_equal(values, values.T):
            raise DomainError("theta must be symmetric")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def covariance_and_theta(z) -> tuple[np.ndarray, np.ndarray]:
    """Sample covariance of the columns of ``z`` and the variance of each entry.

    With centred scores c_k, the covariance is mean_k c_ki c_kj and theta_ij is
    mean_k (c_ki c_kj - cov_ij)^2, both with divisor n.
    """
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    zc = z - z.mean(axis=0)
    cov = _symmetrize(zc.T @ zc / n)
    sq = zc * zc
    theta = _symmetrize(sq.T @ sq / n) - cov * cov
    np.maximum(theta, 0.0, out=theta)
    return cov, theta


def estimate_theta(x) -> ThetaMatrix:
    """Entry-wise variance estimates for the sample clr covariance."""
    x = as_composition(x)
    _, theta = covariance_and_theta(clr(x))
    return ThetaMatrix(theta)


def threshold_matrix(
    cov: np.ndarray,
    sqrt_theta: np.ndarray,
    lam: float,
    rule: ThresholdRule,
    preserve_diagonal: bool = False,
) -> np.ndarray:
    """Threshold each entry of ``cov`` at ``lam * sqrt_theta``."""
    out = threshold(cov, lam * sqrt_theta, rule)
    if preserve_diagonal:
        np.fill_diagonal(out, np.diag(cov))
    return out


def nnz_offdiag(m) -> int:
    """Number of nonzero entries strictly above the diagonal."""
    m = np.asarray(m)
    iu = np.triu_indices(m.shape[0], k=1)
    return int(np.count_nonzero(m[iu]))


@dataclass(frozen=True)
class CoatEstimate:
    omega_hat: CovMatrix
    lam: float
    rule: ThresholdRule
    theta: ThetaMatrix
    nnz_offdiag: int
    preserve_diagonal: bool = False


def coat(
    x,
    lam: float,
    rule: ThresholdRule | str = "hard",
    preserve_diagonal: bool = False,
    theta=None,
) -> CoatEstimate:
    """Composition-adjusted thresholding estimate of the basis covariance.

    Entry (i, j) of the sample clr covariance is passed through ``rule`` with
    threshold ``lam * sqrt(theta_ij)``. The diagonal is thresholded too unless
    ``preserve_diagonal`` is set.

    ``theta`` overrides the estimated entry variances; passing an all-ones
    matrix gives universal thresholding.
    """
    if lam < 0:
        raise ParameterError(f"lambda must be >= 0, got {lam!r}")
    rule = ThresholdRule.parse(rule)
    x = as_composition(x)
    gamma, theta_hat = covariance_and_theta(clr(x))
    if theta is not None:
        theta_hat = np.asarray(theta, dtype=float)
        if theta_hat.shape != gamma.shape:
            raise ParameterError("theta override has the wrong shape")
    omega = threshold_matrix(gamma, np.sqrt(theta_hat), lam, rule, preserve_diagonal)
    return CoatEstimate(
        omega_hat=CovMatrix(omega, kind="basis"),
        lam=float(lam),
        rule=rule,
        theta=ThetaMatrix(theta_hat),
        nnz_offdiag=nnz_offdiag(omega),
        preserve_diagonal=preserve_diagonal,
    )


def min_eigenvalue(m) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.T).max(initial=0.0) > 1e-10 * scale:
        raise DomainError("matrix is not symmetric")
    return float(np.linalg.eigvalsh(_symmetrize(m))[0])
