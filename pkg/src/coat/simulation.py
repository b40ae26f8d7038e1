"""Simulation bench: data generators, competing estimators and metrics.

Two covariance models for the log-basis:

* ``identity``: Omega0 = I_p
* ``sparse_block``: Omega0 = diag(A1, A2) with A1 = B + eps I on the first
  floor(2 sqrt(p)) taxa (B sparse with entries of magnitude in [0.5, 1])
  and A2 = 4 I on the rest.

Log-bases are drawn either multivariate normal or as a linear transform of
independent Gamma(10, 1) variables scaled to unit variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compositional import CompositionMatrix, CovMatrix, clr, sample_covariance
from .errors import ConfigurationError, DomainError
from .estimator import ThresholdRule, covariance_and_theta, threshold_matrix
from .parallel import derive_seed, map_ordered, rng_for
from .selection import DEFAULT_FOLDS, cross_validate_scores, threshold_ratios

MODELS = {"1": "identity", "identity": "identity", "2": "sparse_block", "sparse_block": "sparse_block"}
DISTS = ("normal", "gamma")
METHODS = ("coat", "oracle", "log_naive", "raw_naive")
METRICS = ("l1", "spectral", "frobenius", "tpr", "fpr")
RULES = ("hard", "soft")
GAMMA_SHAPE = 10.0
ROC_MAX_KNOTS = 2000


def normalize_model(model) -> str:
    key = str(model).lower()
    if key not in MODELS:
        raise ConfigurationError(f"unknown model {model!r}; use 1/identity or 2/sparse_block")
    return MODELS[key]


@dataclass(frozen=True)
class SimConfig:
    model: str = "sparse_block"
    dist: str = "normal"
    n: int = 100
    p: int = 50
    seed: int = 0
    reps: int = 1

    def __post_init__(self):
        object.__setattr__(self, "model", normalize_model(self.model))
        if self.dist not in DISTS:
            raise ConfigurationError(f"unknown distribution {self.dist!r}")
        if self.n < 2 or self.p < 5 or self.reps < 1:
            raise ConfigurationError("need n >= 2, p >= 5 and reps >= 1")


@dataclass(frozen=True)
class SupportMetrics:
    tpr: float
    fpr: float


@dataclass(frozen=True)
class LossReport:
    l1: float
    spectral: float
    frobenius: float


# ---------------------------------------------------------------- generators


def block_sizes(p: int) -> tuple[int, int]:
    p1 = math.isqrt(4 * p)  # floor(2 sqrt(p)) without rounding error
    return p1, p - p1


def generate_omega0(model, p: int, seed) -> CovMatrix:
    """Basis covariance for the identity or sparse block model."""
    model = normalize_model(model)
    if p < 5:
        raise ConfigurationError(f"p must be >= 5, got {p}")
    if model == "identity":
        return CovMatrix(np.eye(p), kind="basis")
    rng = np.random.default_rng(seed)
    p1, p2 = block_sizes(p)
    il = np.tril_indices(p1, k=-1)
    m = il[0].size
    nonzero = rng.random(m) < 0.2
    magnitude = rng.uniform(0.5, 1.0, m)
    sign = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    b = np.zeros((p1, p1))
    b[il] = np.where(nonzero, sign * magnitude, 0.0)
    b = b + b.T
    eps = max(-np.linalg.eigvalsh(b)[0], 0.0) + 0.01
    omega = np.zeros((p, p))
    omega[:p1, :p1] = b + eps * np.eye(p1)
    omega[p1:, p1:] = 4.0 * np.eye(p2)
    return CovMatrix(omega, kind="basis")


def factorize(omega) -> np.ndarray:
    """F with F F^T = Omega, F = Q S^(1/2) from the eigendecomposition."""
    omega = np.asarray(omega, dtype=float)
    s, q = np.linalg.eigh(omega)
    if s[0] <= 0:
        raise DomainError(f"covariance is not positive definite (min eigenvalue {s[0]:g})")
    return q * np.sqrt(s)


def sample_bases(n: int, mu, omega0, dist: str = "normal", seed=None) -> np.ndarray:
    """Draw an n x p log-basis matrix with mean shift ``mu`` and covariance Omega0.

    ``mu=None`` draws its components from U[0, 10]. ``seed`` may be an int or
    a Generator.
    """
    rng = np.random.default_rng(seed)
    f = factorize(omega0)
    p = f.shape[0]
    mu = rng.uniform(0.0, 10.0, p) if mu is None else np.asarray(mu, dtype=float)
    if dist == "normal":
        u = rng.standard_normal((n, p))
    elif dist == "gamma":
        u = rng.gamma(GAMMA_SHAPE, 1.0, (n, p)) / math.sqrt(GAMMA_SHAPE)
    else:
        raise ConfigurationError(f"unknown distribution {dist!r}")
    return mu + u @ f.T


def bases_to_composition(y, sample_ids=None, taxon_ids=None) -> CompositionMatrix:
    """W = exp(Y) normalized to unit row sums."""
    y = np.asarray(y, dtype=float)
    w = np.exp(y - y.max(axis=1, keepdims=True))
    return CompositionMatrix(w / w.sum(axis=1, keepdims=True), sample_ids, taxon_ids)


def synthetic_count_table(n: int, p: int, seed: int, depth: int = 9265, dist: str = "normal"):
    """Multinomial read counts drawn from sparse-block compositions.

    Returns (counts, omega0). Useful for exercising the ingestion path.
    """
    omega0 = generate_omega0("sparse_block", p, seed)
    rng = rng_for(seed, 7)
    x = bases_to_composition(sample_bases(n, None, omega0, dist, rng))
    counts = np.vstack([rng.multinomial(depth, row / row.sum()) for row in x.values])
    return counts, omega0


# ---------------------------------------------------------------- estimators


def method_scores(method: str, y=None, x=None) -> np.ndarray:
    """Data matrix whose covariance each method thresholds."""
    if method == "oracle":
        if y is None:
            raise ConfigurationError("the oracle estimator needs the log-basis")
        return np.asarray(y, dtype=float)
    xv = np.asarray(x.values if isinstance(x, CompositionMatrix) else x, dtype=float)
    if method == "coat":
        return clr(xv)
    if method == "log_naive":
        return np.log(xv)
    if method == "raw_naive":
        return xv
    raise ConfigurationError(f"unknown method {method!r}")


def thresholded_covariance(z, lam: float, rule, preserve_diagonal: bool = False) -> np.ndarray:
    """Adaptive thresholding of the sample covariance of ``z``."""
    cov, theta = covariance_and_theta(z)
    return threshold_matrix(cov, np.sqrt(theta), lam, ThresholdRule.parse(rule), preserve_diagonal)


def naive_estimators(x, lam: float, rule="hard") -> dict:
    """Thresholded sample covariances of log X (``omega_l``) and X (``omega_c``)."""
    return {
        "omega_l": CovMatrix(thresholded_covariance(method_scores("log_naive", x=x), lam, rule), kind="generic"),
        "omega_c": CovMatrix(thresholded_covariance(method_scores("raw_naive", x=x), lam, rule), kind="generic"),
    }


def oracle_estimator(y, lam: float, rule="hard") -> CovMatrix:
    """Thresholded sample covariance of the (unobservable) log-basis."""
    return CovMatrix(thresholded_covariance(y, lam, rule), kind="basis")


# ---------------------------------------------------------------- metrics


def support_metrics(estimate, truth) -> SupportMetrics:
    """TPR and FPR of the off-diagonal support (i < j)."""
    est = np.asarray(estimate)
    tru = np.asarray(truth)
    iu = np.triu_indices(tru.shape[0], k=1)
    e = est[iu] != 0
    t = tru[iu] != 0
    n_pos = int(t.sum())
    n_neg = t.size - n_pos
    tpr = 1.0 if n_pos == 0 else float(np.sum(e & t)) / n_pos
    fpr = 0.0 if n_neg == 0 else float(np.sum(e & ~t)) / n_neg
    return SupportMetrics(tpr, fpr)


def sign_agreement(estimate, truth) -> float:
    """Fraction of true off-diagonal edges whose estimated sign matches."""
    est = np.asarray(estimate)
    tru = np.asarray(truth)
    iu = np.triu_indices(tru.shape[0], k=1)
    t = tru[iu]
    on = t != 0
    if not on.any():
        return 1.0
    return float(np.mean(np.sign(est[iu][on]) == np.sign(t[on])))


def matrix_losses(estimate, truth) -> LossReport:
    d = np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float)
    return LossReport(
        l1=float(np.abs(d).sum(axis=0).max()),
        spectral=float(np.linalg.norm(d, 2)),
        frobenius=float(np.sqrt(np.sum(d * d))),
    )


def theory_lambda(n: int, p: int, s0: float, c1: float, c2: float) -> float:
    """Tuning parameter of the form c1 sqrt(log p / n) + c2 s0 / p."""
    return c1 * math.sqrt(math.log(p) / n) + c2 * s0 / p


def row_sparsity(omega) -> int:
    """Largest number of nonzero entries in a row."""
    return int(np.max(np.count_nonzero(np.asarray(omega), axis=1)))


# ---------------------------------------------------------------- ROC


@dataclass(frozen=True)
class RocPoint:
    lam: float
    fpr: float
    tpr: float


def roc_grid(z, max_knots: int = ROC_MAX_KNOTS) -> np.ndarray:
    """Zero plus every distinct off-diagonal ratio |cov|/sqrt(theta)."""
    cov, theta = covariance_and_theta(z)
    knots = np.unique(threshold_ratios(cov, theta))
    knots = knots[knots > 0]
    if knots.size > max_knots:
        idx = np.unique(np.round(np.linspace(0, knots.size - 1, max_knots)).astype(int))
        knots = knots[idx]
    return np.concatenate([[0.0], knots])


def roc_curve(data, truth, rule="hard", grid=None, method: str = "coat") -> list[RocPoint]:
    """Support-recovery ROC points, one per lambda in increasing order.

    ``data`` is a composition for coat/log_naive/raw_naive and the log-basis
    for oracle.
    """
    if method == "oracle":
        z = method_scores("oracle", y=data)
    else:
        z = method_scores(method, x=data)
    rule = ThresholdRule.parse(rule)
    cov, theta = covariance_and_theta(z)
    sqrt_theta = np.sqrt(theta)
    grid = roc_grid(z) if grid is None else np.sort(np.asarray(grid, dtype=float))
    points = []
    for lam in grid:
        est = threshold_matrix(cov, sqrt_theta, lam, rule)
        m = support_metrics(est, truth)
        points.append(RocPoint(float(lam), m.fpr, m.tpr))
    return points


def auc(points) -> float:
    """Trapezoidal area under (fpr, tpr) points, closed at (0,0) and (1,1)."""
    xy = sorted({(0.0, 0.0), (1.0, 1.0), *((pt.fpr, pt.tpr) for pt in points)})
    x = np.array([a for a, _ in xy])
    y = np.array([b for _, b in xy])
    return float(np.trapezoid(y, x)) if hasattr(np, "trapezoid") else float(np.trapz(y, x))


# ---------------------------------------------------------------- spurious correlations

TRANSFORMS = ("y", "clr", "log_x", "x")


def sample_correlation(z) -> np.ndarray:
    cov = sample_covariance(z)
    d = np.sqrt(np.diag(cov))
    return cov / np.outer(d, d)


def spurious_correlation_study(config: SimConfig) -> dict:
    """Off-diagonal sample correlations under four transformations.

    Returns ``{"samples": {transform: array}, "summary": {transform: dict}}``
    pooled over ``config.reps`` replications of the identity model.
    """
    omega0 = np.eye(config.p)
    pooled = {t: [] for t in TRANSFORMS}
    iu = np.triu_indices(config.p, k=1)
    for rep in range(config.reps):
        rng = rng_for(config.seed, 3, rep)
        y = sample_bases(config.n, None, omega0, config.dist, rng)
        x = bases_to_composition(y).values
        for name, z in (("y", y), ("clr", clr(x)), ("log_x", np.log(x)), ("x", x)):
            pooled[name].append(sample_correlation(z)[iu])
    samples = {t: np.concatenate(v) for t, v in pooled.items()}
    summary = {t: correlation_summary(v) for t, v in samples.items()}
    return {"samples": samples, "summary": summary}


def correlation_summary(values) -> dict:
    q = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {
        "min": float(q[0]),
        "q25": float(q[1]),
        "median": float(q[2]),
        "q75": float(q[3]),
        "max": float(q[4]),
        "mean": float(np.mean(values)),
    }


# ---------------------------------------------------------------- replications


@dataclass
class SimulationResult:
    config: SimConfig
    omega0: CovMatrix
    rows: list = field(default_factory=list)  # (rep, method, rule, metric, value)
    lambdas: list = field(default_factory=list)  # (rep, method, rule, lambda)

    def values(self, method: str, rule: str, metric: str) -> np.ndarray:
        return np.array([
            v for (_, m, r, k, v) in self.rows if m == method and r == rule and k == metric
        ])

    def summary(self) -> list:
        """(method, rule, metric, mean, standard error) per combination."""
        out = []
        for method in METHODS:
            for rule in RULES:
                for metric in METRICS:
                    v = self.values(method, rule, metric)
                    if v.size == 0:
                        continue
                    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("nan")
                    out.append((method, rule, metric, float(np.mean(v)), se))
        return out


def run_replication(
    config: SimConfig,
    omega0,
    rep: int,
    methods=METHODS,
    rules=RULES,
    folds: int = DEFAULT_FOLDS,
    preserve_diagonal: bool = False,
):
    """One simulated dataset scored by every (method, rule) pair."""
    omega0 = np.asarray(omega0)
    rng = rng_for(config.seed, 1, rep)
    y = sample_bases(config.n, None, omega0, config.dist, rng)
    x = bases_to_composition(y)
    cv_seed = derive_seed(config.seed, 2, rep)
    rows, lambdas = [], []
    for method in methods:
        z = method_scores(method, y=y, x=x)
        for rule in rules:
            cv = cross_validate_scores(z, folds=folds, rule=rule, seed=cv_seed,
                                       preserve_diagonal=preserve_diagonal)
            est = thresholded_covariance(z, cv.chosen_lambda, rule, preserve_diagonal)
            loss = matrix_losses(est, omega0)
            sup = support_metrics(est, omega0)
            for metric, value in zip(METRICS, (loss.l1, loss.spectral, loss.frobenius, sup.tpr, sup.fpr)):
                rows.append((rep, method, rule, metric, value))
            lambdas.append((rep, method, rule, cv.chosen_lambda))
    return rows, lambdas


def run_simulation(
    config: SimConfig,
    methods=METHODS,
    rules=RULES,
    folds: int = DEFAULT_FOLDS,
    threads: int | None = None,
    preserve_diagonal: bool = False,
) -> SimulationResult:
    """All replications of ``config``.

    Omega0 is drawn once from ``config.seed``; each replication draws its own
    mean vector and data from a stream keyed by (seed, rep).
    """
    omega0 = generate_omega0(config.model, config.p, config.seed)
    out = map_ordered(
        lambda rep: run_replication(config, omega0.values, rep, methods, rules, folds, preserve_diagonal),
        range(config.reps),
        threads,
    )
    result = SimulationResult(config, omega0)
    for rows, lambdas in out:
        result.rows.extend(rows)
        result.lambdas.extend(lambdas)
    return result
