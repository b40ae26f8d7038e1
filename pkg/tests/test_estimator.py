import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coat.compositional import clr, clr_cov_direct
from coat.errors import DomainError, ParameterError
from coat.estimator import (
    ThresholdRule,
    apply_threshold,
    coat,
    covariance_and_theta,
    estimate_theta,
    min_eigenvalue,
    nnz_offdiag,
    threshold,
)

from conftest import random_composition

RULES = [ThresholdRule("hard"), ThresholdRule("soft"), ThresholdRule("al", 1.0), ThresholdRule("al", 3.0)]


def jacobi_eigenvalues(a, sweeps=100, tol=1e-14):
    """Cyclic Jacobi rotations on a symmetric matrix."""
    a = np.array(a, dtype=float)
    p = a.shape[0]
    for _ in range(sweeps):
        off = math.sqrt(sum(a[i, j] ** 2 for i in range(p) for j in range(p) if i != j))
        if off < tol:
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                if abs(a[i, j]) < 1e-300:
                    continue
                tau = (a[j, j] - a[i, i]) / (2 * a[i, j])
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1 + tau * tau))
                c = 1 / math.sqrt(1 + t * t)
                s = t * c
                r = np.eye(p)
                r[i, i] = r[j, j] = c
                r[i, j], r[j, i] = s, -s
                a = r.T @ a @ r
    return np.sort(np.diag(a))


def brute_theta(z):
    n, p = len(z), len(z[0])
    mean = [sum(z[k][j] for k in range(n)) / n for j in range(p)]
    c = [[z[k][j] - mean[j] for j in range(p)] for k in range(n)]
    cov = [[sum(c[k][i] * c[k][j] for k in range(n)) / n for j in range(p)] for i in range(p)]
    return np.array([
        [sum((c[k][i] * c[k][j] - cov[i][j]) ** 2 for k in range(n)) / n for j in range(p)]
        for i in range(p)
    ])


# ------------------------------------------------------------------ scalar rules


@pytest.mark.parametrize("rule,z,lam,expected", [
    ("hard", 0.3, 0.5, 0.0),
    ("hard", 0.7, 0.5, 0.7),
    ("hard", -0.7, 0.5, -0.7),
    ("hard", 0.5, 0.5, 0.0),
    ("soft", 0.7, 0.5, 0.2),
    ("soft", -0.7, 0.5, -0.2),
    ("soft", 0.5, 0.5, 0.0),
    ("al", 2.0, 1.0, 1.0),
    ("al", -2.0, 1.0, -1.0),
    ("hard", 0.0, 0.0, 0.0),
])
def test_rule_examples(rule, z, lam, expected):
    assert apply_threshold(z, lam, rule) == pytest.approx(expected, abs=1e-15)


def test_al_eta2():
    assert apply_threshold(2.0, 1.0, ThresholdRule("al", 2.0)) == pytest.approx(1.5)
    assert apply_threshold(4.0, 2.0, ThresholdRule("al", 2.0)) == pytest.approx(3.0)


def test_eta_below_one_rejected():
    with pytest.raises(ParameterError):
        ThresholdRule("al", 0.5)


def test_negative_lambda_rejected():
    with pytest.raises(ParameterError):
        apply_threshold(1.0, -0.1, "soft")


def test_unknown_rule_rejected():
    with pytest.raises(ParameterError):
        ThresholdRule("scad")


@pytest.mark.parametrize("rule", RULES, ids=str)
def test_rule_conditions_on_random_draws(rule):
    rng = np.random.default_rng(2024)
    z = rng.standard_normal(100_000) * 3
    lam = rng.exponential(1.0, 100_000)
    lam[:1000] = np.abs(z[:1000])  # exact boundary
    s = threshold(z, lam, rule)
    below = np.abs(z) <= lam
    assert np.all(s[below] == 0)
    # shrinkage by at most lam, up to rounding of |z| - lam
    ulp = np.spacing(np.maximum(np.abs(z), lam))
    assert np.all(np.abs(s - z) <= lam + 4 * ulp)
    assert np.all(np.abs(s) <= np.abs(z))
    assert np.all(s * z >= 0)


@given(st.floats(-1e3, 1e3), st.floats(0, 1e3))
def test_al_eta1_equals_soft(z, lam):
    assert apply_threshold(z, lam, ThresholdRule("al", 1.0)) == pytest.approx(
        apply_threshold(z, lam, "soft"), abs=1e-9 * max(1.0, abs(z))
    )


@given(st.floats(-1e3, 1e3), st.floats(0, 1e3), st.floats(1, 5))
def test_al_between_soft_and_hard(z, lam, eta):
    a = abs(apply_threshold(z, lam, ThresholdRule("al", eta)))
    assert abs(apply_threshold(z, lam, "soft")) - 1e-9 * max(1, abs(z)) <= a <= abs(z)


# ------------------------------------------------------------------ theta and covariance


def test_theta_two_sample_oracle():
    z = [[1.0, 2.0, -1.0], [3.0, 0.5, 0.25]]
    _, theta = covariance_and_theta(np.array(z))
    np.testing.assert_allclose(theta, brute_theta(z), atol=1e-14)


def test_theta_matches_loops(rng):
    z = rng.standard_normal((13, 6))
    cov, theta = covariance_and_theta(z)
    np.testing.assert_allclose(theta, brute_theta(z.tolist()), atol=1e-12)
    np.testing.assert_allclose(cov, np.cov(z.T, bias=True), atol=1e-13)


def test_theta_symmetric_nonnegative(rng):
    th = estimate_theta(random_composition(rng, 40, 12)).values
    assert np.all(th >= 0)
    assert np.array_equal(th, th.T)


# ------------------------------------------------------------------ estimate


@pytest.mark.parametrize("rule", RULES, ids=str)
def test_lambda_zero_returns_sample_clr_covariance(rule, rng):
    x = random_composition(rng, 30, 8)
    g = clr_cov_direct(x).values
    # zero entries of theta only arise with zero covariance, so every rule is exact
    np.testing.assert_array_equal(coat(x, 0.0, rule).omega_hat.values, g)


@pytest.mark.parametrize("rule", RULES, ids=str)
def test_huge_lambda_gives_zero(rule, rng):
    x = random_composition(rng, 30, 8)
    assert np.all(coat(x, 1e6, rule).omega_hat.values == 0)


def test_huge_lambda_preserve_diagonal(rng):
    x = random_composition(rng, 30, 8)
    est = coat(x, 1e6, "hard", preserve_diagonal=True).omega_hat.values
    np.testing.assert_array_equal(est, np.diag(np.diag(clr_cov_direct(x).values)))


def test_estimate_symmetric(rng):
    x = random_composition(rng, 25, 10)
    for rule in RULES:
        m = coat(x, 0.8, rule).omega_hat.values
        assert np.array_equal(m, m.T)


def test_universal_threshold_override(rng):
    x = random_composition(rng, 25, 6)
    g = clr_cov_direct(x).values
    est = coat(x, 0.05, "hard", theta=np.ones((6, 6))).omega_hat.values
    np.testing.assert_array_equal(est, np.where(np.abs(g) > 0.05, g, 0.0))


def test_theta_override_shape_checked(rng):
    with pytest.raises(ParameterError):
        coat(random_composition(rng, 10, 4), 0.1, theta=np.ones((3, 3)))


@given(st.integers(0, 2**32 - 1))
def test_sparsity_monotone_in_lambda(seed):
    rng = np.random.default_rng(seed)
    x = random_composition(rng, 20, 7)
    lams = np.sort(rng.uniform(0, 3, 6))
    for rule in RULES:
        counts = [coat(x, lam, rule).nnz_offdiag for lam in lams]
        assert all(a >= b for a, b in zip(counts, counts[1:]))


@given(st.integers(0, 2**32 - 1), st.floats(0, 2))
def test_support_equal_across_rules(seed, lam):
    x = random_composition(np.random.default_rng(seed), 15, 6)
    supports = [coat(x, lam, r).omega_hat.values != 0 for r in RULES]
    for s in supports[1:]:
        assert np.array_equal(s, supports[0])


@given(st.integers(0, 2**32 - 1), st.floats(0, 2))
def test_shrinkage_bounded_by_threshold(seed, lam):
    x = random_composition(np.random.default_rng(seed), 15, 6)
    for rule in RULES:
        est = coat(x, lam, rule)
        g = clr_cov_direct(x).values
        bound = lam * np.sqrt(est.theta.values)
        assert np.all(np.abs(est.omega_hat.values - g) <= bound + 1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0, 2))
def test_permutation_equivariance(seed, lam):
    rng = np.random.default_rng(seed)
    x = random_composition(rng, 15, 6)
    perm = rng.permutation(6)
    for rule in RULES:
        a = coat(x, lam, rule).omega_hat.values[np.ix_(perm, perm)]
        b = coat(x[:, perm], lam, rule).omega_hat.values
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_nnz_offdiag():
    m = np.array([[1.0, 0.2, 0.0], [0.2, 1.0, -0.1], [0.0, -0.1, 1.0]])
    assert nnz_offdiag(m) == 2


def test_clr_input_consistency(rng):
    x = random_composition(rng, 20, 5)
    est = coat(x, 0.0, "soft")
    cov, _ = covariance_and_theta(clr(x))
    np.testing.assert_array_equal(est.omega_hat.values, cov)


# ------------------------------------------------------------------ minimum eigenvalue


def test_min_eigenvalue_examples():
    assert min_eigenvalue(np.eye(3)) == pytest.approx(1.0)
    assert min_eigenvalue([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(1.0)
    m = np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]])
    assert min_eigenvalue(m) == pytest.approx(2 - math.sqrt(2), abs=1e-12)
    assert min_eigenvalue([[0.0, 1.0], [1.0, 0.0]]) == pytest.approx(-1.0)


@pytest.mark.parametrize("seed", range(5))
def test_min_eigenvalue_matches_jacobi(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((8, 8))
    a = (a + a.T) / 2
    assert min_eigenvalue(a) == pytest.approx(jacobi_eigenvalues(a)[0], abs=1e-10)


def test_min_eigenvalue_rejects_bad_shape():
    with pytest.raises(DomainError):
        min_eigenvalue(np.ones((2, 3)))
    with pytest.raises(DomainError):
        min_eigenvalue([[1.0, 2.0], [0.0, 1.0]])
