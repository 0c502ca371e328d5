"""Estimators and statistics: brute-force oracles and exact fixtures."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import helmert

from hidimtest.covstats import (
    CovarianceKind,
    DataMatrix,
    StatisticKind,
    classic_covariance,
    clrt_statistic,
    estimate_excess_kurtosis,
    legacy_lw_statistic,
    lw_correction,
    lw_statistic,
    scaled_covariance,
    simplified_covariance,
    spectrum,
)
from hidimtest.errors import SingularCovariance


def brute_force_classic(X: np.ndarray) -> np.ndarray:
    """Textbook double loop: centered cross-products over n - 1."""
    p, n = X.shape
    xbar = np.array([sum(X[i]) / n for i in range(p)])
    S = np.zeros((p, p))
    for i in range(p):
        for j in range(p):
            acc = 0.0
            for k in range(n):
                acc += (X[i, k] - xbar[i]) * (X[j, k] - xbar[j])
            S[i, j] = acc / (n - 1)
    return S


def brute_force_simplified(X: np.ndarray, mu: np.ndarray) -> np.ndarray:
    p, n = X.shape
    S = np.zeros((p, p))
    for i in range(p):
        for j in range(p):
            acc = 0.0
            for k in range(n):
                acc += (X[i, k] - mu[i]) * (X[j, k] - mu[j])
            S[i, j] = acc / n
    return S


def exact_identity_data(p: int, n: int) -> DataMatrix:
    """A p x n dataset whose classic covariance is exactly I_p.

    Rows of the scaled Helmert frame are orthonormal and orthogonal to the
    ones vector, so the sample mean is 0 and S = I exactly.
    """
    frame = helmert(n)[:p]
    return DataMatrix(math.sqrt(n - 1) * frame)


# ---------------------------------------------------------------------------
# DataMatrix

def test_data_matrix_validation():
    with pytest.raises(ValueError):
        DataMatrix(np.zeros((3,)))
    with pytest.raises(ValueError):
        DataMatrix(np.array([[1.0], [2.0]]))  # single observation
    with pytest.raises(ValueError):
        DataMatrix(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_data_matrix_orientation_and_readonly():
    rows = np.arange(12.0).reshape(4, 3)  # 4 observations of 3 variables
    X = DataMatrix.from_observation_rows(rows)
    assert (X.p, X.n) == (3, 4)
    assert X.y_n == pytest.approx(0.75)
    np.testing.assert_array_equal(X.values, rows.T)
    with pytest.raises(ValueError):
        X.values[0, 0] = 99.0


# ---------------------------------------------------------------------------
# Covariance estimators

def test_classic_covariance_matches_brute_force():
    rng = np.random.default_rng(42)
    for p, n in [(2, 5), (4, 9), (6, 7)]:
        X = rng.standard_normal((p, n))
        est = classic_covariance(DataMatrix(X))
        assert est.kind is CovarianceKind.CLASSIC and est.n == n
        np.testing.assert_allclose(est.matrix, brute_force_classic(X),
                                   rtol=0, atol=1e-12)


def test_simplified_covariance_matches_brute_force():
    rng = np.random.default_rng(43)
    X = rng.standard_normal((3, 8))
    mu = rng.standard_normal(3)
    est = simplified_covariance(DataMatrix(X), mu)
    assert est.kind is CovarianceKind.SIMPLIFIED
    np.testing.assert_allclose(est.matrix, brute_force_simplified(X, mu),
                               rtol=0, atol=1e-12)
    scalar = simplified_covariance(DataMatrix(X), 0.0)
    np.testing.assert_allclose(scalar.matrix,
                               brute_force_simplified(X, np.zeros(3)),
                               rtol=0, atol=1e-12)


@settings(deadline=None, max_examples=40)
@given(st.integers(2, 6), st.integers(3, 12), st.integers(0, 2**31 - 1))
def test_scaled_is_classic_times_ratio(p, n, seed):
    X = DataMatrix(np.random.default_rng(seed).standard_normal((p, n)))
    classic = classic_covariance(X)
    scaled = scaled_covariance(X)
    assert scaled.kind is CovarianceKind.SCALED
    np.testing.assert_allclose(scaled.matrix, classic.matrix * (n - 1) / n,
                               rtol=1e-13, atol=1e-13)


@settings(deadline=None, max_examples=40)
@given(st.integers(2, 5), st.integers(4, 10), st.integers(0, 2**31 - 1),
       st.floats(-50, 50))
def test_classic_covariance_shift_invariance(p, n, seed, shift):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((p, n))
    offset = shift * np.ones((p, 1)) + rng.standard_normal((p, 1))
    base = classic_covariance(DataMatrix(X)).matrix
    moved = classic_covariance(DataMatrix(X + offset)).matrix
    np.testing.assert_allclose(moved, base, rtol=0,
                               atol=1e-10 * max(1.0, abs(shift)))


def test_simplified_covariance_rejects_bad_mean():
    X = DataMatrix(np.random.default_rng(0).standard_normal((3, 5)))
    with pytest.raises(ValueError):
        simplified_covariance(X, np.zeros(4))
    with pytest.raises(ValueError):
        simplified_covariance(X, np.array([0.0, np.inf, 0.0]))


# ---------------------------------------------------------------------------
# Log-determinant trace statistic

def test_clrt_statistic_identity_and_scaled_identity():
    X = exact_identity_data(2, 3)
    value = clrt_statistic(classic_covariance(X))
    assert value.statistic_kind is StatisticKind.NEW_CLRT
    assert value.raw == 0.0
    doubled = DataMatrix(math.sqrt(2.0) * X.values)
    value2 = clrt_statistic(classic_covariance(doubled))
    assert value2.raw == pytest.approx(1.0 - math.log(2.0), abs=1e-12)


def test_clrt_statistic_kinds():
    X = DataMatrix(np.random.default_rng(1).standard_normal((3, 12)))
    legacy = clrt_statistic(simplified_covariance(X, 0.0))
    assert legacy.statistic_kind is StatisticKind.LEGACY_CLRT
    with pytest.raises(ValueError):
        clrt_statistic(scaled_covariance(X))


def test_clrt_statistic_nonnegative_and_eigen_route():
    rng = np.random.default_rng(7)
    for _ in range(25):
        p = int(rng.integers(2, 12))
        n = int(rng.integers(p + 2, 4 * p + 4))
        est = classic_covariance(DataMatrix(rng.standard_normal((p, n))))
        value = clrt_statistic(est).raw
        eigs = spectrum(est)
        oracle = float(np.mean(eigs) - np.mean(np.log(eigs)) - 1.0)
        assert value >= 0.0
        assert value == pytest.approx(oracle, rel=1e-10, abs=1e-12)


def test_clrt_singular_when_p_exceeds_n():
    X = DataMatrix(np.random.default_rng(2).standard_normal((10, 5)))
    with pytest.raises(SingularCovariance):
        clrt_statistic(classic_covariance(X))


# ---------------------------------------------------------------------------
# Squared-deviation trace statistics

def test_lw_correction_values_and_domain():
    assert lw_correction(10, 0.0) == pytest.approx(7.0 / 81.0, abs=1e-15)
    assert lw_correction(3, 0.0) == 0.0
    # (1+delta)(n-2)(n-1) - 2 over n(n-1)^2 at n=5, delta=1.5
    assert lw_correction(5, 1.5) == pytest.approx((2.5 * 3 * 4 - 2) / (5 * 16),
                                                  abs=1e-15)
    with pytest.raises(ValueError):
        lw_correction(2, 0.0)


def test_lw_statistics_at_exact_identity():
    X = exact_identity_data(3, 10)
    uncorrected = legacy_lw_statistic(classic_covariance(X))
    corrected = lw_statistic(classic_covariance(X), delta=0.0)
    assert uncorrected.statistic_kind is StatisticKind.LEGACY_LW
    assert corrected.statistic_kind is StatisticKind.NEW_LW
    assert corrected.delta_used == 0.0
    assert uncorrected.raw == pytest.approx(-1.0 / 3.0, abs=1e-12)
    assert corrected.raw == pytest.approx(-34.0 / 81.0, abs=1e-12)


@settings(deadline=None, max_examples=40)
@given(st.integers(2, 8), st.integers(3, 15), st.integers(0, 2**31 - 1),
       st.floats(-1.9, 8.0))
def test_lw_equals_trace_route_and_correction_identity(p, n, seed, delta):
    est = classic_covariance(
        DataMatrix(np.random.default_rng(seed).standard_normal((p, n))))
    eigs = spectrum(est)
    base_oracle = float(np.mean((eigs - 1.0) ** 2)
                        - (p / (n - 1)) * np.mean(eigs) ** 2)
    uncorrected = legacy_lw_statistic(est).raw
    corrected = lw_statistic(est, delta=delta).raw
    assert uncorrected == pytest.approx(base_oracle, rel=1e-10, abs=1e-12)
    assert uncorrected - corrected == pytest.approx(lw_correction(n, delta),
                                                    rel=1e-12, abs=1e-14)


def test_lw_requires_classic_kind_and_n_at_least_3():
    X = DataMatrix(np.random.default_rng(3).standard_normal((3, 8)))
    with pytest.raises(ValueError):
        lw_statistic(simplified_covariance(X, 0.0), delta=0.0)
    tiny = DataMatrix(np.random.default_rng(3).standard_normal((3, 2)))
    with pytest.raises(ValueError):
        lw_statistic(classic_covariance(tiny), delta=0.0)


def test_lw_valid_for_p_greater_than_n():
    X = DataMatrix(np.random.default_rng(4).standard_normal((40, 8)))
    value = lw_statistic(classic_covariance(X), delta=0.0)
    assert np.isfinite(value.raw)


# ---------------------------------------------------------------------------
# Spectrum and kurtosis estimate

def test_spectrum_consistent_with_trace():
    est = classic_covariance(
        DataMatrix(np.random.default_rng(5).standard_normal((6, 20))))
    eigs = spectrum(est)
    assert eigs.shape == (6,)
    assert np.sum(eigs) == pytest.approx(np.trace(est.matrix), rel=1e-12)


def test_estimate_excess_kurtosis():
    rng = np.random.default_rng(6)
    gamma = (rng.gamma(4.0, 0.5, size=(100, 2000)) - 2.0) / 1.0
    assert estimate_excess_kurtosis(gamma) == pytest.approx(1.5, abs=0.25)
    normal = rng.standard_normal((100, 2000))
    assert estimate_excess_kurtosis(normal) == pytest.approx(0.0, abs=0.15)
