"""Entry distributions, covariance specs, and reproducible streams."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hidimtest.covstats import DataMatrix, classic_covariance, clrt_statistic
from hidimtest.datagen import (
    CovarianceSpec,
    EntryDistribution,
    RngStream,
    centered_gamma,
    centered_uniform,
    make_covariance,
    sample_entries,
    shifted_normal,
    std_normal,
    synthesize,
    two_point,
    two_point_delta,
)

BIG = 1_000_000


def _draws(dist, count=BIG, seed=314):
    return dist.sample(1, count, RngStream(seed).generator()).ravel()


# ---------------------------------------------------------------------------
# Standardization and kurtosis

@pytest.mark.parametrize("dist", [
    std_normal(), centered_gamma(4.0, 0.5), centered_gamma(2.0, 3.0),
    centered_uniform(), centered_uniform(5.0), two_point(0.5),
    two_point(0.2), two_point(0.8),
])
def test_standardized_mean_and_variance(dist):
    draws = _draws(dist)
    assert abs(draws.mean()) < 4.0 / math.sqrt(BIG)
    assert abs(draws.var() - 1.0) < 10.0 / math.sqrt(BIG)


@pytest.mark.parametrize("dist,tol", [
    (std_normal(), 0.05), (centered_gamma(4.0, 0.5), 0.15),
    (centered_uniform(), 0.05), (two_point(0.2), 0.05),
])
def test_sample_kurtosis_matches_delta(dist, tol):
    draws = _draws(dist)
    sample_delta = float(np.mean(draws**4) - 3.0)
    assert sample_delta == pytest.approx(dist.delta, abs=tol)


def test_shifted_normal_keeps_its_mean():
    dist = shifted_normal(0.25)
    assert dist.mean == 0.25
    assert dist.delta == 0.0
    draws = _draws(dist, count=200_000)
    assert draws.mean() == pytest.approx(0.25, abs=0.01)
    assert draws.var() == pytest.approx(1.0, abs=0.02)


def test_std_normal_desk_scale_moments():
    draws = std_normal().sample(1000, 1000, RngStream(99).generator()).ravel()
    assert abs(draws.mean()) < 0.01
    assert abs(draws.var() - 1.0) < 0.02
    assert np.mean(draws**4) == pytest.approx(3.0, abs=0.1)


# ---------------------------------------------------------------------------
# Two-point law

def test_two_point_support_is_exact():
    gamma = 0.3
    draws = _draws(two_point(gamma), count=100_000)
    low = -math.sqrt((1 - gamma) / gamma)
    high = math.sqrt(gamma / (1 - gamma))
    assert set(np.unique(draws)) == {low, high}
    assert np.mean(draws == low) == pytest.approx(gamma, abs=0.01)


def test_two_point_delta_values():
    assert two_point_delta(0.5) == pytest.approx(-2.0, abs=1e-15)
    draws = _draws(two_point(0.2))
    assert float(np.mean(draws**4) - 3.0) == pytest.approx(
        two_point_delta(0.2), abs=0.05)
    with pytest.raises(ValueError):
        two_point_delta(0.0)
    with pytest.raises(ValueError):
        two_point_delta(1.0)


@settings(deadline=None, max_examples=50)
@given(st.floats(0.01, 0.99))
def test_two_point_delta_symmetry(gamma):
    assert two_point_delta(gamma) == pytest.approx(
        two_point_delta(1.0 - gamma), rel=1e-9, abs=1e-12)


@settings(deadline=None, max_examples=30)
@given(st.floats(0.5, 40.0), st.floats(0.05, 5.0))
def test_gamma_delta_is_six_over_shape(shape, scale):
    assert centered_gamma(shape, scale).delta == pytest.approx(6.0 / shape)


def test_delta_fields_match_analytic_values():
    assert std_normal().delta == 0.0
    assert centered_gamma(4.0, 0.5).delta == pytest.approx(1.5)
    assert centered_uniform().delta == pytest.approx(-1.2)
    assert two_point(0.09).delta == pytest.approx(two_point_delta(0.09))


# ---------------------------------------------------------------------------
# Parameter validation and serialization

def test_distribution_validation():
    with pytest.raises(ValueError):
        EntryDistribution("nonsense")
    with pytest.raises(ValueError):
        centered_gamma(-1.0, 0.5)
    with pytest.raises(ValueError):
        centered_uniform(0.0)
    with pytest.raises(ValueError):
        two_point(1.0)
    with pytest.raises(ValueError):
        EntryDistribution("std_normal", (1.0,))


def test_distribution_dict_round_trip():
    for dist in (std_normal(), shifted_normal(0.25),
                 centered_gamma(4.0, 0.5), centered_uniform(), two_point(0.3)):
        assert EntryDistribution.from_dict(dist.to_dict()) == dist
    with pytest.raises(ValueError):
        EntryDistribution.from_dict({"kind": "std_normal", "slope": 3})
    with pytest.raises(ValueError):
        EntryDistribution.from_dict({"kind": "elsewhere"})


def test_labels_are_compact():
    assert std_normal().label == "std_normal"
    assert centered_gamma(4.0, 0.5).label == "centered_gamma(4,0.5)"
    assert two_point(0.5).label == "two_point(0.5)"


# ---------------------------------------------------------------------------
# Covariance specs

def test_make_covariance_identity():
    spec = CovarianceSpec.identity(5)
    sigma, root = make_covariance(spec)
    np.testing.assert_array_equal(sigma, np.eye(5))
    np.testing.assert_array_equal(root, np.eye(5))
    assert spec.is_identity


def test_spiked_truncation_counts():
    diag10 = CovarianceSpec.spiked(10, 1.5).diagonal_entries()
    assert list(diag10[:3]) == [1.5, 1.5, 1.0]  # floor(0.2 * 10) = 2 spikes
    diag7 = CovarianceSpec.spiked(7, 0.5).diagonal_entries()
    assert list(diag7[:2]) == [0.5, 1.0]  # floor(1.4) = 1 spike
    assert not CovarianceSpec.spiked(10, 1.5).is_identity


def test_diagonal_spec_and_sqrt():
    spec = CovarianceSpec.diagonal([4.0, 9.0])
    sigma, root = make_covariance(spec)
    np.testing.assert_array_equal(np.diag(sigma), [4.0, 9.0])
    np.testing.assert_array_equal(np.diag(root), [2.0, 3.0])
    assert CovarianceSpec.diagonal([1.0, 1.0]).is_identity
    with pytest.raises(ValueError):
        CovarianceSpec.diagonal([1.0, -2.0])
    with pytest.raises(ValueError):
        CovarianceSpec("diagonal", 3, values=(1.0, 2.0))


def test_covariance_dict_round_trip():
    spec = CovarianceSpec.spiked(10, 1.5)
    assert CovarianceSpec.from_dict(spec.to_dict(), 10) == spec
    assert CovarianceSpec.from_dict({"kind": "identity"}, 4) == \
        CovarianceSpec.identity(4)
    with pytest.raises(ValueError):
        CovarianceSpec.from_dict({"kind": "diagonal", "values": [1.0]}, 3)


# ---------------------------------------------------------------------------
# Streams and synthesis

def test_streams_reproduce_bitwise_and_differ_across_ids():
    a = sample_entries(std_normal(), 5, 7, RngStream(1, 2)).values
    b = sample_entries(std_normal(), 5, 7, RngStream(1, 2)).values
    c = sample_entries(std_normal(), 5, 7, RngStream(1, 3)).values
    d = sample_entries(std_normal(), 5, 7, RngStream(2, 2)).values
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    assert RngStream(1).algorithm == "philox"


def test_stream_validation():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(0, -5)


def test_synthesize_identity_zero_mean_is_entries():
    X = synthesize(std_normal(), CovarianceSpec.identity(6), 0.0, 6, 9,
                   RngStream(8, 1))
    Y = sample_entries(std_normal(), 6, 9, RngStream(8, 1))
    np.testing.assert_array_equal(X.values, Y.values)


def test_synthesize_scales_rows_by_sqrt_variance():
    X = synthesize(std_normal(), CovarianceSpec.spiked(10, 1.5), 0.0,
                   10, 100_000, RngStream(21, 0))
    assert np.var(X.values[0]) == pytest.approx(1.5, abs=0.05)
    assert np.var(X.values[1]) == pytest.approx(1.5, abs=0.05)
    assert np.var(X.values[2]) == pytest.approx(1.0, abs=0.05)
    assert np.var(X.values[-1]) == pytest.approx(1.0, abs=0.05)


def test_synthesize_mean_shift_invisible_to_classic_statistic():
    base = synthesize(std_normal(), CovarianceSpec.identity(5), 0.0, 5, 60,
                      RngStream(31, 4))
    moved = synthesize(std_normal(), CovarianceSpec.identity(5), 2.5, 5, 60,
                       RngStream(31, 4))
    np.testing.assert_allclose(moved.values - base.values, 2.5, atol=1e-12)
    raw0 = clrt_statistic(classic_covariance(base)).raw
    raw1 = clrt_statistic(classic_covariance(moved)).raw
    assert raw1 == pytest.approx(raw0, abs=1e-10)


def test_synthesize_dimension_checks():
    with pytest.raises(ValueError):
        synthesize(std_normal(), CovarianceSpec.identity(4), 0.0, 5, 10,
                   RngStream(0))
    with pytest.raises(ValueError):
        synthesize(std_normal(), CovarianceSpec.identity(5),
                   np.zeros(4), 5, 10, RngStream(0))
