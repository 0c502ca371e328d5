"""Asymptotic null laws, standardised scores, p-values and test decisions.

Every statistic in :mod:`hidimtest.covstats` has a Gaussian limit of the form

    scale * (raw - centering)  ->  N(mean, variance)

where ``scale`` is the dimension p for the CLRT and corrected-LW statistics
and the sample size n for the uncorrected LW statistic.  All tests reject in
the upper tail: each raw statistic consistently estimates a nonnegative
discrepancy functional that vanishes exactly at the identity covariance, so
departures from the null inflate it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erfc, ndtri

from .covstats import (
    DataMatrix,
    StatisticKind,
    StatisticValue,
    classic_covariance,
    clrt_statistic,
    legacy_lw_statistic,
    lw_correction,
    lw_statistic,
    simplified_covariance,
)
from .errors import DegenerateRatio

__all__ = [
    "NullLaw",
    "TestReport",
    "clrt_centering",
    "new_clrt_null",
    "legacy_clrt_null",
    "new_lw_null",
    "legacy_lw_gaussian_null",
    "legacy_lw_finite_centering",
    "legacy_lw_missize",
    "normal_upper_tail",
    "normal_quantile",
    "run_test",
]


def normal_upper_tail(z: float) -> float:
    """P(Z > z) for standard normal Z, computed in complementary form."""
    return 0.5 * float(erfc(z / np.sqrt(2.0)))


def normal_quantile(q: float) -> float:
    """Inverse standard normal CDF."""
    return float(ndtri(q))


@dataclass(frozen=True)
class NullLaw:
    """Gaussian limit of a standardised statistic.

    ``scale`` multiplies the centered raw statistic; it is filled in from
    the data dimensions when the law is applied (``with_scale``), since the
    limiting mean and variance depend only on the ratio y.
    """

    statistic_kind: StatisticKind
    centering: float
    mean: float
    variance: float
    scale: float | None = None

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError(f"variance must be positive, got {self.variance}")

    def with_scale(self, scale: float) -> "NullLaw":
        return replace(self, scale=float(scale))

    def standardize(self, raw: float) -> float:
        """z = (scale*(raw - centering) - mean) / sqrt(variance)."""
        if self.scale is None:
            raise ValueError("law has no scale; call with_scale(p or n) first")
        return (self.scale * (raw - self.centering) - self.mean) / np.sqrt(
            self.variance
        )


@dataclass(frozen=True)
class TestReport:
    """Outcome of a single identity test on one data matrix."""

    statistic: StatisticValue
    law: NullLaw
    z_score: float
    p_value: float
    alpha: float
    reject: bool
    p: int
    n: int
    y_n: float
    delta: float


def _check_ratio(y: float) -> float:
    if not 0.0 < y < 1.0:
        raise DegenerateRatio(
            f"ratio y={y:g} outside (0,1); the CLRT laws need p < n"
        )
    return float(y)


def clrt_centering(y_n: float) -> float:
    """Deterministic centering 1 + (1/y - 1) log(1-y) of the CLRT statistic.

    Equals the integral of x - log x - 1 against the Marchenko-Pastur
    density with ratio y (the statistic's almost-sure limit).
    """
    y = _check_ratio(y_n)
    return 1.0 + (1.0 / y - 1.0) * np.log1p(-y)


def new_clrt_null(y: float, delta: float) -> NullLaw:
    """Null law of the mean-centered CLRT statistic.

    p (L - clrt_centering(y))  ->  N(y(delta/2 - 1) - (3/2) log(1-y),
                                     -2y - 2 log(1-y))
    """
    y = _check_ratio(y)
    log1my = np.log1p(-y)
    return NullLaw(
        statistic_kind=StatisticKind.NEW_CLRT,
        centering=clrt_centering(y),
        mean=y * (delta / 2.0 - 1.0) - 1.5 * log1my,
        variance=-2.0 * y - 2.0 * log1my,
    )


def legacy_clrt_null(y: float) -> NullLaw:
    """Null law of the known-mean CLRT statistic (Gaussian data only).

    Same centering and variance as the mean-centered law; the mean is
    -log(1-y)/2.
    """
    y = _check_ratio(y)
    log1my = np.log1p(-y)
    return NullLaw(
        statistic_kind=StatisticKind.LEGACY_CLRT,
        centering=clrt_centering(y),
        mean=-0.5 * log1my,
        variance=-2.0 * y - 2.0 * log1my,
    )


def new_lw_null(y: float) -> NullLaw:
    """Null law of the bias-corrected LW statistic: p W -> N(0, 4y^2).

    Valid for every y > 0, including p > n.
    """
    if y <= 0:
        raise DegenerateRatio(f"ratio y={y:g} must be positive")
    return NullLaw(
        statistic_kind=StatisticKind.NEW_LW,
        centering=0.0,
        mean=0.0,
        variance=4.0 * y * y,
    )


def legacy_lw_gaussian_null(n: int) -> NullLaw:
    """Null law of the uncorrected LW statistic under Gaussian data.

    n W_hat -> N(1, 4), so the standardised score is (n W_hat - 1)/2.
    The law silently assumes zero excess kurtosis; see
    :func:`legacy_lw_missize` for its behaviour when that fails.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    return NullLaw(
        statistic_kind=StatisticKind.LEGACY_LW,
        centering=0.0,
        mean=1.0,
        variance=4.0,
        scale=float(n),
    )


def legacy_lw_finite_centering(n: int) -> float:
    """Gaussian finite-n centering ((n-2)(n-1) - 2) / (n (n-1)^2).

    Subtracting this constant from the uncorrected statistic and scaling by
    p reproduces the N(0, 4y^2) form of the law; it equals the corrected
    statistic's centering term at zero excess kurtosis.
    """
    return lw_correction(n, 0.0)


def legacy_lw_missize(delta: float, alpha: float) -> float:
    """Asymptotic realised size of the uncorrected LW test under kurtosis.

    When the data have excess fourth moment delta, the score (n W_hat - 1)/2
    drifts to N(delta/2, 1), so a nominal upper-tail alpha test realises
    P(Z > Phi^{-1}(1-alpha)) with Z ~ N(delta/2, 1).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    return normal_upper_tail(normal_quantile(1.0 - alpha) - delta / 2.0)


def _law_for(kind: StatisticKind, p: int, n: int, delta: float) -> NullLaw:
    y_n = p / n
    if kind is StatisticKind.NEW_CLRT:
        return new_clrt_null(y_n, delta).with_scale(p)
    if kind is StatisticKind.LEGACY_CLRT:
        return legacy_clrt_null(y_n).with_scale(p)
    if kind is StatisticKind.NEW_LW:
        return new_lw_null(y_n).with_scale(p)
    if kind is StatisticKind.LEGACY_LW:
        return legacy_lw_gaussian_null(n)
    raise ValueError(f"unknown statistic kind {kind!r}")


def _statistic_for(X: DataMatrix, kind: StatisticKind, delta: float, mu):
    if kind is StatisticKind.NEW_CLRT:
        return clrt_statistic(classic_covariance(X))
    if kind is StatisticKind.LEGACY_CLRT:
        known_mu = np.zeros(X.p) if mu is None else mu
        return clrt_statistic(simplified_covariance(X, known_mu))
    if kind is StatisticKind.NEW_LW:
        return lw_statistic(classic_covariance(X), delta)
    if kind is StatisticKind.LEGACY_LW:
        return legacy_lw_statistic(classic_covariance(X))
    raise ValueError(f"unknown statistic kind {kind!r}")


def run_test(X, kind: StatisticKind, alpha: float = 0.05,
             delta: float = 0.0, mu=None) -> TestReport:
    """Run one identity test end to end on a data matrix.

    Parameters
    ----------
    X : DataMatrix or array_like
        p x n data, observations in columns.
    kind : StatisticKind
        Which statistic/law pair to use.
    alpha : float
        Nominal level of the one-sided upper-tail test.
    delta : float
        Excess fourth moment assumed by the corrected statistics
        (ignored by the legacy LW law, which hard-codes 0).
    mu : array_like, optional
        Known mean vector for the known-mean CLRT; defaults to zero.

    Returns
    -------
    TestReport
        Raw statistic, z-score, one-sided p-value and decision.

    Raises
    ------
    SingularCovariance, DegenerateRatio
        Propagated from the statistic and law constructors; never swallowed.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    data = X if isinstance(X, DataMatrix) else DataMatrix(np.asarray(X, float))
    stat = _statistic_for(data, kind, delta, mu)
    law = _law_for(kind, data.p, data.n, delta)
    z = float(law.standardize(stat.raw))
    p_value = normal_upper_tail(z)
    return TestReport(
        statistic=stat,
        law=law,
        z_score=z,
        p_value=p_value,
        alpha=alpha,
        reject=bool(p_value < alpha),
        p=data.p,
        n=data.n,
        y_n=data.y_n,
        delta=float(delta),
    )
