"""Sample covariance estimators and the scalar test statistics built on them.

Data matrices hold variables in rows and observations in columns (p x n).
Three covariance estimators are provided: the mean-centered estimator with
divisor n-1 (``classic``), the known-mean estimator with divisor n
(``simplified``), and the mean-centered estimator rescaled by (n-1)/n
(``scaled``).  The test statistics measure the discrepancy between an
estimate and the identity matrix either through eigenvalue log-moments
(CLRT family) or through squared Frobenius norms (LW family).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularCovariance

__all__ = [
    "CovarianceKind",
    "StatisticKind",
    "DataMatrix",
    "CovarianceEstimate",
    "StatisticValue",
    "classic_covariance",
    "simplified_covariance",
    "scaled_covariance",
    "clrt_statistic",
    "lw_statistic",
    "legacy_lw_statistic",
    "lw_correction",
    "spectrum",
    "estimate_excess_kurtosis",
]

_EIG_TOL = 1e-12


class CovarianceKind(enum.Enum):
    CLASSIC = "classic"
    SIMPLIFIED = "simplified"
    SCALED = "scaled"


class StatisticKind(enum.Enum):
    NEW_CLRT = "new_clrt"
    NEW_LW = "new_lw"
    LEGACY_CLRT = "legacy_clrt"
    LEGACY_LW = "legacy_lw"


@dataclass(frozen=True)
class DataMatrix:
    """A p x n real data matrix: p variables in rows, n observations in columns.

    Entries must be finite and n must be at least 2 so that the centered
    covariance has a positive divisor.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"data must be two-dimensional, got shape {arr.shape}")
        p, n = arr.shape
        if p < 1:
            raise ValueError("need at least one variable (row)")
        if n < 2:
            raise ValueError(f"need at least 2 observations (columns), got {n}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("data contains non-finite entries")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_observation_rows(cls, rows: np.ndarray) -> "DataMatrix":
        """Build from the on-disk convention where rows are observations."""
        return cls(np.asarray(rows, dtype=float).T)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def y_n(self) -> float:
        """Finite-sample dimension-to-sample ratio p/n."""
        return self.values.shape[0] / self.values.shape[1]


@dataclass(frozen=True)
class CovarianceEstimate:
    """A p x p symmetric covariance estimate together with its provenance."""

    matrix: np.ndarray
    kind: CovarianceKind
    n: int

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float, copy=True)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"covariance must be square, got shape {mat.shape}")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    @property
    def y_n(self) -> float:
        return self.matrix.shape[0] / self.n


@dataclass(frozen=True)
class StatisticValue:
    """A scalar test statistic and the inputs that parameterise its law."""

    raw: float
    statistic_kind: StatisticKind
    p: int
    n: int
    delta_used: float | None = field(default=None)


def _as_data(X) -> DataMatrix:
    return X if isinstance(X, DataMatrix) else DataMatrix(np.asarray(X, dtype=float))


def classic_covariance(X) -> CovarianceEstimate:
    """Mean-centered covariance with divisor n-1.

    Two-pass accumulation: subtract the column mean, then form the outer
    product sum.  The result is symmetrised to remove rounding drift.

    Parameters
    ----------
    X : DataMatrix or array_like
        p x n data, observations in columns.

    Returns
    -------
    CovarianceEstimate
        kind ``CLASSIC``.
    """
    data = _as_data(X)
    vals = data.values
    centered = vals - vals.mean(axis=1, keepdims=True)
    S = centered @ centered.T / (data.n - 1)
    S = (S + S.T) / 2.0
    return CovarianceEstimate(S, CovarianceKind.CLASSIC, data.n)


def simplified_covariance(X, mu) -> CovarianceEstimate:
    """Known-mean covariance with divisor n.

    Parameters
    ----------
    X : DataMatrix or array_like
        p x n data.
    mu : array_like or float
        The assumed mean vector (length p); a scalar is broadcast.
    """
    data = _as_data(X)
    mu_vec = np.asarray(mu, dtype=float)
    if mu_vec.ndim == 0:
        mu_vec = np.full(data.p, float(mu_vec))
    if mu_vec.shape != (data.p,):
        raise ValueError(f"mu has shape {mu_vec.shape}, expected ({data.p},)")
    if not np.all(np.isfinite(mu_vec)):
        raise ValueError("mu contains non-finite entries")
    centered = data.values - mu_vec[:, None]
    B = centered @ centered.T / data.n
    B = (B + B.T) / 2.0
    return CovarianceEstimate(B, CovarianceKind.SIMPLIFIED, data.n)


def scaled_covariance(X) -> CovarianceEstimate:
    """Mean-centered covariance rescaled to divisor n: ((n-1)/n) times classic."""
    data = _as_data(X)
    S = classic_covariance(data)
    scaled = S.matrix * ((data.n - 1) / data.n)
    return CovarianceEstimate(scaled, CovarianceKind.SCALED, data.n)


def _logdet_spd(matrix: np.ndarray) -> float:
    """Log-determinant via Cholesky; raises SingularCovariance when the
    factorisation fails or a pivot falls below the relative tolerance."""
    try:
        chol = np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(
            "covariance is not positive definite (factorisation failed); "
            "this typically means p >= n"
        ) from exc
    diag = np.diagonal(chol)
    # inf-norm bounds the spectral norm of a symmetric matrix from above
    norm_bound = float(np.abs(matrix).sum(axis=1).max())
    if float(diag.min()) ** 2 <= _EIG_TOL * norm_bound:
        raise SingularCovariance(
            "covariance is numerically singular "
            f"(pivot ratio below {_EIG_TOL:g})"
        )
    return 2.0 * float(np.log(diag).sum())


def clrt_statistic(S: CovarianceEstimate) -> StatisticValue:
    """Likelihood-ratio discrepancy (1/p) tr(S) - (1/p) log det(S) - 1.

    The statistic kind follows the estimator: the mean-centered estimator
    yields ``NEW_CLRT`` and the known-mean estimator yields ``LEGACY_CLRT``.
    Always nonnegative, and zero exactly when every eigenvalue is 1.

    Raises
    ------
    SingularCovariance
        If S is not numerically positive definite (p >= n makes this
        statistic undefined by construction).
    """
    if S.kind is CovarianceKind.CLASSIC:
        kind = StatisticKind.NEW_CLRT
    elif S.kind is CovarianceKind.SIMPLIFIED:
        kind = StatisticKind.LEGACY_CLRT
    else:
        raise ValueError(
            "clrt_statistic expects a classic or simplified estimate, "
            f"got kind {S.kind.value!r}"
        )
    p = S.p
    raw = float(np.trace(S.matrix)) / p - _logdet_spd(S.matrix) / p - 1.0
    # x - log x - 1 >= 0 for each eigenvalue; absorb rounding at the zero
    if -1e-12 < raw < 0.0:
        raw = 0.0
    return StatisticValue(raw=raw, statistic_kind=kind, p=p, n=S.n)


def lw_correction(n: int, delta: float = 0.0) -> float:
    """Finite-sample centering ((1+delta)(n-2)(n-1) - 2) / (n (n-1)^2).

    Subtracting this from the uncorrected Frobenius statistic removes its
    O(1/n) bias; with delta = 0 it is the Gaussian finite-n centering.
    """
    if n < 3:
        raise ValueError(f"correction term needs n >= 3, got {n}")
    return ((1.0 + delta) * (n - 2) * (n - 1) - 2.0) / (n * (n - 1) ** 2)


def _lw_base(S: CovarianceEstimate) -> float:
    p = S.p
    diff = S.matrix - np.eye(p)
    frob = float(np.einsum("ij,ji->", diff, diff))
    tr_avg = float(np.trace(S.matrix)) / p
    return frob / p - (p / (S.n - 1)) * tr_avg**2


def lw_statistic(S: CovarianceEstimate, delta: float) -> StatisticValue:
    """Bias-corrected Frobenius discrepancy from the identity matrix.

    raw = (1/p) tr(S-I)^2 - (p/(n-1)) ((1/p) tr S)^2 - lw_correction(n, delta)

    Parameters
    ----------
    S : CovarianceEstimate
        Must be the mean-centered (classic) estimator with n >= 3.
    delta : float
        Excess fourth moment of the standardised entries (0 for Gaussian).
    """
    if S.kind is not CovarianceKind.CLASSIC:
        raise ValueError("lw_statistic requires the classic estimator")
    if S.n < 3:
        raise ValueError(f"lw_statistic needs n >= 3, got n={S.n}")
    raw = _lw_base(S) - lw_correction(S.n, delta)
    return StatisticValue(
        raw=raw, statistic_kind=StatisticKind.NEW_LW, p=S.p, n=S.n,
        delta_used=float(delta),
    )


def legacy_lw_statistic(S: CovarianceEstimate) -> StatisticValue:
    """Uncorrected Frobenius discrepancy (no finite-sample centering term)."""
    if S.kind is not CovarianceKind.CLASSIC:
        raise ValueError("legacy_lw_statistic requires the classic estimator")
    if S.n < 3:
        raise ValueError(f"legacy_lw_statistic needs n >= 3, got n={S.n}")
    return StatisticValue(
        raw=_lw_base(S), statistic_kind=StatisticKind.LEGACY_LW, p=S.p, n=S.n,
    )


def spectrum(S: CovarianceEstimate) -> np.ndarray:
    """Ascending eigenvalues of the estimate (length p)."""
    return np.linalg.eigvalsh(S.matrix)


def estimate_excess_kurtosis(X) -> float:
    """Heuristic moment plug-in for the excess fourth moment.

    Standardises each variable by its sample mean and sample standard
    deviation (divisor n-1) and returns the pooled fourth moment minus 3.
    This is a rough device for exploratory use: it is biased for small n
    and assumes homogeneous entries.  Prefer supplying delta when the
    generating distribution is known.
    """
    data = _as_data(X)
    centered = data.values - data.values.mean(axis=1, keepdims=True)
    sd = np.sqrt((centered**2).sum(axis=1) / (data.n - 1))
    if np.any(sd == 0.0):
        raise ValueError("a variable has zero sample variance")
    z = centered / sd[:, None]
    return float((z**4).mean() - 3.0)
