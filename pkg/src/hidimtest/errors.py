"""Exception types shared across the package."""


class HidimtestError(Exception):
    """Base class for all package-specific errors."""


class SingularCovariance(HidimtestError):
    """A log-determinant was requested for a covariance estimate that is
    singular or numerically indefinite (typically p >= n)."""


class DegenerateRatio(HidimtestError):
    """A dimension-to-sample ratio fell outside the range where the
    requested quantity is defined (e.g. y >= 1 for the CLRT laws)."""


class ContourTooClose(HidimtestError):
    """A quadrature contour passes too close to a singularity of the
    integrand, or could not be placed at all for the requested ratio."""


class NonConvergent(HidimtestError):
    """Node doubling failed to stabilise a quadrature value, or the
    result retained a non-negligible imaginary component."""


class QuadratureError(HidimtestError):
    """Adaptive quadrature could not meet its error tolerance."""


class DataError(HidimtestError):
    """User-supplied data could not be parsed into a finite real matrix."""


class ExperimentError(HidimtestError):
    """A Monte Carlo replication failed; the enclosing cell is aborted."""
