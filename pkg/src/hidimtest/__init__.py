"""Tests of a high-dimensional covariance identity hypothesis.

Given n observations of p variables with p comparable to n, test whether
the population covariance is the identity matrix.  The package provides
two corrected statistics with Gaussian limits that hold as p/n tends to a
positive constant — a log-determinant likelihood-ratio trace statistic
(p/n < 1) and a squared-Frobenius trace statistic (any p/n) — together
with their classic counterparts, the random-matrix numerics backing the
limit laws, reproducible data generators, a Monte Carlo size/power
harness, and a command-line interface.
"""

from .errors import (
    ContourTooClose,
    DataError,
    DegenerateRatio,
    ExperimentError,
    HidimtestError,
    NonConvergent,
    QuadratureError,
    SingularCovariance,
)
from .covstats import (
    CovarianceEstimate,
    CovarianceKind,
    DataMatrix,
    StatisticKind,
    StatisticValue,
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
from .asymptotics import (
    NullLaw,
    TestReport,
    clrt_centering,
    legacy_clrt_null,
    legacy_lw_finite_centering,
    legacy_lw_gaussian_null,
    legacy_lw_missize,
    new_clrt_null,
    new_lw_null,
    normal_quantile,
    normal_upper_tail,
    run_test,
)
from .rmt import (
    ContourIdentity,
    ContourSpec,
    EsdCurve,
    MpLaw,
    closed_form,
    clrt_mp_integral,
    contour_integral,
    d_limit,
    esd,
    mp_density,
    mp_moment,
    verify_identities,
)
from .datagen import (
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
from .harness import (
    CSV_COLUMNS,
    CellAggregate,
    DeltaPolicy,
    ExperimentConfig,
    ExperimentResult,
    export,
    import_result,
    run_delta_sweep,
    run_experiment,
    run_power_experiment,
    run_size_experiment,
    sweep_delta,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "HidimtestError", "SingularCovariance", "DegenerateRatio",
    "ContourTooClose", "NonConvergent", "QuadratureError", "DataError",
    "ExperimentError",
    # covstats
    "DataMatrix", "CovarianceKind", "CovarianceEstimate", "StatisticKind",
    "StatisticValue", "classic_covariance", "simplified_covariance",
    "scaled_covariance", "clrt_statistic", "lw_statistic",
    "legacy_lw_statistic", "lw_correction", "spectrum",
    "estimate_excess_kurtosis",
    # asymptotics
    "NullLaw", "TestReport", "clrt_centering", "new_clrt_null",
    "legacy_clrt_null", "new_lw_null", "legacy_lw_gaussian_null",
    "legacy_lw_finite_centering", "legacy_lw_missize", "normal_upper_tail",
    "normal_quantile", "run_test",
    # rmt
    "MpLaw", "ContourSpec", "ContourIdentity", "mp_density", "mp_moment",
    "clrt_mp_integral", "d_limit", "contour_integral", "closed_form",
    "verify_identities", "esd", "EsdCurve",
    # datagen
    "EntryDistribution", "CovarianceSpec", "RngStream", "std_normal",
    "shifted_normal", "centered_gamma", "centered_uniform", "two_point",
    "two_point_delta", "sample_entries", "make_covariance", "synthesize",
    # harness
    "DeltaPolicy", "ExperimentConfig", "ExperimentResult", "CellAggregate",
    "run_experiment", "run_size_experiment", "run_power_experiment",
    "run_delta_sweep", "sweep_delta", "export", "import_result",
    "CSV_COLUMNS",
]
