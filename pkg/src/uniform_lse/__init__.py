"""Exact finite-sample inference for simple linear regression with uniform errors.

The error law is U(-theta, theta). Conditionally on the design, both
least-squares coefficient estimates are weighted sums of independent uniforms,
whose exact (generalized Irwin-Hall) distribution this package evaluates,
inverts, and validates against Monte Carlo simulation and the Gaussian
large-sample theory.
"""

__version__ = "0.1.0"

from .design import (
    Dataset,
    DesignSummary,
    FitResult,
    estimate_theta_sq,
    fit,
    read_dataset_csv,
    summarize,
)
from .errors import (
    CollinearDesign,
    DatasetFormatError,
    DegenerateSum,
    DomainError,
    ExactModeTooLarge,
    GridTooCoarse,
    MismatchedDesign,
    TooFewPoints,
    UniformLseError,
)
from .estimator import UniformErrorLinearRegression
from .grid_oracle import GridDensity, grid_convolution_density
from .law import (
    CltDiagnostics,
    ConfidenceInterval,
    EstimatorLaw,
    TestResult,
    clt_diagnostics,
    estimator_law,
    exact_confidence_interval,
    exact_test,
    gaussian_confidence_interval,
    gaussian_test,
    normal_approx_law,
    standardized_sup_distance,
)
from .simulate import (
    CoverageReport,
    CoverageRow,
    ConvergenceRow,
    Equispaced,
    FixedDesign,
    GaussianNoise,
    IidUniform,
    KsReport,
    ReplicateRecord,
    ReplicateRun,
    SimConfig,
    UniformNoise,
    convergence_study,
    coverage_study,
    design_x,
    generate_dataset,
    ks_against_exact,
    replicate_rng,
    run_replicates,
)
from .uniform_sum import (
    DEFAULT_EXACT_LIMIT,
    CombinationTermTable,
    WeightedUniformSum,
    make_sum,
)

__all__ = [
    "__version__",
    "CltDiagnostics",
    "CollinearDesign",
    "CombinationTermTable",
    "ConfidenceInterval",
    "ConvergenceRow",
    "CoverageReport",
    "CoverageRow",
    "Dataset",
    "DatasetFormatError",
    "DEFAULT_EXACT_LIMIT",
    "DegenerateSum",
    "DesignSummary",
    "DomainError",
    "Equispaced",
    "EstimatorLaw",
    "ExactModeTooLarge",
    "FitResult",
    "FixedDesign",
    "GaussianNoise",
    "GridDensity",
    "GridTooCoarse",
    "IidUniform",
    "KsReport",
    "MismatchedDesign",
    "ReplicateRecord",
    "ReplicateRun",
    "SimConfig",
    "TestResult",
    "TooFewPoints",
    "UniformErrorLinearRegression",
    "UniformLseError",
    "UniformNoise",
    "WeightedUniformSum",
    "clt_diagnostics",
    "convergence_study",
    "coverage_study",
    "design_x",
    "estimate_theta_sq",
    "estimator_law",
    "exact_confidence_interval",
    "exact_test",
    "fit",
    "gaussian_confidence_interval",
    "gaussian_test",
    "generate_dataset",
    "grid_convolution_density",
    "ks_against_exact",
    "make_sum",
    "normal_approx_law",
    "read_dataset_csv",
    "replicate_rng",
    "run_replicates",
    "standardized_sup_distance",
    "summarize",
]
