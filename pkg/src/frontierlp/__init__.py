"""Frontier estimation from bounded-support samples via linear programming."""

from .frontier import (
    FrontierFunction,
    Sample,
    benchmark_frontier,
    read_frontier,
    read_sample,
    sample_support,
    write_frontier,
    write_sample,
)
from .kernels import (
    KERNELS,
    Kernel,
    KernelValidation,
    eval_kernel,
    kernel_by_name,
    kernel_constants,
    validate_kernel,
)
from .lp import (
    LinearProgram,
    LpSolution,
    PivotLimitError,
    brute_force_lp,
    complementarity_residual,
    duality_gap,
    format_lp,
    solve_lp,
)
from .estimators import (
    FourierFrontierEstimate,
    InfeasibleFitError,
    KernelFrontierEstimate,
    PartitionFrontierEstimate,
    build_fourier_lp,
    build_kernel_lp,
    estimate_from_dict,
    estimate_to_dict,
    evaluate_estimate,
    fit_fourier_estimator,
    fit_kernel_estimator,
    fit_modified_estimator,
    fit_partition_estimator,
    log_likelihood,
    support_vector_count,
    write_curve,
)
from .metrics import ErrorReport, coverage_check, error_report, l1_error
from .harness import (
    EstimatorSpec,
    RateExperiment,
    SimulationConfig,
    SimulationReport,
    rate_experiment,
    replication_seed,
    run_replications,
)

__version__ = "0.1.0"
