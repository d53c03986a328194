"""Distributed kernel regression with SGM and spectral algorithms on
synthetic problems whose excess risk is computable in closed form."""
from ._version import __version__
from .errors import (
    ConstraintViolationError,
    DegenerateInputError,
    DivergenceError,
    DomainError,
    EigendecompositionError,
    IndivisibleDataError,
    InsufficientDataError,
    InvalidParameterError,
    InvalidRegimeError,
    KdcError,
    KernelMismatchError,
)
from .evaluation import (
    DecompositionReport,
    RateFit,
    RiskReport,
    decompose_error,
    excess_risk_exact,
    excess_risk_mc,
    fit_rate,
    mode_projection,
    theory_exponent,
)
from .filters import (
    FilterSpec,
    FilterValidationReport,
    apply_filter,
    effective_lambda,
    filter_from_tag,
    filter_value,
    landweber,
    residual_product,
    spectral_cutoff,
    step_sum,
    tikhonov,
    tikhonov_bias_corrected,
    validate_filter,
)
from .harness import (
    ExperimentConfig,
    RunRecord,
    emit_rate_table,
    read_records_csv,
    records_from_csv,
    records_to_csv,
    resolve_m,
    run_experiment,
    write_records_csv,
)
from .kernels import (
    GramMatrix,
    KernelSpec,
    gaussian_kernel,
    gram,
    kernel_bound,
    kernel_cross,
    kernel_eval,
    spectral_kernel,
    sym_eigendecompose,
)
from .seeding import derive_seed, partition_stream_seed, splitmix64
from .spectral_model import (
    Dataset,
    SpectralProblem,
    basis_matrix,
    build_problem,
    capacity_certificate,
    capacity_constant,
    dataset_from_csv,
    dataset_to_csv,
    effective_dimension,
    problem_from_json,
    problem_to_json,
    regression_value,
    sample_dataset,
    second_moment_bound,
    sup_norm_bound,
    tail_mass,
)
from .trainers import (
    AveragedModel,
    Constant,
    Explicit,
    LocalModel,
    SgmConfig,
    StepConditionReport,
    TrainPlan,
    average_models,
    check_step_condition,
    distributed_sa,
    distributed_sgm,
    gm_local,
    partition_data,
    plan_parameters,
    population_bias,
    population_sequence,
    predict,
    pseudo_gm_local,
    resolve_schedule,
    sa_local,
    sgm_local,
)
