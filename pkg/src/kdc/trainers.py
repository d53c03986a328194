"""Training algorithms: mini-batch SGM, batch gradient descent, and
spectral-filter estimators, together with the parameter planner that maps
a regime tag to concrete (eta, batch size, iterations) or lambda choices.

All estimators work in coefficient space: a model is a weight vector alpha
over its training inputs, predicting x -> sum_j alpha_j K(x, x_j).
Distributed training partitions one dataset uniformly at random, trains
each block independently, and averages the block predictors uniformly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ConstraintViolationError,
    DivergenceError,
    IndivisibleDataError,
    InvalidParameterError,
    InvalidRegimeError,
    KernelMismatchError,
)
from .filters import FilterSpec, apply_filter
from .kernels import GramMatrix, KernelSpec, gram, kernel_bound, kernel_cross
from .seeding import partition_stream_seed
from .spectral_model import Dataset, SpectralProblem, regression_value

#: Coefficient magnitude beyond which an iterate is declared divergent.
DIVERGENCE_LIMIT = 1e12

#: Safety factor applied when clamping planned step sizes against 1/kappa_sq.
CLAMP_SAFETY = 1.01

#: Regime tags accepted by the planner.
SGM_REGIMES = (
    "cor1.1", "cor1.2",
    "cor2.1", "cor2.2", "cor2.3", "cor2.4",
    "cor3.1", "cor3.2", "cor3.3", "cor3.4",
)
SA_REGIMES = ("cor5", "cor6")


@dataclass(frozen=True)
class Constant:
    """Constant step schedule eta_t = eta."""

    eta: float


@dataclass(frozen=True)
class Explicit:
    """Explicit step schedule; length must equal the iteration count."""

    values: tuple[float, ...]


def resolve_schedule(schedule, iterations: int) -> np.ndarray:
    """Materialize a schedule (Constant, Explicit, float, or sequence)."""
    if iterations < 1:
        raise InvalidParameterError("iterations must be >= 1")
    if isinstance(schedule, Constant):
        arr = np.full(iterations, float(schedule.eta))
    elif isinstance(schedule, Explicit):
        arr = np.asarray(schedule.values, dtype=float)
    elif np.isscalar(schedule):
        arr = np.full(iterations, float(schedule))
    else:
        arr = np.asarray(schedule, dtype=float)
    if arr.shape != (iterations,):
        raise InvalidParameterError(
            f"schedule length {arr.shape} does not match iterations={iterations}"
        )
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise InvalidParameterError("step sizes must be finite and nonnegative")
    return arr


@dataclass(frozen=True)
class SgmConfig:
    """Mini-batch SGM hyperparameters for one distributed run."""

    partitions: int
    batch_size: int
    iterations: int
    step_schedule: Constant | Explicit
    base_seed: int
    theory_compliant: bool = False

    def __post_init__(self) -> None:
        if self.partitions < 1:
            raise InvalidParameterError("partitions must be >= 1")
        if self.batch_size < 1:
            raise InvalidParameterError("batch_size must be >= 1")
        if self.iterations < 1:
            raise InvalidParameterError("iterations must be >= 1")
        resolve_schedule(self.step_schedule, self.iterations)


@dataclass(frozen=True, eq=False)
class LocalModel:
    """Coefficient-space predictor trained on one partition."""

    inputs: np.ndarray
    coeffs: np.ndarray
    partition_index: int
    kernel: KernelSpec

    def __post_init__(self) -> None:
        x = np.asarray(self.inputs, dtype=float)
        a = np.asarray(self.coeffs, dtype=float)
        if x.ndim != 1 or a.shape != x.shape:
            raise InvalidParameterError("inputs and coeffs must be matching 1-D arrays")
        if not np.all(np.isfinite(a)):
            raise DivergenceError("model coefficients are not finite")
        x.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "coeffs", a)

    def __len__(self) -> int:
        return self.inputs.size


@dataclass(frozen=True, eq=False)
class AveragedModel:
    """Uniform average of per-partition predictors."""

    locals: tuple[LocalModel, ...]

    def __post_init__(self) -> None:
        if len(self.locals) == 0:
            raise InvalidParameterError("averaged model needs at least one local model")

    @property
    def partitions(self) -> int:
        return len(self.locals)

    @property
    def kernel(self) -> KernelSpec:
        return self.locals[0].kernel


def average_models(models: Sequence[LocalModel]) -> AveragedModel:
    """Average local predictors uniformly; all must share one kernel."""
    models = tuple(models)
    if not models:
        raise InvalidParameterError("cannot average zero models")
    key = models[0].kernel.key()
    for m in models[1:]:
        if m.kernel.key() != key:
            raise KernelMismatchError("local models were trained with different kernels")
    return AveragedModel(locals=models)


def predict(model, xs):
    """Evaluate a LocalModel or AveragedModel at points xs."""
    if isinstance(model, AveragedModel):
        preds = [predict(m, xs) for m in model.locals]
        return sum(preds) / len(preds)
    vals = kernel_cross(model.kernel, xs, model.inputs) @ model.coeffs
    if np.isscalar(xs) or np.ndim(xs) == 0:
        return float(vals[0])
    return vals


def partition_data(dataset: Dataset, partitions: int, seed: int) -> list[Dataset]:
    """Split a dataset into ``partitions`` equal blocks, uniformly at random.

    Raises IndivisibleDataError unless partitions divides len(dataset).
    """
    if partitions < 1:
        raise InvalidParameterError("partitions must be >= 1")
    n_total = len(dataset)
    if n_total % partitions != 0:
        raise IndivisibleDataError(
            f"{partitions} partitions do not divide {n_total} samples"
        )
    block = n_total // partitions
    perm = np.random.default_rng(seed).permutation(n_total)
    out = []
    for s in range(partitions):
        idx = perm[s * block:(s + 1) * block]
        out.append(
            Dataset(
                inputs=dataset.inputs[idx],
                labels=dataset.labels[idx],
                problem_id=dataset.problem_id,
                seed=dataset.seed,
            )
        )
    return out


def _validate_steps(etas: np.ndarray, ksq: float, *, positive: bool = False) -> None:
    if positive and np.any(etas <= 0):
        raise InvalidParameterError("step sizes must be positive")
    if np.max(etas) > (1.0 + 1e-12) / ksq:
        raise InvalidParameterError(
            f"step sizes must not exceed 1/kappa_sq = {1.0 / ksq:.6g}"
        )


def sgm_local(
    subset: Dataset,
    config: SgmConfig,
    kernel: KernelSpec,
    partition_index: int,
    *,
    gram_matrix: GramMatrix | None = None,
) -> LocalModel:
    """Mini-batch SGM on one partition, sampling with replacement.

    Per iteration t, a batch of ``batch_size`` indices is drawn i.i.d.
    uniformly from the partition; the coefficient update is

        alpha[j] -= (eta_t / b) * sum over batch slots with index j of
                    (prediction(x_j) - y_j),

    all residuals evaluated at the iteration-start coefficients. Index
    draws come from a dedicated stream seeded by (base_seed,
    partition_index) so partitions and replications are independent and
    reproducible. Raises DivergenceError if coefficients blow past
    DIVERGENCE_LIMIT or go non-finite.
    """
    n = len(subset)
    if config.batch_size > n:
        raise InvalidParameterError(
            f"batch_size {config.batch_size} exceeds partition size {n}"
        )
    etas = resolve_schedule(config.step_schedule, config.iterations)
    ksq = kernel_bound(kernel)
    _validate_steps(etas, ksq)
    if config.theory_compliant:
        cap = 1.0 / (4.0 * ksq * max(1.0, math.log(config.iterations)))
        if np.max(etas) > cap * (1.0 + 1e-12):
            raise ConstraintViolationError(
                f"theory-compliant runs need eta <= {cap:.6g}"
            )

    g = gram_matrix if gram_matrix is not None else gram(kernel, subset.inputs)
    if g.n != n:
        raise InvalidParameterError("gram matrix size does not match the partition")
    gm = g.entries
    y = subset.labels

    rng = np.random.default_rng(partition_stream_seed(config.base_seed, partition_index))
    idx = rng.integers(0, n, size=(config.iterations, config.batch_size))

    alpha = np.zeros(n)
    b = float(config.batch_size)
    for t in range(config.iterations):
        rows = idx[t]
        resid = gm[rows, :] @ alpha - y[rows]
        upd = np.zeros(n)
        np.add.at(upd, rows, resid)
        alpha -= (etas[t] / b) * upd
        touched = alpha[rows]
        if not np.all(np.isfinite(touched)) or np.max(np.abs(touched)) > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"SGM diverged at iteration {t + 1} on partition {partition_index}"
            )
    if not np.all(np.isfinite(alpha)):
        raise DivergenceError(f"SGM produced non-finite coefficients on partition {partition_index}")
    return LocalModel(inputs=subset.inputs, coeffs=alpha, partition_index=partition_index, kernel=kernel)


def _gm_iterate(gm: np.ndarray, labels: np.ndarray, etas: np.ndarray) -> np.ndarray:
    n = labels.size
    alpha = np.zeros(n)
    for t, eta in enumerate(etas):
        alpha = alpha - eta * (gm @ alpha - labels) / n
        if not np.all(np.isfinite(alpha)) or np.max(np.abs(alpha)) > DIVERGENCE_LIMIT:
            raise DivergenceError(f"gradient iteration diverged at step {t + 1}")
    return alpha


def gm_local(
    subset: Dataset,
    step_schedule,
    iterations: int,
    kernel: KernelSpec,
    partition_index: int = 0,
    *,
    gram_matrix: GramMatrix | None = None,
) -> LocalModel:
    """Full-batch gradient descent on one partition.

    This is the batch limit of sgm_local and coincides with the Landweber
    filter estimator for the same step schedule.
    """
    etas = resolve_schedule(step_schedule, iterations)
    _validate_steps(etas, kernel_bound(kernel))
    g = gram_matrix if gram_matrix is not None else gram(kernel, subset.inputs)
    if g.n != len(subset):
        raise InvalidParameterError("gram matrix size does not match the partition")
    alpha = _gm_iterate(g.entries, subset.labels, etas)
    return LocalModel(inputs=subset.inputs, coeffs=alpha, partition_index=partition_index, kernel=kernel)


def pseudo_gm_local(
    subset: Dataset,
    problem: SpectralProblem,
    step_schedule,
    iterations: int,
    kernel: KernelSpec,
    partition_index: int = 0,
    *,
    gram_matrix: GramMatrix | None = None,
) -> LocalModel:
    """Gradient descent against noiseless labels f(x_j) at the same inputs.

    Only available for synthetic problems where the regression function is
    known; used to split estimation error into bias and variance pieces.
    """
    if kernel.kind != "spectral" or kernel.problem.problem_id != problem.problem_id:
        raise KernelMismatchError("pseudo iterates need the problem's own kernel")
    etas = resolve_schedule(step_schedule, iterations)
    _validate_steps(etas, kernel_bound(kernel))
    g = gram_matrix if gram_matrix is not None else gram(kernel, subset.inputs)
    if g.n != len(subset):
        raise InvalidParameterError("gram matrix size does not match the partition")
    clean = regression_value(problem, subset.inputs)
    alpha = _gm_iterate(g.entries, clean, etas)
    return LocalModel(inputs=subset.inputs, coeffs=alpha, partition_index=partition_index, kernel=kernel)


def population_sequence(problem: SpectralProblem, step_schedule, iterations: int) -> np.ndarray:
    """Filter multipliers G_T(sigma_i) of population gradient descent.

    Returned per eigenmode; the population iterate after T steps has mode
    coefficients a_i * sigma_i * G_T(sigma_i).
    """
    etas = resolve_schedule(step_schedule, iterations)
    g = np.zeros(problem.dim)
    for eta in etas:
        g = g * (1.0 - eta * problem.eigenvalues) + eta
    return g


def population_bias(problem: SpectralProblem, step_schedule, iterations: int) -> float:
    """Squared norm of the population gradient-descent bias after T steps."""
    g = population_sequence(problem, step_schedule, iterations)
    resid = problem.eigenvalues * g - 1.0
    return float(np.sum((problem.target_coeffs * resid) ** 2))


def sa_local(
    subset: Dataset,
    filter_spec: FilterSpec,
    lam: float | None,
    kernel: KernelSpec,
    partition_index: int = 0,
    *,
    gram_matrix: GramMatrix | None = None,
) -> LocalModel:
    """Spectral-algorithm estimator on one partition.

    Applies the filter to the scaled Gram matrix and the label vector;
    ``lam`` must be positive except for Landweber, whose schedule fixes it.
    """
    if filter_spec.kind != "landweber":
        if lam is None or lam <= 0:
            raise InvalidParameterError("lambda must be positive")
    g = gram_matrix if gram_matrix is not None else gram(kernel, subset.inputs)
    if g.n != len(subset):
        raise InvalidParameterError("gram matrix size does not match the partition")
    coeffs = apply_filter(filter_spec, lam, g, subset.labels)
    return LocalModel(inputs=subset.inputs, coeffs=coeffs, partition_index=partition_index, kernel=kernel)


def distributed_sgm(
    dataset: Dataset,
    config: SgmConfig,
    kernel: KernelSpec,
    partition_seed: int,
) -> AveragedModel:
    """Partition, train SGM on each block, and average the predictors."""
    subs = partition_data(dataset, config.partitions, partition_seed)
    models = [sgm_local(sub, config, kernel, s) for s, sub in enumerate(subs)]
    return average_models(models)


def distributed_sa(
    dataset: Dataset,
    filter_spec: FilterSpec,
    lam: float | None,
    kernel: KernelSpec,
    partitions: int,
    partition_seed: int,
) -> AveragedModel:
    """Partition, run the spectral algorithm on each block, and average."""
    subs = partition_data(dataset, partitions, partition_seed)
    models = [sa_local(sub, filter_spec, lam, kernel, s) for s, sub in enumerate(subs)]
    return average_models(models)


@dataclass(frozen=True)
class TrainPlan:
    """Planner output: concrete hyperparameters for one (regime, N, m)."""

    regime: str
    algorithm: str
    n_total: int
    partitions: int
    n_local: int
    batch_size: int | None
    iterations: int | None
    eta: float | None
    eta_raw: float | None
    lam: float | None
    scale: float
    zeta: float
    gamma: float
    clamped: bool
    partition_warning: bool
    theory_compliant: bool

    def to_config(self, base_seed: int) -> SgmConfig:
        """SGM configuration realizing this plan."""
        if self.algorithm != "sgm":
            raise InvalidParameterError("only SGM plans convert to SgmConfig")
        return SgmConfig(
            partitions=self.partitions,
            batch_size=self.batch_size,
            iterations=self.iterations,
            step_schedule=Constant(self.eta),
            base_seed=base_seed,
            theory_compliant=self.theory_compliant,
        )


def _ceil_count(value: float) -> int:
    return max(1, math.ceil(value * (1.0 - 1e-12)))


def _round_batch(value: float) -> int:
    return max(1, round(value))


def plan_parameters(
    regime: str,
    n_total: int,
    partitions: int,
    zeta: float,
    gamma: float,
    scale: float = 1.0,
    *,
    kappa_sq: float | None = None,
    theory_compliant: bool = False,
) -> TrainPlan:
    """Map a regime tag to concrete hyperparameters.

    SGM regimes fix (eta, batch size, iterations); SA regimes fix lambda.
    ``scale`` multiplies the step size or regularization level. When
    ``kappa_sq`` is given, step sizes are clamped to 1/(1.01 kappa_sq) so
    the SGM step-size contract always holds; with ``theory_compliant`` the
    tighter cap 1/(4 * 1.01 * kappa_sq * max(1, ln T)) applies as well.
    Iteration counts round up; batch sizes round to the nearest integer
    (at least 1). Raises InvalidRegimeError for unknown tags and
    ConstraintViolationError when a regime's side conditions fail
    (single-machine regimes require partitions == 1; capacity-dependent
    regimes require 2*zeta + gamma > 1).
    """
    if n_total < 2:
        raise InvalidParameterError("n_total must be >= 2")
    if partitions < 1 or partitions > n_total:
        raise InvalidParameterError("partitions must lie in [1, n_total]")
    if zeta <= 0 or not 0 < gamma <= 1:
        raise InvalidParameterError("need zeta > 0 and gamma in (0, 1]")
    if scale <= 0:
        raise InvalidParameterError("scale must be positive")
    if theory_compliant and kappa_sq is None:
        raise InvalidParameterError("theory_compliant planning needs kappa_sq")

    big_n = float(n_total)
    m = partitions
    n_local = n_total / m
    exponent_sum = 2.0 * zeta + gamma
    log_n = math.log(big_n)

    def need_capacity() -> None:
        if exponent_sum <= 1.0:
            raise ConstraintViolationError(
                f"regime {regime} requires 2*zeta + gamma > 1 (got {exponent_sum:.3g})"
            )

    def need_single() -> None:
        if m != 1:
            raise ConstraintViolationError(f"regime {regime} requires partitions == 1")

    algorithm = "sa" if regime in SA_REGIMES else "sgm"
    lam: float | None = None
    eta_raw: float | None = None
    batch: int | None = None
    iters: int | None = None

    if regime == "cor1.1":
        eta_raw = scale * m / math.sqrt(big_n)
        batch = 1
        iters = _ceil_count(big_n / m)
    elif regime == "cor1.2":
        eta_raw = scale / log_n
        batch = _round_batch(math.sqrt(big_n) / m)
        iters = _ceil_count(math.sqrt(big_n) * log_n)
    elif regime == "cor2.1":
        need_capacity()
        eta_raw = scale / n_local
        batch = 1
        iters = _ceil_count(big_n ** (1.0 / exponent_sum) * n_local)
    elif regime == "cor2.2":
        need_capacity()
        eta_raw = scale / math.sqrt(n_local)
        batch = _round_batch(math.sqrt(n_local))
        iters = _ceil_count(big_n ** (1.0 / exponent_sum) * math.sqrt(n_local))
    elif regime == "cor2.3":
        need_capacity()
        eta_raw = scale * m * big_n ** (-2.0 * zeta / exponent_sum)
        batch = 1
        iters = _ceil_count(big_n ** ((2.0 * zeta + 1.0) / exponent_sum) / m)
    elif regime == "cor2.4":
        need_capacity()
        eta_raw = scale / log_n
        batch = _round_batch(big_n ** (2.0 * zeta / exponent_sum) / m)
        iters = _ceil_count(big_n ** (1.0 / exponent_sum) * log_n)
    elif regime in ("cor3.1", "cor3.2", "cor3.3", "cor3.4"):
        need_single()
        alpha = 1.0 / max(1.0, exponent_sum)
        if regime == "cor3.1":
            eta_raw = scale / big_n
            batch = 1
            iters = _ceil_count(big_n ** (alpha + 1.0))
        elif regime == "cor3.2":
            eta_raw = scale / math.sqrt(big_n)
            batch = _round_batch(math.sqrt(big_n))
            iters = _ceil_count(big_n ** (alpha + 0.5))
        elif regime == "cor3.3":
            eta_raw = scale * big_n ** (-2.0 * zeta * alpha)
            batch = 1
            iters = _ceil_count(big_n ** (alpha * (2.0 * zeta + 1.0)))
        else:
            eta_raw = scale / log_n
            batch = _round_batch(big_n ** (2.0 * zeta * alpha))
            iters = _ceil_count(big_n ** alpha * log_n)
    elif regime == "cor5":
        lam = scale * big_n ** (-1.0 / exponent_sum)
    elif regime == "cor6":
        need_single()
        lam = scale * big_n ** (-1.0 / max(1.0, exponent_sum))
    else:
        raise InvalidRegimeError(
            f"unknown regime {regime!r}; expected one of {SGM_REGIMES + SA_REGIMES}"
        )

    eta = eta_raw
    clamped = False
    if algorithm == "sgm":
        batch = min(batch, max(1, math.floor(n_local)))
        if kappa_sq is not None:
            cap = 1.0 / (CLAMP_SAFETY * kappa_sq)
            if theory_compliant:
                cap = min(cap, 1.0 / (4.0 * CLAMP_SAFETY * kappa_sq * max(1.0, math.log(iters))))
            if eta_raw > cap:
                eta = cap
                clamped = True

    # m beyond this threshold voids the averaging guarantee (bias dominates).
    threshold = big_n ** ((exponent_sum - 1.0) / exponent_sum) if exponent_sum > 1.0 else 1.0
    partition_warning = m > threshold

    return TrainPlan(
        regime=regime,
        algorithm=algorithm,
        n_total=n_total,
        partitions=m,
        n_local=int(n_local) if float(n_local).is_integer() else math.floor(n_local),
        batch_size=batch,
        iterations=iters,
        eta=eta,
        eta_raw=eta_raw,
        lam=lam,
        scale=scale,
        zeta=zeta,
        gamma=gamma,
        clamped=clamped,
        partition_warning=partition_warning,
        theory_compliant=theory_compliant,
    )


@dataclass(frozen=True)
class StepConditionReport:
    """Result of the summability check on a step schedule."""

    passed: bool
    worst_ratio: float
    worst_t: int
    threshold: float
    iterations: int


def check_step_condition(step_schedule, iterations: int, kappa_sq: float) -> StepConditionReport:
    """Check the variance-control condition on a step schedule.

    For every t >= 2 the weighted window sum

        S_t = (1/eta_t) * sum_{k=1..t-1} [1/(k(k+1))] * sum_{i=t-k..t-1} eta_i^2

    must stay below 1/(4 kappa_sq). Reports the worst ratio S_t / threshold
    (0 when T == 1, which is vacuously fine). For a constant schedule S_t
    reduces to eta * (H_t - 1), with H_t the t-th harmonic number.
    """
    if kappa_sq <= 0:
        raise InvalidParameterError("kappa_sq must be positive")
    etas = resolve_schedule(step_schedule, iterations)
    if np.any(etas <= 0):
        raise InvalidParameterError("step condition is defined for positive steps")
    threshold = 1.0 / (4.0 * kappa_sq)
    if iterations == 1:
        return StepConditionReport(
            passed=True, worst_ratio=0.0, worst_t=1, threshold=threshold,
            iterations=iterations,
        )

    sq = etas**2
    prefix = np.concatenate(([0.0], np.cumsum(sq)))  # prefix[j] = sum_{i<=j} eta_i^2
    ks = np.arange(1, iterations)
    weights = 1.0 / (ks * (ks + 1.0))

    worst_ratio = 0.0
    worst_t = 1
    for t in range(2, iterations + 1):
        k = ks[: t - 1]
        window = prefix[t - 1] - prefix[t - 1 - k]
        s_t = float(np.dot(weights[: t - 1], window)) / etas[t - 1]
        ratio = s_t / threshold
        if ratio > worst_ratio:
            worst_ratio = ratio
            worst_t = t
    return StepConditionReport(
        passed=worst_ratio <= 1.0 + 1e-12,
        worst_ratio=worst_ratio,
        worst_t=worst_t,
        threshold=threshold,
        iterations=iterations,
    )


__all__ = [
    "AveragedModel",
    "Constant",
    "Explicit",
    "LocalModel",
    "SgmConfig",
    "StepConditionReport",
    "TrainPlan",
    "average_models",
    "check_step_condition",
    "distributed_sa",
    "distributed_sgm",
    "gm_local",
    "partition_data",
    "plan_parameters",
    "population_bias",
    "population_sequence",
    "predict",
    "pseudo_gm_local",
    "resolve_schedule",
    "sa_local",
    "sgm_local",
]
