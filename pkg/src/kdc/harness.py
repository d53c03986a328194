"""Experiment harness: sweep configurations, run records, and rate tables.

A sweep takes one experiment configuration, runs the planned algorithm for
every sample size in ``n_list`` with ``replications`` independent datasets
each, and produces one run record per (N, m) point. Records serialize to
CSV with enough precision to round-trip exactly. Failures inside a point
(divergence, constraint violations) are recorded on the row instead of
aborting the sweep.

Replications are independent tasks keyed by (N, rep); with KDC_THREADS set
(or ``workers`` passed), they execute in a process pool. Results are
aggregated in task order, so parallel runs produce byte-identical records.
"""
from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from ._version import __version__
from .errors import InvalidParameterError, InvalidRegimeError
from .evaluation import excess_risk_exact, fit_rate, theory_exponent
from .filters import filter_from_tag, FILTER_TAGS
from .kernels import spectral_kernel
from .seeding import TAG_DATA, TAG_INDEX, TAG_PARTITION, derive_seed
from .spectral_model import build_problem, problem_from_json, problem_to_json, sample_dataset
from .trainers import (
    CLAMP_SAFETY,
    SA_REGIMES,
    SGM_REGIMES,
    distributed_sa,
    distributed_sgm,
    plan_parameters,
)

#: Environment variable capping worker processes (0 = one per CPU).
WORKERS_ENV = "KDC_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: a synthetic problem, an algorithm/regime, and sizes."""

    regime: str
    n_list: tuple[int, ...]
    dim: int = 200
    gamma: float = 1.0
    zeta: float = 0.5
    source_norm: float = 1.0
    noise_sd: float = 0.0
    algorithm: str = "sgm"
    scale: float = 1.0
    filter_tag: str = "tikhonov"
    m_rule: int | str = 1
    replications: int = 1
    base_seed: int = 0
    out_path: str | None = None
    theory_compliant: bool = False

    def __post_init__(self) -> None:
        if self.algorithm not in ("sgm", "sa"):
            raise InvalidParameterError("algorithm must be 'sgm' or 'sa'")
        expected = SGM_REGIMES if self.algorithm == "sgm" else SA_REGIMES
        if self.regime not in expected:
            raise InvalidRegimeError(
                f"regime {self.regime!r} is not valid for algorithm {self.algorithm!r}"
            )
        if self.filter_tag not in FILTER_TAGS:
            raise InvalidParameterError(f"filter must be one of {FILTER_TAGS}")
        ns = tuple(int(n) for n in self.n_list)
        if len(ns) == 0:
            raise InvalidParameterError("n_list must be nonempty")
        if any(n < 2 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
            raise InvalidParameterError("n_list must be strictly increasing, all >= 2")
        object.__setattr__(self, "n_list", ns)
        _parse_m_rule(self.m_rule)  # validates
        if self.replications < 1:
            raise InvalidParameterError("replications must be >= 1")
        if self.scale <= 0:
            raise InvalidParameterError("scale must be positive")

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        """Build from a parsed config file; unrelated keys are ignored."""
        known = {f.name for f in fields(ExperimentConfig)}
        kwargs = {k: v for k, v in raw.items() if k in known}
        if "filter" in raw:
            kwargs["filter_tag"] = raw["filter"]
        if "n_list" in kwargs:
            kwargs["n_list"] = tuple(int(n) for n in kwargs["n_list"])
        missing = {"regime", "n_list"} - kwargs.keys()
        if missing:
            raise InvalidParameterError(f"config is missing keys: {sorted(missing)}")
        return ExperimentConfig(**kwargs)


def _parse_m_rule(rule) -> tuple[str, float | int]:
    if isinstance(rule, str):
        if not rule.startswith("pow:"):
            raise InvalidParameterError("string m rules look like 'pow:0.4'")
        beta = float(rule[4:])
        if not 0.0 <= beta < 1.0:
            raise InvalidParameterError("m rule exponent must lie in [0, 1)")
        return ("pow", beta)
    m = int(rule)
    if m < 1:
        raise InvalidParameterError("fixed m rule must be >= 1")
    return ("fixed", m)


def resolve_m(n_total: int, m_rule) -> tuple[int, int]:
    """Resolve the partition count for one sample size.

    'pow:beta' asks for floor(N^beta); a fixed integer asks for itself.
    Either way the request is decremented to the nearest divisor of N (so
    partitions always split the data evenly). Returns (requested, resolved).
    """
    kind, value = _parse_m_rule(m_rule)
    if kind == "pow":
        requested = max(1, math.floor(n_total ** value))
    else:
        requested = min(int(value), n_total)
    m = requested
    while n_total % m != 0:
        m -= 1
    return requested, m


CSV_COLUMNS = (
    "version", "algorithm", "regime", "n_total", "m_requested", "m",
    "n_local", "batch_size", "iterations", "eta", "lam", "scale", "filter",
    "replications", "base_seed", "data_seed_first", "risk_mean", "risk_se",
    "wall_ms", "error",
)

_INT_COLUMNS = {
    "n_total", "m_requested", "m", "n_local", "batch_size", "iterations",
    "replications", "base_seed", "data_seed_first",
}
_FLOAT_COLUMNS = {"eta", "lam", "scale", "risk_mean", "risk_se", "wall_ms"}


@dataclass(frozen=True)
class RunRecord:
    """One (N, m) sweep point, aggregated over replications."""

    version: str
    algorithm: str
    regime: str
    n_total: int
    m_requested: int
    m: int
    n_local: int
    batch_size: int | None
    iterations: int | None
    eta: float | None
    lam: float | None
    scale: float
    filter: str
    replications: int
    base_seed: int
    data_seed_first: int
    risk_mean: float
    risk_se: float
    wall_ms: float
    error: str


def _format_cell(name: str, value) -> str:
    if value is None:
        return ""
    if name in _FLOAT_COLUMNS:
        return f"{float(value):.17g}"
    return str(value)


def _parse_cell(name: str, text: str):
    if text == "":
        return "" if name not in (_INT_COLUMNS | _FLOAT_COLUMNS) else None
    if name in _INT_COLUMNS:
        return int(text)
    if name in _FLOAT_COLUMNS:
        return float(text)
    return text


def records_to_csv(records) -> str:
    """Serialize run records to CSV text with a fixed column order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(_format_cell(c, getattr(rec, c)) for c in CSV_COLUMNS)
    return buf.getvalue()


def records_from_csv(text: str) -> list[RunRecord]:
    """Parse run records written by records_to_csv."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise InvalidParameterError("unrecognized records CSV header")
    out = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise InvalidParameterError("malformed records CSV row")
        kwargs = {c: _parse_cell(c, cell) for c, cell in zip(CSV_COLUMNS, row)}
        out.append(RunRecord(**kwargs))
    return out


def write_records_csv(records, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(records_to_csv(records))


def read_records_csv(path: str) -> list[RunRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return records_from_csv(fh.read())


def landweber_schedule_for(lam: float, kappa_sq: float) -> np.ndarray:
    """Constant Landweber schedule matching a target regularization level.

    Uses eta = 1/(2 * 1.01 * kappa_sq) and t = ceil(1/(lam * eta)) steps so
    the effective lambda = 1/(t * eta) sits at or just below ``lam``.
    """
    if lam <= 0:
        raise InvalidParameterError("lambda must be positive")
    eta = 1.0 / (2.0 * CLAMP_SAFETY * kappa_sq)
    steps = math.ceil(1.0 / (lam * eta))
    return np.full(steps, eta)


def _run_point(payload: dict) -> dict:
    """Run one (N, rep) task; returns risk or a recorded error."""
    t0 = time.perf_counter()
    try:
        problem = problem_from_json(payload["problem_json"])
        kernel = spectral_kernel(problem)
        n_total = payload["n_total"]
        m = payload["m"]
        rep = payload["rep"]
        base = payload["base_seed"]
        data_seed = derive_seed(base, TAG_DATA, n_total, rep)
        part_seed = derive_seed(base, TAG_PARTITION, n_total, rep)
        index_seed = derive_seed(base, TAG_INDEX, n_total, rep)
        ds = sample_dataset(problem, n_total, data_seed)
        plan = plan_parameters(
            payload["regime"], n_total, m, problem.zeta, problem.gamma,
            payload["scale"], kappa_sq=problem.kappa_sq,
            theory_compliant=payload["theory_compliant"],
        )
        if plan.algorithm == "sgm":
            model = distributed_sgm(ds, plan.to_config(index_seed), kernel, part_seed)
        else:
            tag = payload["filter_tag"]
            if tag == "landweber":
                steps = landweber_schedule_for(plan.lam, problem.kappa_sq)
                filt = filter_from_tag(tag, problem.kappa_sq, step_sizes=steps)
                lam = None
            else:
                filt = filter_from_tag(tag, problem.kappa_sq)
                lam = plan.lam
            model = distributed_sa(ds, filt, lam, kernel, m, part_seed)
        risk = excess_risk_exact(model, problem).excess_risk
        return {
            "risk": risk, "error": "",
            "wall_ms": 1e3 * (time.perf_counter() - t0),
            "plan": (plan.batch_size, plan.iterations, plan.eta, plan.lam),
        }
    except Exception as exc:  # recorded per row, sweep continues
        return {
            "risk": math.nan, "error": f"{type(exc).__name__}: {exc}",
            "wall_ms": 1e3 * (time.perf_counter() - t0), "plan": None,
        }


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "").strip()
        workers = int(raw) if raw else 1
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise InvalidParameterError("workers must be >= 1 (or 0 for auto)")
    return workers


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> list[RunRecord]:
    """Run a full sweep and return one record per (N, m) point.

    Per-replication failures are folded into the row's ``error`` column;
    the risk statistics then cover the surviving replications (NaN if none
    survive). Rows come back sorted by (n_total, m).
    """
    problem = build_problem(
        dim=config.dim, gamma=config.gamma, zeta=config.zeta,
        source_norm=config.source_norm, noise_sd=config.noise_sd,
    )
    problem_json = problem_to_json(problem)

    points = []
    payloads = []
    for n_total in config.n_list:
        m_requested, m = resolve_m(n_total, config.m_rule)
        points.append((n_total, m_requested, m))
        for rep in range(config.replications):
            payloads.append({
                "problem_json": problem_json,
                "regime": config.regime,
                "n_total": n_total,
                "m": m,
                "rep": rep,
                "base_seed": config.base_seed,
                "scale": config.scale,
                "theory_compliant": config.theory_compliant,
                "filter_tag": config.filter_tag,
            })

    n_workers = _resolve_workers(workers)
    if n_workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_point, payloads))
    else:
        results = [_run_point(p) for p in payloads]

    records = []
    reps = config.replications
    for i, (n_total, m_requested, m) in enumerate(points):
        chunk = results[i * reps:(i + 1) * reps]
        risks = np.array([c["risk"] for c in chunk])
        good = risks[np.isfinite(risks)]
        failures = [c["error"] for c in chunk if c["error"]]
        plan_info = next((c["plan"] for c in chunk if c["plan"] is not None), None)
        batch_size, iterations, eta, lam = plan_info if plan_info else (None, None, None, None)
        if good.size:
            risk_mean = float(np.mean(good))
            risk_se = float(np.std(good, ddof=1) / math.sqrt(good.size)) if good.size > 1 else 0.0
        else:
            risk_mean = math.nan
            risk_se = math.nan
        error = ""
        if failures:
            error = failures[0] if len(failures) == 1 else f"{failures[0]} (+{len(failures) - 1} more)"
        records.append(RunRecord(
            version=f"kdc-{__version__}",
            algorithm=config.algorithm,
            regime=config.regime,
            n_total=n_total,
            m_requested=m_requested,
            m=m,
            n_local=n_total // m,
            batch_size=batch_size,
            iterations=iterations,
            eta=eta,
            lam=lam,
            scale=config.scale,
            filter=config.filter_tag if config.algorithm == "sa" else "",
            replications=reps,
            base_seed=config.base_seed,
            data_seed_first=derive_seed(config.base_seed, TAG_DATA, n_total, 0),
            risk_mean=risk_mean,
            risk_se=risk_se,
            wall_ms=float(sum(c["wall_ms"] for c in chunk)),
            error=error,
        ))
    records.sort(key=lambda r: (r.n_total, r.m))
    return records


def emit_rate_table(records, zeta: float, gamma: float, out_path: str | None = None):
    """Fit the empirical rate from sweep records and print a summary line.

    Error rows and non-finite risks are dropped; duplicated sample sizes
    are averaged. Returns (RateFit, table_csv_text) and, when ``out_path``
    is given, also writes the table there.
    """
    by_n: dict[int, list[float]] = {}
    for rec in records:
        if rec.error or not math.isfinite(rec.risk_mean) or rec.risk_mean <= 0:
            continue
        by_n.setdefault(rec.n_total, []).append(rec.risk_mean)
    points = [(n, float(np.mean(vals))) for n, vals in sorted(by_n.items())]
    fit = fit_rate(points)
    theory = theory_exponent(zeta, gamma)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("n_total", "risk_mean", "log_n", "log_risk"))
    for n, risk in points:
        writer.writerow((n, f"{risk:.17g}", f"{math.log(n):.17g}", f"{math.log(risk):.17g}"))
    writer.writerow(())
    writer.writerow(("slope", f"{fit.slope:.17g}"))
    writer.writerow(("intercept", f"{fit.intercept:.17g}"))
    writer.writerow(("r_squared", f"{fit.r_squared:.17g}"))
    writer.writerow(("theory_exponent", f"{theory:.17g}"))
    writer.writerow(("gap", f"{fit.slope - theory:.17g}"))
    table = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(table)
    print(
        f"rate fit: slope={fit.slope:.4f} r2={fit.r_squared:.4f} "
        f"theory={theory:.4f} gap={fit.slope - theory:+.4f}"
    )
    return fit, table
