"""Monte-Carlo experiment drivers with seeded, byte-reproducible output.

Three campaign kinds mirror the benchmark protocol: an operator-norm table
over signal dimensions, noiseless phase-transition curves (success rate
versus measurement count), and noisy sweeps of reconstruction SNR versus
input SNR with the penalty set as a multiple of the noise scale mu.  A
fourth entry point recovers a single instance loaded from JSON.

Seed discipline: every (cell, trial) derives an instance seed as

    mix_seed(base_seed, kind_tag, n, m, snr_index, trial)

via a SplitMix64 chain, and the ensemble / signal / noise streams within the
instance use ``mix_seed(instance_seed, 1 | 2 | 3)``.  Any single cell can
therefore be re-run in isolation and reproduce its rows exactly.  Within a
cell all methods (and all penalty factors) share the same instance, so
method comparisons are paired.
"""

from __future__ import annotations

import contextlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    def threadpool_limits(limits=None):
        return contextlib.nullcontext()

from . import dca
from .admm import AdmmConfig
from .dca import DcaConfig, Method, SolveResult
from .errors import ContractViolation, require
from .operators import MeasurementEnsemble, sample_gaussian_ensemble
from .recovery import (
    SNR_CAP_DB,
    SUCCESS_REL_MSE,
    add_noise,
    extract_signal,
    lambda_scale,
    rel_mse,
    snr_db,
)
from .spectral import Constraint

KIND_NORM_TABLE = "norm-table"
KIND_PHASE_TRANSITION = "phase-transition"
KIND_NOISE_SWEEP = "noise-sweep"

_KIND_TAGS = {KIND_NORM_TABLE: 1, KIND_PHASE_TRANSITION: 2, KIND_NOISE_SWEEP: 3}
_ENSEMBLE_STREAM = 1
_SIGNAL_STREAM = 2
_NOISE_STREAM = 3

_MASK64 = (1 << 64) - 1


def _splitmix64(value: int) -> int:
    value = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = value
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(base_seed: int, *parts: int) -> int:
    """Fold integer parts into a 64-bit seed with a SplitMix64 chain.

    Deterministic, order-sensitive, platform-independent; negative parts are
    reduced modulo 2**64.
    """
    acc = base_seed & _MASK64
    for part in parts:
        acc = _splitmix64(acc ^ (part & _MASK64))
    return acc


def sample_signal(n: int, seed: int) -> np.ndarray:
    """Random complex signal with standard-normal real and imaginary parts."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# -- penalty policies --


@dataclass(frozen=True)
class FixedLambda:
    """Use one penalty value for every cell."""

    value: float

    def __post_init__(self) -> None:
        require(self.value > 0, f"lambda must be positive, got {self.value}")


@dataclass(frozen=True)
class MuMultiples:
    """Set the penalty to ``factor * mu`` where ``mu`` is the noise scale."""

    factors: tuple[float, ...]

    def __post_init__(self) -> None:
        require(len(self.factors) >= 1, "need at least one mu factor")
        require(all(f > 0 for f in self.factors),
                f"mu factors must be positive, got {self.factors}")


# When mu vanishes (noiseless sentinel), factor * mu degenerates; fall back
# to the noiseless default penalty.
_NOISELESS_LAMBDA = 1e-4


@dataclass(frozen=True)
class SolverSettings:
    """Per-spec overrides of the solver defaults."""

    tol: float = 1e-2
    max_outer: int = 10
    eps_abs: float = 1e-7
    eps_rel: float = 1e-5
    max_inner: int = 5000
    delta0: float = 1.0
    adaptive_delta: bool = True
    constraint: Constraint = Constraint.COMPLEX

    def dca_config(self, lam: float, method: Method) -> DcaConfig:
        return DcaConfig(
            lam=lam,
            tol=self.tol,
            max_outer=self.max_outer,
            admm=AdmmConfig(
                delta0=self.delta0,
                eps_abs=self.eps_abs,
                eps_rel=self.eps_rel,
                max_iters=self.max_inner,
                adaptive_delta=self.adaptive_delta,
            ),
            omega=self.constraint,
            method=method,
        )


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative Monte-Carlo campaign."""

    kind: str
    n_values: tuple[int, ...]
    m_values: tuple[int, ...] = ()
    trials: int = 1
    base_seed: int = 0
    methods: tuple[Method, ...] = (Method.PHASELIFTOFF,)
    lambda_policy: FixedLambda | MuMultiples = FixedLambda(1e-4)
    snr_levels_db: tuple[float, ...] = ()
    solver: SolverSettings = field(default_factory=SolverSettings)
    jobs: int = 1

    def __post_init__(self) -> None:
        require(self.kind in _KIND_TAGS, f"unknown experiment kind {self.kind!r}")
        require(self.trials >= 1, f"trials must be >= 1, got {self.trials}")
        require(len(self.n_values) >= 1, "need at least one signal dimension")
        require(self.jobs >= 1, f"jobs must be >= 1, got {self.jobs}")


# -- result rows --

CSV_COLUMNS = (
    "kind", "method", "n", "m", "lambda", "snr_in_db", "trial", "seed",
    "rel_mse", "snr_out_db", "success", "outer_iters", "inner_iters_total",
    "wall_time_ms", "rank_ratio", "termination",
    "lambda_factor", "operator_norm", "e_norm", "x_err_fro",
)


@dataclass(frozen=True)
class ResultRow:
    kind: str
    method: str | None = None
    n: int = 0
    m: int = 0
    lam: float | None = None
    snr_in_db: float | None = None
    trial: int = 0
    seed: int | None = None
    rel_mse: float | None = None
    snr_out_db: float | None = None
    success: bool | None = None
    outer_iters: int | None = None
    inner_iters_total: int | None = None
    wall_time_ms: float | None = None
    rank_ratio: float | None = None
    termination: str | None = None
    lambda_factor: float | None = None
    operator_norm: float | None = None
    e_norm: float | None = None
    x_err_fro: float | None = None

    def record(self) -> dict:
        """Values keyed by CSV column name, in column order."""
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values["lambda"] = values.pop("lam")
        return {col: values[col] for col in CSV_COLUMNS}


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


@dataclass
class ResultTable:
    """Rows of one campaign, serializable to CSV or JSON."""

    rows: list[ResultRow]

    def select(self, **criteria) -> list[ResultRow]:
        """Rows whose attributes equal every given keyword value."""
        out = self.rows
        for name, wanted in criteria.items():
            out = [r for r in out if getattr(r, name) == wanted]
        return out

    def success_rate(self, **criteria) -> float:
        rows = [r for r in self.select(**criteria) if r.success is not None]
        require(len(rows) > 0, f"no rows match {criteria}")
        return sum(1.0 for r in rows if r.success) / len(rows)

    def mean(self, column: str, **criteria) -> float:
        vals = [getattr(r, column) for r in self.select(**criteria)]
        vals = [v for v in vals if v is not None]
        require(len(vals) > 0, f"no values of {column!r} match {criteria}")
        return float(np.mean(vals))

    def to_csv_text(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for row in self.rows:
            lines.append(",".join(_format_cell(v) for v in row.record().values()))
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> list[dict]:
        out = []
        for row in self.rows:
            rec = {}
            for key, value in row.record().items():
                if isinstance(value, (np.integer, np.floating)):
                    value = value.item()
                rec[key] = value
            out.append(rec)
        return out


# -- shared solve-and-score step --


def _planted_instance(spec: ExperimentSpec, n: int, m: int,
                      instance_seed: int) -> tuple[MeasurementEnsemble, np.ndarray, np.ndarray, np.ndarray]:
    ens = sample_gaussian_ensemble(n, m, mix_seed(instance_seed, _ENSEMBLE_STREAM))
    x_true = sample_signal(n, mix_seed(instance_seed, _SIGNAL_STREAM))
    lifted = np.outer(x_true, x_true.conj())
    return ens, x_true, lifted, ens.forward(lifted)


def _solve_and_score(ens: MeasurementEnsemble, b: np.ndarray, lam: float,
                     method: Method, spec: ExperimentSpec,
                     x_true: np.ndarray, lifted: np.ndarray) -> tuple[SolveResult, dict]:
    start = time.perf_counter()
    result = dca.solve(ens, b, spec.solver.dca_config(lam, method))
    wall_ms = (time.perf_counter() - start) * 1e3
    if np.linalg.norm(result.x_final) <= dca.ZERO_THRESHOLD_PER_DIM * ens.n:
        err = rel_mse(np.zeros_like(x_true), x_true)
    else:
        err = rel_mse(extract_signal(result.x_final), x_true)
    scored = {
        "rel_mse": err,
        "snr_out_db": min(snr_db(err), SNR_CAP_DB),
        "success": err < SUCCESS_REL_MSE,
        "outer_iters": result.outer_iters,
        "inner_iters_total": result.inner_iters_total,
        "wall_time_ms": wall_ms,
        "rank_ratio": result.rank_ratio,
        "termination": result.termination,
        "x_err_fro": float(np.linalg.norm(result.x_final - lifted)),
    }
    return result, scored


def _pin_worker_blas() -> None:
    # One BLAS thread per worker: the cells are the unit of parallelism, and
    # multithreaded kernels lose outright at these matrix sizes.
    global _WORKER_BLAS_LIMIT
    _WORKER_BLAS_LIMIT = threadpool_limits(limits=1)


def _run_tasks(tasks, worker, jobs: int) -> list[ResultRow]:
    if jobs <= 1 or len(tasks) <= 1:
        with threadpool_limits(limits=1):
            groups = [worker(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs,
                                 initializer=_pin_worker_blas) as pool:
            groups = list(pool.map(worker, tasks, chunksize=1))
    return [row for group in groups for row in group]


# -- campaign drivers --


def _norm_table_cell(task) -> list[ResultRow]:
    spec, n, m, trial = task
    instance_seed = mix_seed(spec.base_seed, _KIND_TAGS[KIND_NORM_TABLE], n, m, 0, trial)
    ens = sample_gaussian_ensemble(n, m, mix_seed(instance_seed, _ENSEMBLE_STREAM))
    start = time.perf_counter()
    norm = ens.operator_norm()
    wall_ms = (time.perf_counter() - start) * 1e3
    return [ResultRow(kind=KIND_NORM_TABLE, n=n, m=m, trial=trial,
                      seed=instance_seed, wall_time_ms=wall_ms, operator_norm=norm)]


def run_norm_table(spec: ExperimentSpec) -> ResultTable:
    """Sample ensembles per dimension and record operator norms.

    The measurement count defaults to ``4 n`` unless a single override is
    supplied in ``m_values``.  Emits one row per sample plus a mean row per
    dimension (``trial = -1``, ``termination = "mean"``).
    """
    require(spec.kind == KIND_NORM_TABLE, f"spec kind {spec.kind!r} is not norm-table")
    require(len(spec.m_values) <= 1,
            "norm-table accepts at most one measurement-count override")
    tasks = []
    for n in spec.n_values:
        m = spec.m_values[0] if spec.m_values else 4 * n
        for trial in range(spec.trials):
            tasks.append((spec, n, m, trial))
    rows = _run_tasks(tasks, _norm_table_cell, spec.jobs)
    with_means: list[ResultRow] = []
    for n in spec.n_values:
        m = spec.m_values[0] if spec.m_values else 4 * n
        samples = [r for r in rows if r.n == n]
        with_means.extend(samples)
        with_means.append(ResultRow(
            kind=KIND_NORM_TABLE, n=n, m=m, trial=-1, termination="mean",
            operator_norm=float(np.mean([r.operator_norm for r in samples]))))
    return ResultTable(with_means)


def _phase_transition_cell(task) -> list[ResultRow]:
    spec, n, m, trial = task
    instance_seed = mix_seed(
        spec.base_seed, _KIND_TAGS[KIND_PHASE_TRANSITION], n, m, 0, trial)
    ens, x_true, lifted, b = _planted_instance(spec, n, m, instance_seed)
    lam = spec.lambda_policy.value
    rows = []
    for method in spec.methods:
        _, scored = _solve_and_score(ens, b, lam, method, spec, x_true, lifted)
        rows.append(ResultRow(
            kind=KIND_PHASE_TRANSITION, method=method.value, n=n, m=m, lam=lam,
            trial=trial, seed=instance_seed, **scored))
    return rows


def run_phase_transition(spec: ExperimentSpec) -> ResultTable:
    """Noiseless success-rate curve over the measurement-count grid.

    Within each (m, trial) cell every method solves the identical planted
    instance, so success rates are directly comparable.
    """
    require(spec.kind == KIND_PHASE_TRANSITION,
            f"spec kind {spec.kind!r} is not phase-transition")
    require(len(spec.n_values) == 1, "phase-transition runs one signal dimension")
    require(len(spec.m_values) >= 1, "phase-transition needs a measurement grid")
    require(isinstance(spec.lambda_policy, FixedLambda),
            "phase-transition is noiseless; use a fixed lambda")
    n = spec.n_values[0]
    tasks = [(spec, n, m, trial)
             for m in spec.m_values for trial in range(spec.trials)]
    return ResultTable(_run_tasks(tasks, _phase_transition_cell, spec.jobs))


def _noise_sweep_cell(task) -> list[ResultRow]:
    spec, n, m, snr_index, trial = task
    level = spec.snr_levels_db[snr_index]
    instance_seed = mix_seed(
        spec.base_seed, _KIND_TAGS[KIND_NOISE_SWEEP], n, m, snr_index, trial)
    ens, x_true, lifted, b_clean = _planted_instance(spec, n, m, instance_seed)
    b_noisy, e = add_noise(b_clean, level, mix_seed(instance_seed, _NOISE_STREAM))
    e_norm = float(np.linalg.norm(e))
    mu = lambda_scale(ens, e_norm)
    rows = []
    for factor in spec.lambda_policy.factors:
        lam = factor * mu if mu > 0.0 else _NOISELESS_LAMBDA
        for method in spec.methods:
            _, scored = _solve_and_score(ens, b_noisy, lam, method, spec, x_true, lifted)
            rows.append(ResultRow(
                kind=KIND_NOISE_SWEEP, method=method.value, n=n, m=m, lam=lam,
                snr_in_db=level, trial=trial, seed=instance_seed,
                lambda_factor=factor, e_norm=e_norm, **scored))
    return rows


def run_noise_sweep(spec: ExperimentSpec) -> ResultTable:
    """Reconstruction SNR versus input SNR with lambda = factor * mu.

    The noise scale mu is computed from the realized noise norm of each
    instance; all penalty factors (and methods) share that instance.
    """
    require(spec.kind == KIND_NOISE_SWEEP, f"spec kind {spec.kind!r} is not noise-sweep")
    require(len(spec.n_values) == 1, "noise-sweep runs one signal dimension")
    require(isinstance(spec.lambda_policy, MuMultiples),
            "noise-sweep sets lambda as multiples of mu")
    require(len(spec.snr_levels_db) >= 1, "noise-sweep needs input SNR levels")
    n = spec.n_values[0]
    m = spec.m_values[0] if spec.m_values else 4 * n
    tasks = [(spec, n, m, snr_index, trial)
             for snr_index in range(len(spec.snr_levels_db))
             for trial in range(spec.trials)]
    return ResultTable(_run_tasks(tasks, _noise_sweep_cell, spec.jobs))


# -- single-instance recovery --


@dataclass(frozen=True)
class Instance:
    """One measurement scenario loaded from JSON."""

    ensemble: MeasurementEnsemble
    b: np.ndarray
    x_true: np.ndarray | None
    e_norm: float | None


def load_instance(path: str) -> Instance:
    """Parse an instance file; raises :class:`ContractViolation` on bad input."""
    try:
        with open(path, "r", encoding="utf-8") as fp:
            obj = json.load(fp)
    except (OSError, json.JSONDecodeError) as exc:
        raise ContractViolation(f"cannot read instance {path!r}: {exc}") from exc
    require(isinstance(obj, dict), "instance file must hold a JSON object")
    ens = MeasurementEnsemble.from_json_dict(obj)
    try:
        b = np.asarray(obj["b"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractViolation(f"malformed measurement vector: {exc}") from exc
    require(b.shape == (ens.m,),
            f"measurement vector has length {b.shape}, expected {ens.m}")
    x_true = None
    if obj.get("x_true") is not None:
        pairs = np.asarray(obj["x_true"], dtype=np.float64)
        require(pairs.shape == (ens.n, 2),
                f"x_true has shape {pairs.shape}, expected {(ens.n, 2)}")
        x_true = pairs[:, 0] + 1j * pairs[:, 1]
    e_norm = None
    if obj.get("e_norm") is not None:
        e_norm = float(obj["e_norm"])
        require(e_norm >= 0.0, f"e_norm must be nonnegative, got {e_norm}")
    return Instance(ensemble=ens, b=b, x_true=x_true, e_norm=e_norm)


def save_instance(path: str, ens: MeasurementEnsemble, b: np.ndarray,
                  x_true: np.ndarray | None = None,
                  e_norm: float | None = None) -> None:
    """Write an instance file in the schema :func:`load_instance` reads."""
    obj = ens.to_json_dict()
    obj["b"] = np.asarray(b, dtype=np.float64).tolist()
    if x_true is not None:
        x_true = np.asarray(x_true, dtype=np.complex128)
        obj["x_true"] = np.stack([x_true.real, x_true.imag], axis=-1).tolist()
    if e_norm is not None:
        obj["e_norm"] = float(e_norm)
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(obj, fp)
        fp.write("\n")


def run_single_recover(
    instance_path: str,
    method: Method = Method.PHASELIFTOFF,
    constraint: Constraint = Constraint.COMPLEX,
    lambda_policy: FixedLambda | MuMultiples = FixedLambda(1e-4),
    solver: SolverSettings = SolverSettings(),
) -> dict:
    """Solve one instance file and return a JSON-ready report.

    A mu-based penalty requires the instance to carry ``e_norm``; the report
    includes recovery quality fields only when ``x_true`` is present.
    """
    instance = load_instance(instance_path)
    if isinstance(lambda_policy, FixedLambda):
        lam = lambda_policy.value
    else:
        require(len(lambda_policy.factors) == 1,
                "single recovery takes exactly one mu factor")
        require(instance.e_norm is not None,
                "mu-based lambda needs e_norm in the instance file")
        mu = lambda_scale(instance.ensemble, instance.e_norm)
        lam = lambda_policy.factors[0] * mu if mu > 0.0 else _NOISELESS_LAMBDA

    solver = replace(solver, constraint=constraint)
    start = time.perf_counter()
    result = dca.solve(instance.ensemble, instance.b,
                       solver.dca_config(lam, method))
    wall_ms = (time.perf_counter() - start) * 1e3

    solved_to_zero = (float(np.linalg.norm(result.x_final))
                      <= dca.ZERO_THRESHOLD_PER_DIM * instance.ensemble.n)
    signal = (np.zeros(instance.ensemble.n, dtype=np.complex128)
              if solved_to_zero else extract_signal(result.x_final))
    report = {
        "n": instance.ensemble.n,
        "m": instance.ensemble.m,
        "method": method.value,
        "constraint": constraint.value,
        "lambda": lam,
        "signal": np.stack([signal.real, signal.imag], axis=-1).tolist(),
        "objective_final": result.objective_trace[-1],
        "outer_iters": result.outer_iters,
        "inner_iters_total": result.inner_iters_total,
        "termination": result.termination,
        "rank_ratio": result.rank_ratio,
        "kkt_complementarity": result.kkt_complementarity,
        "kkt_dual_infeasibility": result.kkt_dual_infeasibility,
        "wall_time_ms": wall_ms,
    }
    if instance.x_true is not None:
        err = rel_mse(signal, instance.x_true)
        report["rel_mse"] = err
        report["snr_out_db"] = min(snr_db(err), SNR_CAP_DB)
        report["success"] = err < SUCCESS_REL_MSE
    return report
