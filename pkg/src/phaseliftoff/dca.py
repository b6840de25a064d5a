"""Outer solvers for lifted phase retrieval.

Three methods share one convex subproblem (weighted least squares over the
PSD cone, handled by :mod:`phaseliftoff.admm`):

* ``phaseliftoff`` — least squares penalized by ``lam * (Tr X - ||X||_F)``,
  minimized by successive convex majorization: at each outer step the
  concave part is linearized at the current iterate, producing the weight
  ``lam * (I - X_k / ||X_k||_F)`` (or ``lam * I`` at zero).
* ``phaselift`` — the trace-norm-penalized baseline; a single subproblem
  with weight ``lam * I``.
* ``logdet`` — iterative reweighting for the log-det surrogate; the weight
  is ``lam * (X_k + eps I)^{-1}`` with ``lam * I`` on the first step.

The outer loop starts from zero, warm-starts the inner solver across
iterations, tracks the method's own objective, and stops when the relative
change of the iterate falls below ``tol``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import admm
from .errors import ContractViolation, require
from .operators import MeasurementEnsemble, hermitian_part
from .spectral import (
    Constraint,
    assert_psd_within_tolerance,
    eigh_descending,
    trace_frobenius_gap,
)

# Iterates with ||X||_F below this times n are treated as the zero matrix
# (the subgradient of the Frobenius norm at zero is taken to be zero there).
ZERO_THRESHOLD_PER_DIM = 1e-12

TERMINATION_TOLERANCE = "tolerance"
TERMINATION_ITERATION_CAP = "iteration-cap"
TERMINATION_STALLED_AT_ZERO = "stalled-at-zero"


class Method(Enum):
    """Solver family selector."""

    PHASELIFTOFF = "phaseliftoff"
    PHASELIFT = "phaselift"
    LOGDET = "logdet"

    @classmethod
    def parse(cls, text: str) -> "Method":
        try:
            return cls(text.strip().lower())
        except ValueError:
            options = ", ".join(m.value for m in cls)
            raise ContractViolation(f"unknown method {text!r}; expected one of {options}")


@dataclass(frozen=True)
class DcaConfig:
    """Outer-solver settings; defaults reproduce the reference experiments."""

    lam: float = 1e-4
    tol: float = 1e-2
    max_outer: int = 10
    admm: admm.AdmmConfig = field(default_factory=admm.AdmmConfig)
    omega: Constraint = Constraint.COMPLEX
    method: Method = Method.PHASELIFTOFF
    logdet_eps: float = 2.0

    def __post_init__(self) -> None:
        require(self.lam > 0, f"lam must be positive, got {self.lam}")
        require(self.tol > 0, f"tol must be positive, got {self.tol}")
        require(self.max_outer >= 1, f"max_outer must be >= 1, got {self.max_outer}")
        require(self.logdet_eps > 0, f"logdet_eps must be positive, got {self.logdet_eps}")


@dataclass
class SolveResult:
    """Outcome of an outer solve.

    ``objective_trace`` holds the method's own objective at the start point
    and after each outer iteration, and is non-increasing for the
    majorization-based methods.  ``rank_ratio`` is the ratio of the two top
    eigenvalues of the final iterate (None for the zero matrix).  The KKT
    fields are None when the final iterate is zero.
    """

    x_final: np.ndarray
    objective_trace: list[float]
    outer_iters: int
    termination: str
    kkt_stationarity: float | None
    kkt_complementarity: float | None
    kkt_dual_infeasibility: float | None
    rank_ratio: float | None
    inner_iters_total: int


def objective(ens: MeasurementEnsemble, b: np.ndarray, lam: float, x) -> float:
    """Penalized least-squares objective
    ``0.5 ||map(X) - b||^2 + lam * (Tr X - ||X||_F)``."""
    require(lam > 0, f"lam must be positive, got {lam}")
    b = np.asarray(b, dtype=np.float64)
    residual = ens.forward(x) - b
    return 0.5 * float(residual @ residual) + lam * trace_frobenius_gap(x)


def subgradient_weight(x_k, lam: float) -> np.ndarray:
    """Linearization weight ``lam * (I - X_k/||X_k||_F)``, or ``lam * I`` at zero.

    The result is Hermitian with eigenvalues in ``[0, 2 lam]``.
    """
    require(lam > 0, f"lam must be positive, got {lam}")
    x_k = np.asarray(x_k, dtype=np.complex128)
    n = x_k.shape[0]
    norm = np.linalg.norm(x_k)
    eye = np.eye(n, dtype=np.complex128)
    if norm <= ZERO_THRESHOLD_PER_DIM * n:
        return lam * eye
    return hermitian_part(lam * (eye - x_k / norm))


def no_stall_lambda_bound(b: np.ndarray, e_norm: float, trace_xhat: float) -> float:
    """Penalty ceiling ``(||b||^2 - ||e||^2) / (2 Tr(X_hat))`` below which the
    first outer iterate is guaranteed nonzero."""
    b = np.asarray(b, dtype=np.float64)
    b_sq = float(b @ b)
    require(e_norm >= 0, f"noise norm must be nonnegative, got {e_norm}")
    require(b_sq > e_norm ** 2,
            f"need ||b||^2 > ||e||^2, got {b_sq} <= {e_norm ** 2}")
    require(trace_xhat > 0, f"trace of the target must be positive, got {trace_xhat}")
    return (b_sq - e_norm ** 2) / (2.0 * trace_xhat)


def kkt_residuals(
    ens: MeasurementEnsemble, b: np.ndarray, lam: float, x
) -> tuple[float, float, float]:
    """First-order optimality residuals at a nonzero, tolerantly-PSD point.

    The candidate multiplier is reconstructed from the stationarity equation
    ``map^*(map(X) - b) + lam (I - X/||X||_F)``; the returned triple is
    (stationarity, complementarity, dual infeasibility), where stationarity
    is zero by construction, complementarity is ``|<X, M>|`` normalized by
    the product of Frobenius norms, and dual infeasibility is the negative
    part of the multiplier's smallest eigenvalue relative to its spectral
    norm.  Small values certify an approximate KKT point.
    """
    require(lam > 0, f"lam must be positive, got {lam}")
    x = np.asarray(x, dtype=np.complex128)
    norm_x = float(np.linalg.norm(x))
    require(norm_x > 0, "KKT residuals are undefined at the zero matrix")
    assert_psd_within_tolerance(x, context="KKT candidate")
    b = np.asarray(b, dtype=np.float64)
    eye = np.eye(ens.n, dtype=np.complex128)
    multiplier = hermitian_part(
        ens.adjoint(ens.forward(x) - b) + lam * (eye - x / norm_x))
    tiny = np.finfo(np.float64).eps
    inner = float(np.real(np.sum(x.conj() * multiplier)))
    complementarity = abs(inner) / (norm_x * np.linalg.norm(multiplier) + tiny)
    eigs = np.linalg.eigvalsh(multiplier)
    spectral_norm = max(abs(float(eigs[0])), abs(float(eigs[-1])))
    dual_infeasibility = max(0.0, -float(eigs[0])) / (spectral_norm + tiny)
    return 0.0, complementarity, dual_infeasibility


def _logdet_weight(x_k: np.ndarray, lam: float, eps: float) -> np.ndarray:
    dec = eigh_descending(x_k)
    inv = dec.eigenvectors * (1.0 / (dec.eigenvalues + eps))
    return hermitian_part(lam * (inv @ dec.eigenvectors.conj().T))


def _method_objective(
    ens: MeasurementEnsemble, b: np.ndarray, cfg: DcaConfig, x: np.ndarray
) -> float:
    residual = ens.forward(x) - b
    fit = 0.5 * float(residual @ residual)
    if cfg.method is Method.PHASELIFT:
        return fit + cfg.lam * float(np.trace(x).real)
    if cfg.method is Method.LOGDET:
        eigs = np.linalg.eigvalsh(x)
        return fit + cfg.lam * float(np.sum(np.log(eigs + cfg.logdet_eps)))
    return fit + cfg.lam * trace_frobenius_gap(x)


def solve(ens: MeasurementEnsemble, b: np.ndarray, cfg: DcaConfig) -> SolveResult:
    """Run the configured method from the zero matrix.

    Stops on the relative-change rule
    ``||X_k - X_{k-1}||_F / max(||X_k||_F, 1) < tol``, at ``max_outer``
    iterations, or with ``stalled-at-zero`` when the first subproblem
    returns the zero matrix (the iteration then never leaves it).  The
    ``phaselift`` method solves exactly one subproblem; its termination flag
    reflects whether the inner solver converged by residuals.
    """
    b = np.asarray(b, dtype=np.float64)
    require(b.shape == (ens.m,),
            f"data length {b.shape} does not match measurement count {ens.m}")
    n = ens.n
    zero_threshold = ZERO_THRESHOLD_PER_DIM * n
    eye = np.eye(n, dtype=np.complex128)

    x = np.zeros((n, n), dtype=np.complex128)
    trace = [_method_objective(ens, b, cfg, x)]
    state: admm.AdmmState | None = None
    inner_total = 0
    outer_iters = 0
    max_outer = 1 if cfg.method is Method.PHASELIFT else cfg.max_outer
    termination = TERMINATION_ITERATION_CAP

    for k in range(1, max_outer + 1):
        if cfg.method is Method.PHASELIFTOFF:
            w = subgradient_weight(x, cfg.lam)
        elif cfg.method is Method.PHASELIFT:
            w = cfg.lam * eye
        else:
            if k == 1:
                w = cfg.lam * eye
            else:
                w = _logdet_weight(x, cfg.lam, cfg.logdet_eps)
        warm = admm.warm_restart(state) if state is not None else None
        x_new, state = admm.solve_subproblem(ens, b, w, cfg.omega, cfg.admm, warm=warm)
        inner_total += state.iters
        outer_iters = k
        trace.append(_method_objective(ens, b, cfg, x_new))

        if k == 1 and np.linalg.norm(x_new) <= zero_threshold:
            x = x_new
            termination = TERMINATION_STALLED_AT_ZERO
            break
        if cfg.method is Method.PHASELIFT:
            x = x_new
            termination = (TERMINATION_TOLERANCE
                           if state.termination == admm.TERMINATION_RESIDUALS
                           else TERMINATION_ITERATION_CAP)
            break
        change = np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), 1.0)
        x = x_new
        if change < cfg.tol:
            termination = TERMINATION_TOLERANCE
            break

    if np.linalg.norm(x) <= zero_threshold:
        kkt = (None, None, None)
        rank_ratio = None
    else:
        kkt = kkt_residuals(ens, b, cfg.lam, x)
        eigs = np.linalg.eigvalsh(x)
        rank_ratio = (max(float(eigs[-2]), 0.0) / float(eigs[-1])
                      if n >= 2 else 0.0)

    return SolveResult(
        x_final=x,
        objective_trace=trace,
        outer_iters=outer_iters,
        termination=termination,
        kkt_stationarity=kkt[0],
        kkt_complementarity=kkt[1],
        kkt_dual_infeasibility=kkt[2],
        rank_ratio=rank_ratio,
        inner_iters_total=inner_total,
    )
