"""Splitting solver for the PSD-constrained weighted least-squares subproblem

    minimize  0.5 * ||map(X) - b||^2 + <X, W>
    subject to  X PSD  (and optionally X in a real/nonnegative entry class).

Alternating direction method of multipliers with an auxiliary PSD block:
the X-step applies the ensemble's Woodbury-based shifted inverse (composed
with the entry-class projection when one is active), the Z-step projects onto
the PSD cone, and the dual matrix ascends on the split residual.  Iteration
stops when the primal residual ``X - Z`` and dual residual
``delta * (Z - Z_prev)`` both fall below mixed absolute/relative thresholds.
The penalty ``delta`` can self-tune by doubling or halving whenever the two
residual norms drift more than a factor of ten apart.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import require
from .operators import MeasurementEnsemble, hermitian_part
from .spectral import Constraint, project_constraint, project_psd

TERMINATION_RESIDUALS = "residuals"
TERMINATION_ITERATION_CAP = "iteration-cap"


@dataclass(frozen=True)
class AdmmConfig:
    """Inner-solver settings.

    delta0 : initial augmented-Lagrangian penalty.
    eps_abs, eps_rel : absolute / relative residual tolerances.
    max_iters : iteration cap (the run terminates with flag
        ``iteration-cap`` rather than raising).
    adaptive_delta : enable the doubling/halving penalty update.
    """

    delta0: float = 1.0
    eps_abs: float = 1e-7
    eps_rel: float = 1e-5
    max_iters: int = 5000
    adaptive_delta: bool = True

    def __post_init__(self) -> None:
        require(self.delta0 > 0, f"delta0 must be positive, got {self.delta0}")
        require(self.eps_abs > 0, f"eps_abs must be positive, got {self.eps_abs}")
        require(self.eps_rel > 0, f"eps_rel must be positive, got {self.eps_rel}")
        require(self.max_iters >= 1, f"max_iters must be >= 1, got {self.max_iters}")


@dataclass
class AdmmState:
    """Solver state after a call; reusable for warm restarts.

    ``x`` is the last least-squares iterate, ``z`` the PSD iterate actually
    returned as the solution, ``y`` the (unscaled) dual matrix.  ``iters``
    counts update sweeps performed by the producing call; ``r_norm`` and
    ``s_norm`` are the final primal/dual residual Frobenius norms.
    """

    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    delta: float
    iters: int
    r_norm: float
    s_norm: float
    termination: str


def warm_restart(state: AdmmState) -> AdmmState:
    """State for a follow-up solve of a *modified* subproblem.

    Keeps (x, z, y, delta) but marks the residuals stale so the solver does
    not return immediately on the previous problem's convergence record.
    """
    return replace(state, iters=0, r_norm=np.inf, s_norm=np.inf)


def adapt_penalty(delta: float, r_norm: float, s_norm: float) -> float:
    """Residual-balancing update: double delta when the primal residual
    dominates tenfold, halve it in the symmetric case, else keep it."""
    require(delta > 0, f"penalty must be positive, got {delta}")
    if r_norm > 10.0 * s_norm:
        return 2.0 * delta
    if 10.0 * r_norm < s_norm:
        return delta / 2.0
    return delta


def solve_subproblem(
    ens: MeasurementEnsemble,
    b: np.ndarray,
    w: np.ndarray,
    omega: Constraint = Constraint.COMPLEX,
    cfg: AdmmConfig = AdmmConfig(),
    warm: AdmmState | None = None,
) -> tuple[np.ndarray, AdmmState]:
    """Minimize ``0.5 ||map(X) - b||^2 + <X, W>`` over the PSD cone.

    Returns the PSD iterate ``z`` as the solution together with the final
    state.  Passing a previously returned state as ``warm`` resumes from it;
    if that state already satisfies the stopping criterion the same solution
    is returned with zero additional iterations.  Use :func:`warm_restart`
    instead when ``b`` or ``w`` changed since the state was produced.
    """
    n = ens.n
    b = np.asarray(b, dtype=np.float64)
    require(b.shape == (ens.m,),
            f"data length {b.shape} does not match measurement count {ens.m}")
    w = np.asarray(w, dtype=np.complex128)
    require(w.shape == (n, n), f"weight shape {w.shape} does not match dimension {n}")

    if warm is None:
        x = np.zeros((n, n), dtype=np.complex128)
        z = np.zeros((n, n), dtype=np.complex128)
        y = np.zeros((n, n), dtype=np.complex128)
        delta = cfg.delta0
        r_norm = np.inf
        s_norm = np.inf
    else:
        x = warm.x.copy()
        z = warm.z.copy()
        y = warm.y.copy()
        delta = warm.delta
        r_norm = warm.r_norm
        s_norm = warm.s_norm

    adjoint_b = ens.adjoint(b)
    constrained = omega is not Constraint.COMPLEX

    def stop_ok() -> bool:
        eps_pri = n * cfg.eps_abs + cfg.eps_rel * max(np.linalg.norm(x), np.linalg.norm(z))
        eps_dual = n * cfg.eps_abs + cfg.eps_rel * np.linalg.norm(y)
        return r_norm <= eps_pri and s_norm <= eps_dual

    iters = 0
    converged = stop_ok()
    while iters < cfg.max_iters and not converged:
        rhs = adjoint_b - w + delta * z - y
        x = ens.apply_regularized_inverse(delta, rhs)
        if constrained:
            x = project_constraint(x, omega)
        z_prev = z
        z = project_psd(x + y / delta)
        y = hermitian_part(y + delta * (x - z))
        r_norm = float(np.linalg.norm(x - z))
        s_norm = float(delta * np.linalg.norm(z - z_prev))
        iters += 1
        converged = stop_ok()
        if cfg.adaptive_delta and not converged:
            # unscaled dual carries over unchanged; only y/delta rescales
            delta = adapt_penalty(delta, r_norm, s_norm)

    state = AdmmState(
        x=x, z=z, y=y, delta=delta, iters=iters,
        r_norm=float(r_norm), s_norm=float(s_norm),
        termination=TERMINATION_RESIDUALS if converged else TERMINATION_ITERATION_CAP,
    )
    return z.copy(), state
