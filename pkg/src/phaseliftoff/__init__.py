"""Phase retrieval via semidefinite lifting.

Solvers for recovering a complex signal from squared-magnitude measurements:
a least-squares model penalized by the trace-minus-Frobenius gap (an exact
rank-1 surrogate on the PSD cone, minimized by successive convex
majorization), alongside trace-norm and log-det baselines.  A seeded
Monte-Carlo harness reproduces operator-norm tables, noiseless
phase-transition curves, and noisy SNR sweeps.
"""

from .admm import (
    AdmmConfig,
    AdmmState,
    adapt_penalty,
    solve_subproblem,
    warm_restart,
)
from .dca import (
    DcaConfig,
    Method,
    SolveResult,
    kkt_residuals,
    no_stall_lambda_bound,
    objective,
    solve,
    subgradient_weight,
)
from .errors import ContractViolation, NumericalError
from .harness import (
    ExperimentSpec,
    FixedLambda,
    Instance,
    MuMultiples,
    ResultRow,
    ResultTable,
    SolverSettings,
    load_instance,
    mix_seed,
    run_noise_sweep,
    run_norm_table,
    run_phase_transition,
    run_single_recover,
    sample_signal,
    save_instance,
)
from .operators import (
    MeasurementEnsemble,
    hermitian_part,
    random_hermitian,
    sample_gaussian_ensemble,
)
from .recovery import (
    RecoveryReport,
    add_noise,
    equivalence_threshold,
    extract_signal,
    lambda_scale,
    rel_mse,
    snr_db,
    stability_bound,
)
from .spectral import (
    Constraint,
    EigenDecomposition,
    eigh_descending,
    leading_eigpair,
    project_constraint,
    project_psd,
    trace_frobenius_gap,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "Constraint",
    "ContractViolation",
    "DcaConfig",
    "EigenDecomposition",
    "ExperimentSpec",
    "FixedLambda",
    "Instance",
    "MeasurementEnsemble",
    "Method",
    "MuMultiples",
    "NumericalError",
    "RecoveryReport",
    "ResultRow",
    "ResultTable",
    "SolveResult",
    "SolverSettings",
    "adapt_penalty",
    "add_noise",
    "eigh_descending",
    "equivalence_threshold",
    "extract_signal",
    "hermitian_part",
    "kkt_residuals",
    "lambda_scale",
    "leading_eigpair",
    "load_instance",
    "mix_seed",
    "no_stall_lambda_bound",
    "objective",
    "project_constraint",
    "project_psd",
    "random_hermitian",
    "rel_mse",
    "run_noise_sweep",
    "run_norm_table",
    "run_phase_transition",
    "run_single_recover",
    "sample_gaussian_ensemble",
    "sample_signal",
    "save_instance",
    "snr_db",
    "solve",
    "solve_subproblem",
    "stability_bound",
    "subgradient_weight",
    "trace_frobenius_gap",
    "warm_restart",
]
