"""Signal extraction, phase-invariant error metrics, and noise utilities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import require
from .operators import MeasurementEnsemble
from .spectral import assert_psd_within_tolerance, canonical_phase

# A recovery counts as successful below this relative mean squared error.
SUCCESS_REL_MSE = 1e-6

# Infinite reconstruction SNR (rel_mse == 0) serializes as this many dB.
SNR_CAP_DB = 300.0


def extract_signal(x) -> np.ndarray:
    """Best rank-1 signal from a lifted solution: sqrt of the top eigenvalue
    times its (phase-canonicalized) eigenvector."""
    x = np.asarray(x, dtype=np.complex128)
    require(np.linalg.norm(x) > 0.0, "cannot extract a signal from the zero matrix")
    eigs = assert_psd_within_tolerance(x, context="lifted solution")
    _, vectors = np.linalg.eigh(x)
    top = canonical_phase(vectors[:, -1])
    return np.sqrt(max(float(eigs[-1]), 0.0)) * top


def rel_mse(x_rec, x_true) -> float:
    """Squared error between two signals, minimized over a global unit-modulus
    phase and normalized by the reference energy.

    The optimal phase has the closed form ``<x_rec, x_true> / |<x_rec, x_true>|``
    (taken to be 1 when the inner product vanishes).
    """
    x_rec = np.asarray(x_rec, dtype=np.complex128)
    x_true = np.asarray(x_true, dtype=np.complex128)
    require(x_rec.shape == x_true.shape,
            f"signal shapes differ: {x_rec.shape} vs {x_true.shape}")
    true_sq = float(np.real(np.vdot(x_true, x_true)))
    require(true_sq > 0.0, "reference signal must be nonzero")
    overlap = np.vdot(x_rec, x_true)
    phase = overlap / abs(overlap) if abs(overlap) > 0.0 else 1.0
    diff = phase * x_rec - x_true
    return float(np.real(np.vdot(diff, diff))) / true_sq


def snr_db(rel_mse_value: float) -> float:
    """Reconstruction SNR in dB, ``-10 log10(rel. MSE)``; +inf at zero error."""
    require(rel_mse_value >= 0.0, f"rel. MSE must be nonnegative, got {rel_mse_value}")
    if rel_mse_value == 0.0:
        return math.inf
    return -10.0 * math.log10(rel_mse_value)


def add_noise(b, snr_target_db: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Add white Gaussian noise at an exact power ratio.

    The sampled noise vector is renormalized so that
    ``10 log10(||b||^2 / ||e||^2)`` equals ``snr_target_db`` exactly (an
    infinite target yields zero noise).  Returns ``(b + e, e)``.
    """
    b = np.asarray(b, dtype=np.float64)
    b_norm = float(np.linalg.norm(b))
    require(b_norm > 0.0, "cannot set an SNR against a zero measurement vector")
    if math.isinf(snr_target_db):
        e = np.zeros_like(b)
        return b.copy(), e
    target_norm = b_norm * 10.0 ** (-snr_target_db / 20.0)
    raw = np.random.default_rng(seed).standard_normal(b.shape[0])
    e = raw * (target_norm / float(np.linalg.norm(raw)))
    return b + e, e


def lambda_scale(ens: MeasurementEnsemble, e_norm: float) -> float:
    """Natural penalty unit under noise: operator norm times noise norm."""
    require(e_norm >= 0.0, f"noise norm must be nonnegative, got {e_norm}")
    return ens.operator_norm() * e_norm


def equivalence_threshold(mu: float) -> float:
    """Penalty level ``mu / (sqrt(2) - 1)`` above which the penalized problem
    provably shares its solutions with exact rank-1 least squares."""
    require(mu >= 0.0, f"mu must be nonnegative, got {mu}")
    return mu / (math.sqrt(2.0) - 1.0)


def stability_bound(alpha: float, e_norm: float, m: int) -> float:
    """Diagnostic recovery-error bound ``C_alpha * ||e|| / sqrt(m)`` with
    ``C_alpha = sqrt(2) / ((sqrt(2) - 1)(1 - alpha))``.

    The probabilistic measurement condition behind the bound is not checked.
    """
    require(0.0 < alpha < 1.0, f"alpha must lie in (0, 1), got {alpha}")
    require(e_norm >= 0.0, f"noise norm must be nonnegative, got {e_norm}")
    require(m >= 1, f"measurement count must be >= 1, got {m}")
    c_alpha = math.sqrt(2.0) / ((math.sqrt(2.0) - 1.0) * (1.0 - alpha))
    return c_alpha * e_norm / math.sqrt(m)


@dataclass(frozen=True)
class RecoveryReport:
    """Phase-aligned comparison of a recovered signal against the truth."""

    rel_mse: float
    snr_db: float
    success: bool
    aligned_signal: np.ndarray

    @classmethod
    def compare(cls, x_rec, x_true) -> "RecoveryReport":
        x_rec = np.asarray(x_rec, dtype=np.complex128)
        x_true = np.asarray(x_true, dtype=np.complex128)
        err = rel_mse(x_rec, x_true)
        overlap = np.vdot(x_rec, x_true)
        phase = overlap / abs(overlap) if abs(overlap) > 0.0 else 1.0
        return cls(
            rel_mse=err,
            snr_db=snr_db(err),
            success=err < SUCCESS_REL_MSE,
            aligned_signal=phase * x_rec,
        )
