"""Eigenstructure utilities on Hermitian matrices.

PSD-cone projection, entry-class projection for real or nonnegative signal
models, leading-eigenpair extraction with a reproducible phase convention,
and the trace-minus-Frobenius penalty value.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ContractViolation, NumericalError, require
from .operators import hermitian_part

# Iterates count as positive semidefinite when every eigenvalue is at least
# -PSD_RTOL * max(top eigenvalue, 1); splitting iterates are only
# approximately PSD between projections.
PSD_RTOL = 1e-9


class Constraint(Enum):
    """Admissible entry class for lifted iterates.

    COMPLEX leaves the full Hermitian space, REAL keeps entrywise real
    matrices, NONNEGATIVE additionally clamps entries at zero.
    """

    COMPLEX = "complex"
    REAL = "real"
    NONNEGATIVE = "nonnegative"

    @classmethod
    def parse(cls, text: str) -> "Constraint":
        try:
            return cls(text.strip().lower())
        except ValueError:
            options = ", ".join(c.value for c in cls)
            raise ContractViolation(f"unknown constraint {text!r}; expected one of {options}")


@dataclass(frozen=True)
class EigenDecomposition:
    """Full Hermitian eigendecomposition with eigenvalues in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, matching eigenvalue order


def eigh_descending(x) -> EigenDecomposition:
    """Eigendecompose a Hermitian matrix, largest eigenvalue first."""
    x = np.asarray(x, dtype=np.complex128)
    try:
        w, v = np.linalg.eigh(x)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"Hermitian eigensolve failed for shape {x.shape}: {exc}") from exc
    return EigenDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def project_psd(x) -> np.ndarray:
    """Project onto the PSD cone by clamping eigenvalues at zero."""
    x = np.asarray(x, dtype=np.complex128)
    try:
        w, v = np.linalg.eigh(x)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"PSD projection eigensolve failed for shape {x.shape}: {exc}") from exc
    return hermitian_part((v * np.maximum(w, 0.0)) @ v.conj().T)


def project_constraint(x, omega: Constraint) -> np.ndarray:
    """Project onto the entry class ``omega`` (identity for COMPLEX)."""
    x = np.asarray(x, dtype=np.complex128)
    if omega is Constraint.COMPLEX:
        return x
    if omega is Constraint.REAL:
        return x.real.astype(np.complex128)
    return np.maximum(x.real, 0.0).astype(np.complex128)


def canonical_phase(u: np.ndarray) -> np.ndarray:
    """Rotate a vector's global phase so its largest-modulus entry is real positive."""
    i = int(np.argmax(np.abs(u)))
    pivot = u[i]
    if pivot == 0:
        return u.copy()
    return u * (pivot.conjugate() / abs(pivot))


def leading_eigpair(x) -> tuple[float, np.ndarray]:
    """Return the algebraically largest eigenvalue and a unit eigenvector.

    The eigenvector phase is canonicalized via :func:`canonical_phase` so
    repeated runs extract the same vector.  Raises on the zero matrix.
    """
    x = np.asarray(x, dtype=np.complex128)
    require(np.linalg.norm(x) > 0.0, "no leading eigenpair: matrix is zero")
    dec = eigh_descending(x)
    return float(dec.eigenvalues[0]), canonical_phase(dec.eigenvectors[:, 0])


def assert_psd_within_tolerance(x, context: str = "matrix") -> np.ndarray:
    """Check PSD-ness up to ``PSD_RTOL`` and return the ascending eigenvalues."""
    x = np.asarray(x, dtype=np.complex128)
    try:
        w = np.linalg.eigvalsh(x)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolve failed for {context}: {exc}") from exc
    floor = -PSD_RTOL * max(float(w[-1]), 1.0)
    if w[0] < floor:
        raise ContractViolation(
            f"{context} is materially non-PSD: min eigenvalue {w[0]:.3e} "
            f"below tolerance {floor:.3e}")
    return w


def trace_frobenius_gap(x) -> float:
    """Trace minus Frobenius norm of a (tolerantly) PSD matrix.

    Zero exactly on matrices of rank at most one; strictly positive
    otherwise.  Tiny negative floating-point values are clamped to zero.
    """
    w = assert_psd_within_tolerance(x, context="trace_frobenius_gap argument")
    return max(float(np.sum(w) - np.linalg.norm(w)), 0.0)
