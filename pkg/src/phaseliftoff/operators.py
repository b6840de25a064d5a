"""Gaussian measurement ensembles and the lifted measurement map.

Magnitude measurements ``|a_i^* x|^2`` of a signal ``x`` become linear once
the unknown is lifted to the Hermitian matrix ``X = x x^*``: stacking the
measurement vectors ``a_i`` as columns of ``A``, the data are
``diag(A^* X A)``.  This module owns that linear map: forward and adjoint
application, the m-by-m Gram matrix of the composed map (which has the closed
form ``A^*A`` with every entry replaced by its squared modulus), the operator
norm, and the shifted inverse ``(map^* map + delta I)^{-1}`` evaluated through
the Woodbury identity so that only m-by-m systems are ever factorized.

Ensembles are immutable after construction; the Gram matrix, the operator
norm and the per-shift Cholesky factors are cached lazily under a lock, so a
single ensemble can be shared freely across threads.
"""

from __future__ import annotations

import threading

import numpy as np
import scipy.linalg

from .errors import ContractViolation, NumericalError, require

# Imaginary parts of measurement values are discarded only after passing
# |imag| <= IMAG_RTOL * (1 + |real|); larger residues indicate a non-Hermitian
# argument upstream and raise instead of being silently dropped.
IMAG_RTOL = 1e-9


def hermitian_part(x: np.ndarray) -> np.ndarray:
    """Return ``(X + X^*)/2`` as a fresh complex array.

    Every matrix-valued result in the package is passed through this
    symmetrization so downstream eigensolvers stay on the Hermitian path.
    """
    x = np.asarray(x, dtype=np.complex128)
    return 0.5 * (x + x.conj().T)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample a dense Hermitian matrix with standard-normal entry parts."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitian_part(g)


def sample_gaussian_ensemble(n: int, m: int, seed: int) -> "MeasurementEnsemble":
    """Draw an n-by-m complex Gaussian measurement ensemble.

    Entries are i.i.d. with independent real and imaginary parts, each
    standard normal (so ``E|a_ij|^2 = 2``).  The real parts are drawn first,
    then the imaginary parts, from ``numpy.random.default_rng(seed)``; the
    result is bit-reproducible for a given seed.
    """
    require(n >= 1, f"signal dimension must be >= 1, got {n}")
    require(m >= 1, f"measurement count must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    return MeasurementEnsemble(a)


class MeasurementEnsemble:
    """A fixed measurement matrix ``A`` and the lifted linear map it defines.

    Parameters
    ----------
    a : array_like, shape (n, m)
        Measurement vectors as columns.  Stored as complex128 and frozen.

    Attributes
    ----------
    n : int
        Signal dimension (rows of ``A``).
    m : int
        Number of measurements (columns of ``A``).
    """

    def __init__(self, a) -> None:
        arr = np.array(np.asarray(a, dtype=np.complex128), order="C")
        require(arr.ndim == 2, f"measurement matrix must be 2-d, got shape {arr.shape}")
        require(arr.shape[0] >= 1 and arr.shape[1] >= 1,
                f"measurement matrix must be nonempty, got shape {arr.shape}")
        arr.setflags(write=False)
        self._a = arr
        self.n, self.m = arr.shape
        self._lock = threading.Lock()
        self._gram: np.ndarray | None = None
        self._op_norm: float | None = None
        # delta -> Cholesky factor of (gram + delta * I_m)
        self._shift_factors: dict[float, tuple[np.ndarray, bool]] = {}

    @property
    def a(self) -> np.ndarray:
        """The read-only n-by-m measurement matrix."""
        return self._a

    def forward(self, x) -> np.ndarray:
        """Apply the lifted map: return the m real values ``a_i^* X a_i``.

        The argument must be Hermitian; the (analytically zero) imaginary
        parts are checked against ``IMAG_RTOL`` and then dropped.
        """
        x = np.asarray(x, dtype=np.complex128)
        require(x.shape == (self.n, self.n),
                f"matrix shape {x.shape} does not match ensemble dimension {self.n}")
        vals = np.sum(self._a.conj() * (x @ self._a), axis=0)
        bad = np.abs(vals.imag) > IMAG_RTOL * (1.0 + np.abs(vals.real))
        if np.any(bad):
            worst = float(np.max(np.abs(vals.imag[bad])))
            raise ContractViolation(
                f"measurement values have imaginary residue {worst:.3e}; "
                "argument is not Hermitian")
        return np.ascontiguousarray(vals.real)

    def adjoint(self, y) -> np.ndarray:
        """Apply the adjoint map: return ``A Diag(y) A^*`` (Hermitian)."""
        y = np.asarray(y, dtype=np.float64)
        require(y.shape == (self.m,),
                f"vector length {y.shape} does not match measurement count {self.m}")
        return hermitian_part((self._a * y) @ self._a.conj().T)

    def gram(self) -> np.ndarray:
        """Gram matrix of the composed map: ``A^*A`` with entries squared in modulus.

        Real, symmetric, entrywise nonnegative, positive semidefinite.
        Computed once and cached.
        """
        with self._lock:
            if self._gram is None:
                inner = self._a.conj().T @ self._a
                g = inner.real ** 2 + inner.imag ** 2
                self._gram = 0.5 * (g + g.T)
                self._gram.setflags(write=False)
            return self._gram

    def operator_norm(self) -> float:
        """Operator norm of the lifted map: sqrt of the top Gram eigenvalue."""
        g = self.gram()
        with self._lock:
            if self._op_norm is None:
                try:
                    top = scipy.linalg.eigh(
                        g, eigvals_only=True, subset_by_index=[self.m - 1, self.m - 1])
                except scipy.linalg.LinAlgError as exc:
                    raise NumericalError(f"Gram eigensolve failed: {exc}") from exc
                self._op_norm = float(np.sqrt(max(top[0], 0.0)))
            return self._op_norm

    def apply_regularized_inverse(self, delta: float, x) -> np.ndarray:
        """Evaluate ``(map^* map + delta I)^{-1}`` at a Hermitian matrix.

        Uses the Woodbury identity: the n-by-n problem reduces to one m-by-m
        solve against ``gram + delta I_m``, whose Cholesky factor is cached
        per shift.
        """
        require(delta > 0, f"shift must be positive, got {delta}")
        x = np.asarray(x, dtype=np.complex128)
        require(x.shape == (self.n, self.n),
                f"matrix shape {x.shape} does not match ensemble dimension {self.n}")
        u = scipy.linalg.cho_solve(self._shift_factor(delta), self.forward(x))
        correction = (self._a * u) @ self._a.conj().T
        return hermitian_part((x - correction) / delta)

    def _shift_factor(self, delta: float):
        g = self.gram()
        key = float(delta)
        with self._lock:
            factor = self._shift_factors.get(key)
            if factor is None:
                try:
                    factor = scipy.linalg.cho_factor(g + key * np.eye(self.m))
                except scipy.linalg.LinAlgError as exc:
                    raise NumericalError(
                        f"Cholesky of shifted Gram failed at shift {key}: {exc}") from exc
                self._shift_factors[key] = factor
            return factor

    # -- JSON wire format (used by the CLI `recover` subcommand) --

    def to_json_dict(self) -> dict:
        """Serialize as ``{"n", "m", "a"}`` with ``a`` column-major [re, im] pairs."""
        stacked = np.stack([self._a.real, self._a.imag], axis=-1)
        return {"n": self.n, "m": self.m, "a": stacked.transpose(1, 0, 2).tolist()}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "MeasurementEnsemble":
        """Rebuild an ensemble from :meth:`to_json_dict` output."""
        try:
            n = int(obj["n"])
            m = int(obj["m"])
            cols = np.asarray(obj["a"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractViolation(f"malformed ensemble object: {exc}") from exc
        require(cols.shape == (m, n, 2),
                f"ensemble entries have shape {cols.shape}, expected {(m, n, 2)}")
        return cls((cols[..., 0] + 1j * cols[..., 1]).T)

    def __repr__(self) -> str:
        return f"MeasurementEnsemble(n={self.n}, m={self.m})"
