"""Shared builders and independent oracles for the test suite."""

import numpy as np

from phaseliftoff import MeasurementEnsemble, hermitian_part, mix_seed, sample_signal
from phaseliftoff.operators import sample_gaussian_ensemble


def rng_for(*parts):
    """Seeded generator derived from integer parts (stable across runs)."""
    return np.random.default_rng(mix_seed(0xBADC0FFE, *parts))


def random_hermitian(n, rng):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitian_part(g)


def random_psd(n, rng, rank=None):
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return hermitian_part(g @ g.conj().T)


def planted_instance(n, m, seed):
    """Noiseless planted scenario: ensemble, signal, lifted matrix, data."""
    ens = sample_gaussian_ensemble(n, m, mix_seed(seed, 1))
    x = sample_signal(n, mix_seed(seed, 2))
    lifted = np.outer(x, x.conj())
    return ens, x, lifted, ens.forward(lifted)


def forward_bruteforce(ens: MeasurementEnsemble, x):
    """Entrywise oracle for the lifted map: a_i^* X a_i, one column at a time."""
    x = np.asarray(x, dtype=np.complex128)
    out = np.empty(ens.m)
    for i in range(ens.m):
        col = ens.a[:, i]
        out[i] = (col.conj() @ x @ col).real
    return out


def hermitian_basis(n):
    """Orthonormal real basis of the Hermitian n-by-n matrices."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=np.complex128)
        e[i, i] = 1.0
        basis.append(e)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=np.complex128)
            e[i, j] = inv_sqrt2
            e[j, i] = inv_sqrt2
            basis.append(e)
            e = np.zeros((n, n), dtype=np.complex128)
            e[i, j] = 1j * inv_sqrt2
            e[j, i] = -1j * inv_sqrt2
            basis.append(e)
    return basis


def herm_inner(u, v):
    """Real inner product on the Hermitian space."""
    return float(np.real(np.sum(u.conj() * v)))


def dense_regularized_solve(ens: MeasurementEnsemble, delta, x):
    """Independent oracle for (map^* map + delta I)^{-1}: materialize the map
    on a real Hermitian basis and solve the n^2 x n^2 system directly."""
    basis = hermitian_basis(ens.n)
    dim = len(basis)
    mat = np.empty((dim, dim))
    for col, e in enumerate(basis):
        image = ens.adjoint(ens.forward(e)) + delta * e
        for row, f in enumerate(basis):
            mat[row, col] = herm_inner(f, image)
    coords = np.array([herm_inner(e, x) for e in basis])
    solved = np.linalg.solve(mat, coords)
    out = np.zeros((ens.n, ens.n), dtype=np.complex128)
    for coeff, e in zip(solved, basis):
        out += coeff * e
    return out


def strip_wall_time(csv_text):
    """Drop the wall_time_ms column so timing noise cannot break comparisons."""
    lines = csv_text.strip("\n").split("\n")
    header = lines[0].split(",")
    drop = header.index("wall_time_ms")
    kept = []
    for line in lines:
        cells = line.split(",")
        kept.append(",".join(cells[:drop] + cells[drop + 1:]))
    return "\n".join(kept)
