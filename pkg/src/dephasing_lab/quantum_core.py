"""Dense complex linear algebra for small Hilbert spaces.

Operators are plain ``numpy`` arrays of dtype ``complex128``; the helpers in
this module validate them and provide the handful of primitives the rest of
the package is built on:

- :func:`spectral_decompose` -- eigenvalues clustered by degeneracy, with
  one orthogonal projector per cluster.
- :func:`evolve` -- ``exp(-iHt) psi`` through the eigenbasis of ``H``.
- :func:`tensor_product` / :func:`tensor_state` -- Kronecker products.
- :func:`range_intersection` -- orthonormal basis of ``range(P) & range(Q)``.

Everything here is dense and meant for dimensions up to a few thousand.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.stats import unitary_group

from .exceptions import ValidationError

HERMITICITY_RTOL = 1e-12
NORM_ATOL = 1e-12
DEFAULT_RELATIVE_CLUSTER_TOL = 1e-9
DEFAULT_INTERSECTION_TOL = 1e-9
PROJECTOR_ATOL = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def as_matrix(a: ArrayLike) -> NDArray[np.complex128]:
    """Return ``a`` as a finite, square complex matrix."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def hermiticity_violation(h: NDArray) -> tuple[float, tuple[int, int]]:
    """Largest entry of ``|H - H^dagger|`` and its position."""
    diff = np.abs(h - h.conj().T)
    idx = np.unravel_index(np.argmax(diff), diff.shape)
    return float(diff[idx]), (int(idx[0]), int(idx[1]))


def as_hermitian(a: ArrayLike, rtol: float = HERMITICITY_RTOL) -> NDArray[np.complex128]:
    """Validate that ``a`` is self-adjoint and return it as a complex array.

    The check is ``max|H - H^dagger| <= rtol * max|H|``. The returned array is
    the validated input, not a symmetrized copy.
    """
    h = as_matrix(a)
    worst, (i, j) = hermiticity_violation(h)
    scale = float(np.max(np.abs(h)))
    if worst > rtol * scale:
        raise ValidationError(
            f"matrix is not Hermitian: |H[{i},{j}] - conj(H[{j},{i}])| = {worst:.3g} "
            f"exceeds {rtol:g} * max|H| = {rtol * scale:.3g}"
        )
    return h


def as_state(psi: ArrayLike, atol: float = NORM_ATOL) -> NDArray[np.complex128]:
    """Validate a unit-norm state vector."""
    v = np.asarray(psi, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError(f"expected a non-empty 1-d state vector, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > atol:
        raise ValidationError(f"state vector has norm {norm!r}, expected 1")
    return v


def normalize(psi: ArrayLike) -> NDArray[np.complex128]:
    v = np.asarray(psi, dtype=complex)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues of a Hermitian operator grouped into degeneracy clusters.

    Attributes
    ----------
    eigenvalues : ndarray, shape (k,)
        One representative (the mean) per cluster, ascending.
    projectors : ndarray, shape (k, d, d)
        Orthogonal projector onto each cluster's eigenspace.
    multiplicities : ndarray of int, shape (k,)
    cluster_tol : float
        Two sorted neighbouring eigenvalues closer than this share a cluster.
    raw_eigenvalues, eigenvectors : ndarray
        The underlying ``eigh`` output; ``labels[i]`` is the cluster of
        eigenvector column ``i``.
    """

    eigenvalues: NDArray[np.float64]
    projectors: NDArray[np.complex128]
    multiplicities: NDArray[np.int64]
    cluster_tol: float
    raw_eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.complex128]
    labels: NDArray[np.int64]

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> NDArray[np.complex128]:
        return np.einsum("k,kij->ij", self.eigenvalues, self.projectors)

    def cluster_vectors(self, k: int) -> NDArray[np.complex128]:
        """Orthonormal columns spanning cluster ``k``."""
        return self.eigenvectors[:, self.labels == k]


def default_cluster_tol(eigenvalues: NDArray[np.float64]) -> float:
    """``1e-9`` times the spectral scale ``max(range, max|lambda|)``."""
    scale = max(float(np.ptp(eigenvalues)), float(np.max(np.abs(eigenvalues))))
    if scale == 0.0:
        return DEFAULT_RELATIVE_CLUSTER_TOL
    return DEFAULT_RELATIVE_CLUSTER_TOL * scale


def cluster_sorted(values: NDArray[np.float64], tol: float) -> NDArray[np.int64]:
    """Label ascending ``values`` so that neighbours within ``tol`` share a label."""
    if values.size == 0:
        return np.zeros(0, dtype=np.int64)
    breaks = np.diff(values) > tol
    return np.concatenate([[0], np.cumsum(breaks)]).astype(np.int64)


def spectral_decompose(h: ArrayLike, cluster_tol: float | None = None) -> SpectralDecomposition:
    """Hermitian eigendecomposition with degenerate eigenvalues merged.

    Parameters
    ----------
    h : array_like
        Hermitian matrix.
    cluster_tol : float, optional
        Merge threshold for neighbouring eigenvalues. Defaults to
        :func:`default_cluster_tol`.
    """
    h = as_hermitian(h)
    if cluster_tol is not None and not cluster_tol > 0:
        raise ValidationError(f"cluster_tol must be positive, got {cluster_tol!r}")
    w, v = np.linalg.eigh(h)
    tol = default_cluster_tol(w) if cluster_tol is None else float(cluster_tol)
    labels = cluster_sorted(w, tol)
    k = int(labels[-1]) + 1
    values = np.empty(k)
    mult = np.empty(k, dtype=np.int64)
    projs = np.empty((k, h.shape[0], h.shape[0]), dtype=complex)
    for c in range(k):
        sel = labels == c
        cols = v[:, sel]
        values[c] = w[sel].mean()
        mult[c] = sel.sum()
        projs[c] = cols @ cols.conj().T
    return SpectralDecomposition(values, projs, mult, tol, w, v, labels)


def evolve(h: ArrayLike, psi: ArrayLike, t: float) -> NDArray[np.complex128]:
    """Apply ``exp(-i H t)`` to ``psi`` using the eigenbasis of ``H``."""
    h = as_hermitian(h)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (h.shape[0],):
        raise ValidationError(f"state of shape {psi.shape} does not match operator dim {h.shape[0]}")
    w, v = np.linalg.eigh(h)
    return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi))


def propagator(h: ArrayLike, t: float) -> NDArray[np.complex128]:
    h = as_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def tensor_product(ops) -> NDArray[np.complex128]:
    """Kronecker product of a non-empty sequence of matrices, in order."""
    ops = [np.asarray(o, dtype=complex) for o in ops]
    if not ops:
        raise ValidationError("tensor_product needs at least one factor")
    return reduce(np.kron, ops)


def tensor_state(states) -> NDArray[np.complex128]:
    """Kronecker product of a non-empty sequence of state vectors."""
    states = [np.asarray(s, dtype=complex).ravel() for s in states]
    if not states:
        raise ValidationError("tensor_state needs at least one factor")
    return reduce(np.kron, states)


def check_projector(p: ArrayLike, atol: float = PROJECTOR_ATOL) -> NDArray[np.complex128]:
    p = as_matrix(p)
    if np.max(np.abs(p - p.conj().T)) > atol or np.max(np.abs(p @ p - p)) > atol:
        raise ValidationError("matrix is not an orthogonal projector")
    return p


def range_intersection(p: ArrayLike, q: ArrayLike, tol: float = DEFAULT_INTERSECTION_TOL) -> NDArray[np.complex128]:
    """Orthonormal basis of ``range(P) & range(Q)`` for orthogonal projectors.

    The basis is read off as eigenvectors of ``PQP`` whose eigenvalue lies
    within ``tol`` of one (an eigenvalue of ``PQP`` is the squared cosine of a
    principal angle between the two ranges).

    Returns
    -------
    ndarray, shape (d, m)
        Basis vectors as columns; ``m == 0`` when the ranges only meet at 0.
    """
    p = check_projector(p)
    q = check_projector(q)
    if p.shape != q.shape:
        raise ValidationError(f"projector shapes differ: {p.shape} vs {q.shape}")
    pqp = p @ q @ p
    w, v = np.linalg.eigh(0.5 * (pqp + pqp.conj().T))
    return v[:, w >= 1.0 - tol]


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> NDArray[np.complex128]:
    """GUE-distributed Hermitian matrix, entries of order ``scale``."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (a + a.conj().T)


def random_state(dim: int, rng: np.random.Generator) -> NDArray[np.complex128]:
    """Haar-random unit vector."""
    return normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_unitary(dim: int, rng: np.random.Generator) -> NDArray[np.complex128]:
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(dim, random_state=rng)
