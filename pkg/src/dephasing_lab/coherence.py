"""Decoherence-free environment states.

An environment state ``|I>`` keeps the qubit perfectly coherent exactly when
``|r(t)| = 1`` for every ``t``. That happens if and only if ``|I>`` is a
superposition of common eigenvectors of the two branch Hamiltonians that all
carry the same branch energy difference ``l0 - l1``. This module finds those
common eigenvectors, groups them into decoherence-free subspaces, checks
candidate states on a time grid, and measures how easily a random
perturbation of ``H_env`` destroys the shared structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dephasing import DephasingModel, decoherence_factors, default_horizon
from .exceptions import NumericalPreconditionError, ValidationError
from .quantum_core import (
    DEFAULT_INTERSECTION_TOL,
    cluster_sorted,
    normalize,
    random_hermitian,
    random_unitary,
    range_intersection,
)

DEFAULT_VERIFY_SAMPLES = 1000
DEFAULT_VERIFY_HORIZON_FACTOR = 1e3


@dataclass(frozen=True, eq=False)
class CommonEigenvector:
    vector: NDArray[np.complex128]
    lambda0: float
    lambda1: float
    residual0: float
    residual1: float

    @property
    def delta(self) -> float:
        return self.lambda0 - self.lambda1


@dataclass(frozen=True, eq=False)
class DfsGroup:
    """Common eigenvectors sharing one branch energy difference."""

    delta: float
    basis: NDArray[np.complex128]  # columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def random_state(self, rng: np.random.Generator) -> NDArray[np.complex128]:
        c = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        return normalize(self.basis @ c)


@dataclass(frozen=True, eq=False)
class DfsReport:
    groups: tuple[DfsGroup, ...]

    @property
    def exists(self) -> bool:
        return any(g.dim > 0 for g in self.groups)

    @property
    def block_dim(self) -> int:
        return sum(g.dim for g in self.groups)

    def to_dict(self) -> dict:
        return {
            "exists": self.exists,
            "block_dim": self.block_dim,
            "groups": [
                {
                    "delta": g.delta,
                    "basis": [[[z.real, z.imag] for z in col] for col in g.basis.T],
                }
                for g in self.groups
            ],
        }


def _operator_scale(model: DephasingModel) -> float:
    scale = max(np.max(np.abs(model.eig0[0])), np.max(np.abs(model.eig1[0])))
    return float(scale) if scale > 0 else 1.0


def common_eigenvectors(
    model: DephasingModel,
    tol: float = DEFAULT_INTERSECTION_TOL,
    cluster_tol: float | None = None,
) -> list[CommonEigenvector]:
    """All simultaneous eigenvectors of the two branch Hamiltonians.

    Every pair of eigenspaces ``(j of H0, k of H1)`` is intersected. Pairs are
    skipped when ``Tr(P0_j P1_k) < 1 - tol``, which rules out any common
    vector. Vectors whose eigen-residual exceeds ``tol * ||H||`` in either
    branch are discarded.
    """
    dec0, dec1 = model.decompositions(cluster_tol)
    w = dec0.eigenvectors.conj().T @ dec1.eigenvectors
    weight = np.zeros((len(dec0), len(dec1)))
    np.add.at(weight, (dec0.labels[:, None], dec1.labels[None, :]), np.abs(w) ** 2)

    limit = tol * _operator_scale(model)
    found = []
    for j, k in zip(*np.nonzero(weight >= 1.0 - tol)):
        basis = range_intersection(dec0.projectors[j], dec1.projectors[k], tol)
        l0, l1 = float(dec0.eigenvalues[j]), float(dec1.eigenvalues[k])
        for v in basis.T:
            res0 = float(np.linalg.norm(model.h0 @ v - l0 * v))
            res1 = float(np.linalg.norm(model.h1 @ v - l1 * v))
            if res0 <= limit and res1 <= limit:
                found.append(CommonEigenvector(v, l0, l1, res0, res1))
    return found


def decoherence_free_states(
    model: DephasingModel,
    tol: float = DEFAULT_INTERSECTION_TOL,
    cluster_tol: float | None = None,
) -> DfsReport:
    """Group common eigenvectors by ``l0 - l1`` into decoherence-free subspaces.

    Any unit vector inside a single group's span gives ``|r(t)| = 1`` at all
    times. Deltas are merged with the same tolerance used to cluster the
    branch spectra.
    """
    vecs = common_eigenvectors(model, tol, cluster_tol)
    if not vecs:
        return DfsReport(())
    dec0, dec1 = model.decompositions(cluster_tol)
    merge_tol = max(dec0.cluster_tol, dec1.cluster_tol)
    deltas = np.array([v.delta for v in vecs])
    order = np.argsort(deltas, kind="stable")
    labels = cluster_sorted(deltas[order], merge_tol)
    groups = []
    for g in range(int(labels[-1]) + 1):
        members = order[labels == g]
        basis = np.column_stack([vecs[i].vector for i in members])
        groups.append(DfsGroup(float(deltas[members].mean()), basis))
    return DfsReport(tuple(groups))


def min_coherence_modulus(model: DephasingModel, initial: ArrayLike, horizon: float | None = None, samples: int = DEFAULT_VERIFY_SAMPLES) -> float:
    """Smallest ``|r(t)|`` on a uniform grid over ``[0, horizon]``."""
    if horizon is None:
        horizon = default_horizon(model, DEFAULT_VERIFY_HORIZON_FACTOR)
    if not horizon > 0 or samples < 2:
        raise ValidationError("need horizon > 0 and at least 2 samples")
    times = np.linspace(0.0, horizon, samples)
    return float(np.min(np.abs(decoherence_factors(model, initial, times))))


def verify_coherence(
    model: DephasingModel,
    initial: ArrayLike,
    horizon: float | None = None,
    samples: int = DEFAULT_VERIFY_SAMPLES,
    tol: float = 1e-9,
) -> bool:
    """True iff ``|r(t)| >= 1 - tol`` at every sampled time.

    The default horizon is ``1e3`` over the smallest branch level spacing. A
    sampled check can be fooled by frequencies that only separate beyond the
    horizon; lengthen it for nearly degenerate spectra.
    """
    return min_coherence_modulus(model, initial, horizon, samples) >= 1.0 - tol


def _scaled(delta: NDArray, target_norm: float) -> NDArray:
    norm = np.linalg.norm(delta)
    return delta if norm == 0 else delta * (target_norm / norm)


def fragility_probe(
    model: DephasingModel,
    scale: float,
    samples: int,
    seed: int,
    structured: bool = False,
    tol: float = DEFAULT_INTERSECTION_TOL,
    cluster_tol: float | None = None,
) -> float:
    """Fraction of random ``H_env`` perturbations that keep a common eigenvector.

    Each perturbation is a Gaussian Hermitian matrix rescaled to Frobenius
    norm ``scale * ||H_env||_F``. With ``structured=True`` it is confined to
    the form that preserves the existing common eigenvectors: real diagonal
    on their span, arbitrary on the orthogonal complement.

    Sample ``i`` draws from its own child of ``SeedSequence(seed)``, so the
    result does not depend on evaluation order.
    """
    if not scale > 0:
        raise ValidationError(f"scale must be positive, got {scale!r}")
    common = common_eigenvectors(model, tol, cluster_tol)
    if not common:
        raise NumericalPreconditionError("model has no common eigenvector to probe")
    ref = np.linalg.norm(model.h_env)
    if ref == 0:
        ref = np.linalg.norm(model.h_int)
    target = scale * ref

    vc = np.column_stack([c.vector for c in common])
    comp = np.eye(model.dim) - vc @ vc.conj().T
    kept = 0
    for child in np.random.SeedSequence(seed).spawn(samples):
        rng = np.random.default_rng(child)
        g = random_hermitian(model.dim, rng)
        if structured:
            g = (vc * rng.normal(size=vc.shape[1])) @ vc.conj().T + comp @ g @ comp
        perturbed = DephasingModel(model.h_int, model.h_env + _scaled(g, target))
        if common_eigenvectors(perturbed, tol, cluster_tol):
            kept += 1
    return kept / samples


def random_model(dim: int, rng: np.random.Generator) -> DephasingModel:
    """Generic pair of GUE matrices; almost surely no common eigenvector."""
    return DephasingModel(random_hermitian(dim, rng), random_hermitian(dim, rng))


def planted_model(dim: int, block_dim: int, rng: np.random.Generator) -> tuple[DephasingModel, NDArray[np.complex128]]:
    """Model with a planted ``block_dim``-dimensional decoherence-free block.

    In a random unitary frame ``H_int = c 1_M (+) A`` and ``H_env = D_M (+) B``
    with ``D_M`` diagonal and ``A``, ``B`` generic. Returns the model and the
    planted basis as columns.
    """
    if not 1 <= block_dim < dim:
        raise ValidationError(f"need 1 <= block_dim < dim, got {block_dim}, {dim}")
    u = random_unitary(dim, rng)
    rest = dim - block_dim
    c = rng.normal()
    d = rng.normal(size=block_dim)
    h_int = np.zeros((dim, dim), dtype=complex)
    h_env = np.zeros((dim, dim), dtype=complex)
    h_int[:block_dim, :block_dim] = c * np.eye(block_dim)
    h_env[:block_dim, :block_dim] = np.diag(d)
    h_int[block_dim:, block_dim:] = random_hermitian(rest, rng)
    h_env[block_dim:, block_dim:] = random_hermitian(rest, rng)
    h_int = u @ h_int @ u.conj().T
    h_env = u @ h_env @ u.conj().T
    # exact hermiticity after the change of frame
    h_int = 0.5 * (h_int + h_int.conj().T)
    h_env = 0.5 * (h_env + h_env.conj().T)
    return DephasingModel(h_int, h_env), u[:, :block_dim]
