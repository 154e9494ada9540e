"""Pure-dephasing qubit-environment dynamics.

A qubit coupled through ``sigma_z`` to an environment evolves under

    H = sigma_z (x) H_int + 1 (x) H_env.

Conditioned on the qubit pointer state ``|0>`` or ``|1>`` the environment
follows one of two branch Hamiltonians, ``H_env + H_int`` and
``H_env - H_int``. The off-diagonal element of the qubit's reduced density
matrix is multiplied by the branch overlap

    r(t) = <I| exp(+i H0 t) exp(-i H1 t) |I>,

whose squared modulus is the Loschmidt echo. This module computes ``r(t)``
along time grids, both through the branch propagators and through the
spectral double sum over branch eigenprojectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import NumericalPreconditionError, ValidationError
from .quantum_core import (
    SpectralDecomposition,
    as_hermitian,
    as_state,
    evolve,
    spectral_decompose,
)

# Time samples handled per vectorised block; bounds memory at dim * CHUNK.
CHUNK = 8192
DEFAULT_AVERAGE_SAMPLES = 100_000
DEFAULT_AVERAGE_HORIZON_FACTOR = 1e4


@dataclass(frozen=True, eq=False)
class DephasingModel:
    """Interaction ``h_int`` and environment self-evolution ``h_env``.

    Both operators act on the environment only and are expressed in units of
    angular frequency. The system operator is fixed to ``sigma_z``.
    """

    h_int: NDArray[np.complex128]
    h_env: NDArray[np.complex128]

    def __post_init__(self):
        h_int = as_hermitian(self.h_int)
        h_env = as_hermitian(self.h_env)
        if h_int.shape != h_env.shape:
            raise ValidationError(f"h_int {h_int.shape} and h_env {h_env.shape} differ in dimension")
        h_int.setflags(write=False)
        h_env.setflags(write=False)
        object.__setattr__(self, "h_int", h_int)
        object.__setattr__(self, "h_env", h_env)

    @property
    def dim(self) -> int:
        return self.h_int.shape[0]

    @cached_property
    def h0(self) -> NDArray[np.complex128]:
        return self.h_env + self.h_int

    @cached_property
    def h1(self) -> NDArray[np.complex128]:
        return self.h_env - self.h_int

    @cached_property
    def eig0(self) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
        return np.linalg.eigh(self.h0)

    @cached_property
    def eig1(self) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
        return np.linalg.eigh(self.h1)

    def decompositions(self, cluster_tol: float | None = None) -> tuple[SpectralDecomposition, SpectralDecomposition]:
        return spectral_decompose(self.h0, cluster_tol), spectral_decompose(self.h1, cluster_tol)

    def check_state(self, psi: ArrayLike) -> NDArray[np.complex128]:
        psi = as_state(psi)
        if psi.shape != (self.dim,):
            raise ValidationError(f"initial state has dim {psi.size}, model has dim {self.dim}")
        return psi


@dataclass(frozen=True)
class QubitAmplitudes:
    """Qubit preparation ``a|0> + b|1>``."""

    a: complex
    b: complex

    def __post_init__(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"|a|^2 + |b|^2 = {norm!r}, expected 1")

    @classmethod
    def balanced(cls) -> "QubitAmplitudes":
        return cls(complex(np.sqrt(0.5)), complex(np.sqrt(0.5)))


@dataclass(frozen=True)
class TrajectoryRecord:
    times: NDArray[np.float64]
    r: NDArray[np.complex128]
    echo: NDArray[np.float64] = field(repr=False)
    purity: NDArray[np.float64] = field(repr=False)

    def __len__(self) -> int:
        return len(self.times)


def branch_hamiltonians(model: DephasingModel) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """``(H_env + H_int, H_env - H_int)``."""
    return model.h0, model.h1


def decoherence_factor(model: DephasingModel, initial: ArrayLike, t: float) -> complex:
    """Branch overlap ``<eps0(t)|eps1(t)>`` from explicit propagation."""
    psi = model.check_state(initial)
    eps0 = evolve(model.h0, psi, t)
    eps1 = evolve(model.h1, psi, t)
    return complex(np.vdot(eps0, eps1))


def _branch_states(model: DephasingModel, psi: NDArray, times: NDArray):
    """Yield ``(slice, eps0, eps1)`` blocks with states as columns."""
    w0, v0 = model.eig0
    w1, v1 = model.eig1
    c0 = v0.conj().T @ psi
    c1 = v1.conj().T @ psi
    for start in range(0, len(times), CHUNK):
        t = times[start:start + CHUNK]
        eps0 = v0 @ (np.exp(-1j * np.outer(w0, t)) * c0[:, None])
        eps1 = v1 @ (np.exp(-1j * np.outer(w1, t)) * c1[:, None])
        yield slice(start, start + len(t)), eps0, eps1


def decoherence_factors(model: DephasingModel, initial: ArrayLike, times: ArrayLike) -> NDArray[np.complex128]:
    """Vectorised :func:`decoherence_factor` over a time grid."""
    psi = model.check_state(initial)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty(len(times), dtype=complex)
    for sl, eps0, eps1 in _branch_states(model, psi, times):
        out[sl] = np.einsum("it,it->t", eps0.conj(), eps1)
    return out


def echo_deficit(model: DephasingModel, initial: ArrayLike, times: ArrayLike) -> NDArray[np.float64]:
    """``1 - |r(t)|^2`` without cancellation error.

    Computed as the squared norm of the component of ``eps1`` orthogonal to
    ``eps0``, which stays accurate when the deficit is far below machine
    epsilon relative to one.
    """
    psi = model.check_state(initial)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty(len(times))
    for sl, eps0, eps1 in _branch_states(model, psi, times):
        overlap = np.einsum("it,it->t", eps0.conj(), eps1)
        perp = eps1 - eps0 * overlap
        out[sl] = np.einsum("it,it->t", perp.conj(), perp).real
    return out


def spectral_coefficients(initial: ArrayLike, dec0: SpectralDecomposition, dec1: SpectralDecomposition) -> NDArray[np.complex128]:
    """Matrix of weights ``<I|P0_j P1_k|I>`` of the spectral double sum."""
    psi = np.asarray(initial, dtype=complex)
    a = dec0.projectors @ psi
    b = dec1.projectors @ psi
    return a.conj() @ b.T


def decoherence_factor_spectral(model: DephasingModel, initial: ArrayLike, t, cluster_tol: float | None = None):
    """``r(t)`` as a sum over branch eigenvalue pairs.

    ``r(t) = sum_jk exp(i (l0_j - l1_k) t) <I|P0_j P1_k|I>``. Accepts a scalar
    or an array of times and returns the matching shape.
    """
    psi = model.check_state(initial)
    dec0, dec1 = model.decompositions(cluster_tol)
    coef = spectral_coefficients(psi, dec0, dec1)
    freqs = dec0.eigenvalues[:, None] - dec1.eigenvalues[None, :]
    t_arr = np.asarray(t, dtype=float)
    phases = np.exp(1j * np.multiply.outer(t_arr, freqs))
    r = np.sum(phases * coef, axis=(-2, -1))
    return complex(r) if t_arr.ndim == 0 else r


def purity(amps: QubitAmplitudes, r: complex) -> float:
    """Qubit purity ``Tr rho^2 = 1 - 2|a|^2|b|^2 (1 - |r|^2)``."""
    if abs(r) > 1 + 1e-12:
        raise ValidationError(f"|r| = {abs(r)!r} exceeds 1")
    pa = abs(amps.a) ** 2
    pb = abs(amps.b) ** 2
    return 1.0 - 2.0 * pa * pb * (1.0 - abs(r) ** 2)


def check_increasing(times: ArrayLike) -> NDArray[np.float64]:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.ndim != 1 or not np.all(np.isfinite(times)):
        raise ValidationError("times must be a finite 1-d sequence")
    if np.any(np.diff(times) <= 0):
        raise ValidationError("times must be strictly increasing")
    return times


def trajectory(model: DephasingModel, initial: ArrayLike, amps: QubitAmplitudes, times: ArrayLike) -> TrajectoryRecord:
    """Sample ``r(t)``, the echo ``|r|^2`` and the qubit purity on ``times``."""
    times = check_increasing(times)
    r = decoherence_factors(model, initial, times)
    echo = np.abs(r) ** 2
    pa = abs(amps.a) ** 2
    pb = abs(amps.b) ** 2
    pur = 1.0 - 2.0 * pa * pb * (1.0 - echo)
    return TrajectoryRecord(times, r, echo, pur)


def branch_frequency_gap(model: DephasingModel, cluster_tol: float | None = None) -> float:
    """Smallest nonzero level spacing found in either branch spectrum."""
    gaps = []
    for dec in model.decompositions(cluster_tol):
        if len(dec) > 1:
            gaps.append(np.min(np.diff(dec.eigenvalues)))
    if not gaps:
        raise NumericalPreconditionError("both branch Hamiltonians are scalar; no frequency gap")
    return float(min(gaps))


def default_horizon(model: DephasingModel, factor: float = DEFAULT_AVERAGE_HORIZON_FACTOR) -> float:
    """``factor / gap``; falls back to ``factor`` when no gap exists."""
    try:
        return factor / branch_frequency_gap(model)
    except NumericalPreconditionError:
        return factor


def time_averaged_echo(
    model: DephasingModel,
    initial: ArrayLike,
    horizon: float | None = None,
    samples: int = DEFAULT_AVERAGE_SAMPLES,
) -> float:
    """Mean of ``|r(t)|^2`` on a uniform grid over ``[0, horizon]``.

    ``horizon`` defaults to ``1e4`` divided by the smallest branch level
    spacing, long enough to resolve every beat between levels.
    """
    if horizon is None:
        horizon = default_horizon(model)
    if not horizon > 0:
        raise ValidationError(f"horizon must be positive, got {horizon!r}")
    if samples < 2:
        raise ValidationError(f"need at least 2 samples, got {samples}")
    times = np.linspace(0.0, horizon, samples)
    r = decoherence_factors(model, initial, times)
    return float(np.mean(np.abs(r) ** 2))
