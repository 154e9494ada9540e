"""Spin-bath dephasing with a projector self-evolution.

The environment is ``n`` spin-1/2 particles, each coupled to the qubit by a
``sigma_z sigma_z`` term of strength ``g_k``::

    H_int = sum_k g_k sigma_z^(k),   H_env = lam * N |Phi><Phi|,

where ``|Phi>`` is the uniform superposition of the ``N = 2**n`` computational
basis states (so every entry of ``H_env`` equals ``lam``). Basis state ``|x>``
is labelled by the bit string ``x_1 x_2 ... x_n`` read as a binary number,
most significant spin first, and has interaction energy
``omega_x = sum_k (-1)**x_k g_k``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linear_sum_assignment

from .dephasing import DephasingModel
from .exceptions import NumericalPreconditionError, ValidationError
from .quantum_core import tensor_state

# Decreasing couplings whose 2**n level energies stay distinct for every
# prefix length n <= 12.
DEFAULT_COUPLINGS = (
    0.95, 0.61, 0.37, 0.17, 0.123767, 0.111046,
    0.078363, 0.054315, 0.044776, 0.034455, 0.030577, 0.01068,
)
MAX_SPINS = 12
DEGENERACY_TOL = 1e-12


def bit_table(n: int) -> NDArray[np.int8]:
    """Rows are the bit strings of ``0 .. 2**n - 1``, most significant first."""
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8).reshape(2**n, n)


def omega(x, couplings: Sequence[float]) -> float:
    """Interaction energy of basis state ``x``.

    ``x`` is a bit string such as ``"01"`` or a sequence of 0/1 integers.
    """
    bits = [int(b) for b in x]
    g = np.asarray(couplings, dtype=float)
    if len(bits) != len(g):
        raise ValidationError(f"bit string has length {len(bits)}, expected {len(g)}")
    if any(b not in (0, 1) for b in bits):
        raise ValidationError(f"not a bit string: {x!r}")
    return float(np.sum(np.where(np.array(bits) == 0, g, -g)))


def omegas(couplings: Sequence[float]) -> NDArray[np.float64]:
    """All ``2**n`` interaction energies in binary order."""
    g = np.asarray(couplings, dtype=float)
    return (1 - 2 * bit_table(len(g)).astype(float)) @ g


def min_gap(couplings: Sequence[float]) -> float:
    """Smallest spacing between distinct levels ``omega_x``.

    Raises
    ------
    NumericalPreconditionError
        If two levels coincide (for example equal couplings or a zero one).
    """
    w = np.sort(omegas(couplings))
    if len(w) < 2:
        raise NumericalPreconditionError("need at least one spin")
    gap = float(np.min(np.diff(w)))
    scale = float(np.sum(np.abs(couplings)))
    if gap <= DEGENERACY_TOL * max(scale, 1.0):
        raise NumericalPreconditionError(f"interaction spectrum is degenerate (min gap {gap:.3g})")
    return gap


@dataclass(frozen=True)
class ZurekConfig:
    couplings: tuple[float, ...]
    lam: float = 0.0

    def __post_init__(self):
        g = tuple(float(c) for c in self.couplings)
        object.__setattr__(self, "couplings", g)
        if not 1 <= len(g) <= MAX_SPINS:
            raise ValidationError(f"need 1..{MAX_SPINS} couplings, got {len(g)}")
        if not all(np.isfinite(g)) or not np.isfinite(self.lam):
            raise ValidationError("couplings and lambda must be finite")
        min_gap(g)

    @property
    def n(self) -> int:
        return len(self.couplings)

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def min_gap(self) -> float:
        return min_gap(self.couplings)


def build_zurek(config: ZurekConfig) -> DephasingModel:
    """Diagonal ``H_int`` with entries ``omega_x`` and ``H_env = lam * ones``."""
    h_int = np.diag(omegas(config.couplings)).astype(complex)
    h_env = np.full((config.N, config.N), config.lam, dtype=complex)
    return DephasingModel(h_int, h_env)


def ground_state(n: int) -> NDArray[np.complex128]:
    """``|0...0>``."""
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    return psi


def _check_weak(config: ZurekConfig):
    if abs(config.lam) > 0.1 * config.min_gap:
        warnings.warn(
            f"lambda = {config.lam:g} is not small against the level gap {config.min_gap:g}; "
            "second-order results are unreliable",
            RuntimeWarning,
            stacklevel=3,
        )


def dressed_energies(config: ZurekConfig) -> NDArray[np.float64]:
    """Exact eigenvalues of ``H_int + H_env`` indexed by unperturbed label ``x``.

    Each eigenvector is assigned to the basis state it overlaps most, using
    a one-to-one assignment.
    """
    model = build_zurek(config)
    w, v = model.eig0
    rows, cols = linear_sum_assignment(-np.abs(v) ** 2)
    energies = np.empty(config.N)
    energies[rows] = w[cols]
    return energies


def perturbative_deficit(config: ZurekConfig, t) -> NDArray[np.float64] | float:
    """Second-order loss ``1 - |r(t)|^2`` for the initial state ``|0...0>``.

    ``16 lam^2 sum_{x != 0} sin^4((E_x - E_0) t / 2) / (omega_0 - omega_x)^2``
    with ``E_x`` the dressed energies of :func:`dressed_energies`.
    """
    _check_weak(config)
    w = omegas(config.couplings)
    e = dressed_energies(config)
    t_arr = np.asarray(t, dtype=float)
    phase = np.multiply.outer(t_arr, e[1:] - e[0]) / 2
    terms = np.sin(phase) ** 4 / (w[0] - w[1:]) ** 2
    out = 16 * config.lam**2 * np.sum(terms, axis=-1)
    return float(out) if t_arr.ndim == 0 else out


def perturbative_echo(config: ZurekConfig, t):
    """``1 -`` :func:`perturbative_deficit`."""
    return 1.0 - perturbative_deficit(config, t)


def perturbative_average(config: ZurekConfig) -> float:
    """Long-time average of the second-order echo.

    The mean of ``sin^4`` is ``3/8``, which turns the prefactor 16 into 6.
    """
    _check_weak(config)
    w = omegas(config.couplings)
    return float(1.0 - 6 * config.lam**2 * np.sum(1.0 / (w[0] - w[1:]) ** 2))


@dataclass(frozen=True, eq=False)
class ProductState:
    """Per-spin preparation ``alpha_k |0> + beta_k |1>``."""

    alphas: tuple[complex, ...]
    betas: tuple[complex, ...]

    def __post_init__(self):
        a = tuple(complex(x) for x in self.alphas)
        b = tuple(complex(x) for x in self.betas)
        if len(a) != len(b) or not a:
            raise ValidationError("alphas and betas must be non-empty and equally long")
        for k, (x, y) in enumerate(zip(a, b)):
            if abs(abs(x) ** 2 + abs(y) ** 2 - 1) > 1e-12:
                raise ValidationError(f"spin {k} is not normalized")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", b)

    @property
    def n(self) -> int:
        return len(self.alphas)

    @classmethod
    def uniform_error(cls, epsilon: float, n: int) -> "ProductState":
        """Every spin with ``|beta|^2 = epsilon``."""
        a = np.sqrt(1 - epsilon)
        b = np.sqrt(epsilon)
        return cls((a,) * n, (b,) * n)


def product_state(spec: ProductState) -> NDArray[np.complex128]:
    return tensor_state([[a, b] for a, b in zip(spec.alphas, spec.betas)])


def product_average_echo(spec: ProductState) -> float:
    """Infinite-time average of ``|r|^2`` at ``lam = 0`` for a product state.

    Without self-evolution ``r(t) = prod_k (|a_k|^2 e^{2i g_k t} +
    |b_k|^2 e^{-2i g_k t})``; for rationally independent couplings the cross
    terms average out, leaving ``prod_k (|a_k|^4 + |b_k|^4)``.
    """
    pa = np.abs(np.array(spec.alphas)) ** 2
    pb = np.abs(np.array(spec.betas)) ** 2
    return float(np.prod(pa**2 + pb**2))


def preparation_bound(epsilon: float, n: int) -> float:
    """``((1 - eps)^2 + eps^2)^n``, roughly ``1 - 2 n eps`` for small ``eps``.

    Lower bound on the averaged echo when every spin has ``|beta|^2 <= eps``.
    """
    if not 0 <= epsilon <= 0.5:
        raise ValidationError(f"epsilon must lie in [0, 1/2], got {epsilon!r}")
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    return ((1 - epsilon) ** 2 + epsilon**2) ** n
