"""Worst-case coherence for a single-spin environment.

The environment is one spin precessing at frequency ``omega`` about one of
two fields of equal strength, depending on the qubit branch:

    m0 = (sin a, 0, cos a),    m1 = (-sin a, 0, cos a).

Starting from Bloch vector ``v`` the two branches give ``v0(t)`` and
``v1(t)``, and the branch overlap has modulus ``cos(gamma/2)`` with
``gamma`` the angle between them. :func:`optimize_initial_state` looks for
the ``v`` whose smallest coherence over one precession period is largest.

Times are measured in units of ``1/omega``; ``omega`` defaults to 1.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import ValidationError
from .quantum_core import SpectralDecomposition

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
TIME_TOL = 1e-6
ANGLE_TOL = 1e-4
BOUNDARY_BAND = 1e-6
TIE_TOL = 1e-9
THREADS_ENV = "DEPHASING_LAB_THREADS"

PERPENDICULAR = "perpendicular"
ALIGNED = "aligned"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class FieldPair:
    alpha: float
    omega: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < np.pi / 2:
            raise ValidationError(f"alpha must lie in (0, pi/2), got {self.alpha!r}")
        if not self.omega > 0:
            raise ValidationError(f"omega must be positive, got {self.omega!r}")

    @property
    def m0(self) -> NDArray[np.float64]:
        return np.array([np.sin(self.alpha), 0.0, np.cos(self.alpha)])

    @property
    def m1(self) -> NDArray[np.float64]:
        return np.array([-np.sin(self.alpha), 0.0, np.cos(self.alpha)])

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega


@dataclass(frozen=True, eq=False)
class BlochOptimum:
    """Best initial Bloch vector found for one field pair.

    ``ties`` holds other distinct directions whose worst-case coherence is
    within ``1e-4`` of ``r_min``.
    """

    alpha: float
    v_star: NDArray[np.float64]
    r_min: float
    t_worst: float
    regime: str
    ties: tuple[NDArray[np.float64], ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "alpha_rad": self.alpha,
            "r_min": self.r_min,
            "v_star": [float(c) for c in self.v_star],
            "t_worst": self.t_worst,
            "theoretical_r_min": theoretical_rmin(self.alpha),
            "regime": self.regime,
            "ties": [[float(c) for c in v] for v in self.ties],
        }


def _unit(v: ArrayLike, what: str = "vector") -> NDArray[np.float64]:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > 1e-12:
        raise ValidationError(f"{what} must be a unit 3-vector, got {v!r}")
    return v


def spherical(theta, phi) -> NDArray[np.float64]:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)


def _rodrigues(v: NDArray, axis: NDArray, angle) -> NDArray:
    """Rotate vectors ``v[..., :]`` about a unit ``axis``; broadcasts over ``angle``."""
    c = np.cos(angle)[..., None]
    s = np.sin(angle)[..., None]
    return v * c + np.cross(axis, v) * s + axis * (v @ axis)[..., None] * (1 - c)


def rotate(v: ArrayLike, axis: ArrayLike, angle: float) -> NDArray[np.float64]:
    """Right-handed rotation of ``v`` about ``axis`` by ``angle``."""
    v = _unit(v)
    axis = _unit(axis, "axis")
    return _rodrigues(v, axis, np.asarray(angle, dtype=float))


def _coherence(v: NDArray, fields: FieldPair, t: NDArray) -> NDArray:
    """``cos(gamma/2)`` for vectors ``v`` of shape (..., 3), broadcast against ``t``."""
    angle = fields.omega * t
    v0 = _rodrigues(v, fields.m0, angle)
    v1 = _rodrigues(v, fields.m1, angle)
    dot = np.clip(np.sum(v0 * v1, axis=-1), -1.0, 1.0)
    return np.sqrt((1.0 + dot) / 2.0)


def coherence_at(v: ArrayLike, fields: FieldPair, t: float) -> float:
    """``|r(t)| = cos(gamma(t)/2)`` for initial Bloch vector ``v``."""
    return float(_coherence(_unit(v), fields, np.asarray(t, dtype=float)))


def _golden_minimize(f, lo: NDArray, hi: NDArray, tol: float):
    """Vectorised golden-section search on independent brackets ``[lo, hi]``."""
    a, b = lo.copy(), hi.copy()
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while np.max(b - a) > tol:
        left = f1 < f2
        # keep [a, x2] where the left probe is lower, [x1, b] otherwise
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        new_x1 = np.where(left, b - GOLDEN * (b - a), x2)
        new_x2 = np.where(left, x1, a + GOLDEN * (b - a))
        new_f1 = np.where(left, np.nan, f2)
        new_f2 = np.where(left, f1, np.nan)
        probe = np.where(left, new_x1, new_x2)
        fp = f(probe)
        x1, x2 = new_x1, new_x2
        f1 = np.where(left, fp, new_f1)
        f2 = np.where(left, new_f2, fp)
    x = np.where(f1 < f2, x1, x2)
    return x, np.minimum(f1, f2)


def _min_coherence_many(vs: NDArray, fields: FieldPair, time_samples: int, local_minima: int = 3):
    """Worst coherence over one period for each row of ``vs``.

    The period is scanned on a uniform grid; the ``local_minima`` lowest grid
    minima of each row are then refined by golden section to ``1e-6`` in
    ``omega t``.
    """
    vs = np.atleast_2d(vs)
    n = time_samples
    step = fields.period / n
    grid = np.arange(n) * step
    vals = _coherence(vs[:, None, :], fields, grid[None, :])
    is_min = (vals <= np.roll(vals, 1, axis=1)) & (vals <= np.roll(vals, -1, axis=1))
    ranked = np.where(is_min, vals, np.inf)
    k = min(local_minima, n)
    idx = np.argsort(ranked, axis=1, kind="stable")[:, :k]
    valid = np.isfinite(np.take_along_axis(ranked, idx, axis=1))
    valid[:, 0] = True

    rows = np.repeat(np.arange(len(vs)), k)
    centre = grid[idx.ravel()]
    obj = lambda t: _coherence(vs[rows], fields, t)
    t_ref, f_ref = _golden_minimize(obj, centre - step, centre + step, TIME_TOL / fields.omega)
    f_ref = np.where(valid.ravel(), f_ref, np.inf).reshape(len(vs), k)
    t_ref = np.mod(t_ref, fields.period).reshape(len(vs), k)
    best = np.argmin(f_ref, axis=1)
    pick = np.arange(len(vs))
    return f_ref[pick, best], t_ref[pick, best]


def min_coherence(v: ArrayLike, fields: FieldPair, time_samples: int = 256) -> tuple[float, float]:
    """Smallest ``|r(t)|`` over one period and the time it occurs.

    Returns
    -------
    r_min : float
    t_worst : float
        In ``[0, 2 pi / omega)``.
    """
    if time_samples < 64:
        raise ValidationError(f"time_samples must be at least 64, got {time_samples}")
    r, t = _min_coherence_many(_unit(v)[None, :], fields, time_samples)
    return float(r[0]), float(t[0])


def fibonacci_sphere(n: int) -> NDArray[np.float64]:
    """``n`` nearly uniform points on the unit sphere."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    phi = np.pi * (1 + np.sqrt(5.0)) * i
    rho = np.sqrt(1 - z**2)
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def _to_angles(v: NDArray) -> tuple[float, float]:
    return float(np.arccos(np.clip(v[2], -1, 1))), float(np.arctan2(v[1], v[0]))


def _pattern_refine(theta: float, phi: float, value: float, evaluate, step: float):
    """Maximise on ``(theta, phi)`` by compass moves with a halving step.

    Besides the four coordinate moves the diagonal ones are tried too, which
    lets the search follow ridges of the non-smooth max-min objective.
    """
    moves = np.array([(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=float)
    while step >= ANGLE_TOL:
        trial = np.array([theta, phi]) + step * moves
        vals, _ = evaluate(spherical(trial[:, 0], trial[:, 1]))
        j = int(np.argmax(vals))
        if vals[j] > value:
            theta, phi, value = float(trial[j, 0]), float(trial[j, 1]), float(vals[j])
        else:
            step /= 2
    return theta, phi


def _distinct(vectors: list[NDArray], min_angle: float) -> list[NDArray]:
    kept: list[NDArray] = []
    for v in vectors:
        if all(np.arccos(np.clip(v @ u, -1, 1)) > min_angle for u in kept):
            kept.append(v)
    return kept


def regime_for(alpha: float) -> str:
    if alpha < np.pi / 3 - BOUNDARY_BAND:
        return PERPENDICULAR
    if alpha > np.pi / 3 + BOUNDARY_BAND:
        return ALIGNED
    return BOUNDARY


def analytic_candidates(fields: FieldPair) -> list[NDArray[np.float64]]:
    """The two families of closed-form optima: ``+-y`` and ``+-m0``, ``+-m1``."""
    y = np.array([0.0, 1.0, 0.0])
    return [y, -y, fields.m0, -fields.m0, fields.m1, -fields.m1]


def optimize_initial_state(
    fields: FieldPair,
    sphere_samples: int = 2000,
    time_samples: int = 256,
    seeds: int = 16,
    include_analytic: bool = True,
) -> BlochOptimum:
    """Maximise the worst-case coherence over initial Bloch vectors.

    A Fibonacci grid of ``sphere_samples`` directions is scored; the best
    ``seeds`` mutually distinct grid points are then refined by a pattern
    search on ``(theta, phi)`` whose step shrinks to ``1e-4`` rad.

    With ``include_analytic`` the closed-form candidates of
    :func:`analytic_candidates` join the final comparison, so the result is
    never worse than either family.

    The optimum is not unique: beyond ``pi/3`` a whole arc of the x-z plane
    attains it. Among candidates tied within ``1e-9`` a closed-form one is
    preferred as the representative; remaining ties go to the largest
    ``y``, then ``z``, then ``x`` component. Other near-optimal directions
    are listed in ``ties``.
    """
    if sphere_samples < 500:
        raise ValidationError(f"sphere_samples must be at least 500, got {sphere_samples}")
    if time_samples < 64:
        raise ValidationError(f"time_samples must be at least 64, got {time_samples}")

    def evaluate(vs):
        return _min_coherence_many(vs, fields, time_samples)

    grid = fibonacci_sphere(sphere_samples)
    grid_vals, _ = evaluate(grid)
    spacing = np.sqrt(4 * np.pi / sphere_samples)
    order = np.argsort(-grid_vals, kind="stable")
    starts = _distinct([grid[i] for i in order[: 10 * seeds]], 2 * spacing)[:seeds]

    candidates = []
    for v in starts:
        theta, phi = _to_angles(v)
        value = float(evaluate(v[None, :])[0][0])
        theta, phi = _pattern_refine(theta, phi, value, evaluate, spacing)
        candidates.append(spherical(theta, phi))
    n_numeric = len(candidates)
    if include_analytic:
        candidates.extend(analytic_candidates(fields))

    cand = np.array(candidates)
    vals, times = evaluate(cand)
    best = float(np.max(vals))
    tied = np.nonzero(vals >= best - TIE_TOL)[0]
    key = lambda i: (i >= n_numeric, round(cand[i, 1], 6), round(cand[i, 2], 6), round(cand[i, 0], 6))
    pick = max(tied, key=key)

    near = [cand[i] for i in np.argsort(-vals, kind="stable") if vals[i] >= best - 1e-4 and i != pick]
    ties = tuple(v for v in _distinct([cand[pick]] + near, 1e-2)[1:])
    return BlochOptimum(
        alpha=fields.alpha,
        v_star=cand[pick],
        r_min=float(vals[pick]),
        t_worst=float(times[pick]),
        regime=regime_for(fields.alpha),
        ties=ties,
    )


def _check_alpha(alpha: float):
    if not 0 < alpha < np.pi / 2:
        raise ValidationError(f"alpha must lie in (0, pi/2), got {alpha!r}")


def theoretical_rmin(alpha: float) -> float:
    """Closed-form optimum: ``cos a`` below ``pi/3``, ``cos(pi - 2a)`` above."""
    _check_alpha(alpha)
    if alpha <= np.pi / 3:
        return float(np.cos(alpha))
    return float(np.cos(np.pi - 2 * alpha))


def aligned_max_angle(alpha: float) -> float:
    """Largest branch angle when the spin starts along a field: ``min(4a, 2pi - 4a)``."""
    _check_alpha(alpha)
    return float(min(4 * alpha, 2 * np.pi - 4 * alpha))


def eigenstate_candidate_rmin(initial: ArrayLike, dec1: SpectralDecomposition, weight_tol: float = 1e-12) -> float:
    """Worst coherence ``|p1 - p2|`` of an eigenstate of one branch.

    ``initial`` is assumed to be an eigenstate of the first branch
    Hamiltonian; ``p1``, ``p2`` are its weights on the (at most two)
    eigenspaces of the second branch that it overlaps.
    """
    psi = np.asarray(initial, dtype=complex)
    weights = np.einsum("i,kij,j->k", psi.conj(), dec1.projectors, psi).real
    carried = weights[weights > weight_tol]
    if len(carried) > 2:
        raise ValidationError(f"state overlaps {len(carried)} eigenspaces; expected at most two")
    if len(carried) == 1:
        return float(carried[0])
    return float(abs(carried[0] - carried[1]))


def sweep_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def alpha_sweep(
    alphas,
    sphere_samples: int = 2000,
    time_samples: int = 256,
    include_analytic: bool = True,
    threads: int | None = None,
) -> list[BlochOptimum]:
    """Optimise every ``alpha`` in ``alphas``; results keep the input order."""
    alphas = [float(a) for a in alphas]
    for a in alphas:
        _check_alpha(a)
    threads = sweep_threads() if threads is None else threads

    def one(a):
        return optimize_initial_state(FieldPair(a), sphere_samples, time_samples, include_analytic=include_analytic)

    if threads <= 1:
        return [one(a) for a in alphas]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, alphas))


SWEEP_COLUMNS = ("alpha_rad", "r_min", "v_x", "v_y", "v_z", "t_worst", "theoretical_r_min", "regime")


def sweep_rows(results: list[BlochOptimum]) -> list[tuple]:
    return [
        (r.alpha, r.r_min, *map(float, r.v_star), r.t_worst, theoretical_rmin(r.alpha), r.regime)
        for r in results
    ]
