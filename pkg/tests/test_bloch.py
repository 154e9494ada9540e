import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from dephasing_lab.bloch import (
    ALIGNED,
    BOUNDARY,
    PERPENDICULAR,
    FieldPair,
    aligned_max_angle,
    alpha_sweep,
    analytic_candidates,
    coherence_at,
    eigenstate_candidate_rmin,
    fibonacci_sphere,
    min_coherence,
    optimize_initial_state,
    rotate,
    spherical,
    theoretical_rmin,
)
from dephasing_lab.exceptions import ValidationError
from dephasing_lab.quantum_core import SIGMA_X, SIGMA_Y, SIGMA_Z, spectral_decompose

X, Y, Z = np.eye(3)

unit_vectors = st.tuples(st.floats(0, np.pi), st.floats(0, 2 * np.pi)).map(lambda a: spherical(*a))
alphas = st.floats(1e-3, np.pi / 2 - 1e-3)


def spinor(v):
    theta = np.arccos(np.clip(v[2], -1, 1))
    phi = np.arctan2(v[1], v[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def field_hamiltonian(m, omega=1.0):
    return 0.5 * omega * (m[0] * SIGMA_X + m[1] * SIGMA_Y + m[2] * SIGMA_Z)


def spinor_coherence(v, fields, t):
    psi = spinor(v)
    e0 = expm(-1j * field_hamiltonian(fields.m0, fields.omega) * t) @ psi
    e1 = expm(-1j * field_hamiltonian(fields.m1, fields.omega) * t) @ psi
    return abs(np.vdot(e0, e1))


def test_rotate_examples():
    assert np.allclose(rotate(X, Z, 0.0), X)
    assert np.allclose(rotate(X, Z, np.pi / 2), Y, atol=1e-15)
    with pytest.raises(ValidationError):
        rotate([1.0, 1.0, 0.0], Z, 1.0)


@settings(max_examples=50, deadline=None)
@given(v=unit_vectors, w=unit_vectors, axis=unit_vectors, a=st.floats(-10, 10), b=st.floats(-10, 10))
def test_rotation_group_law_and_isometry(v, w, axis, a, b):
    assert np.allclose(rotate(rotate(v, axis, a), axis, b), rotate(v, axis, a + b), atol=1e-12)
    rv, rw = rotate(v, axis, a), rotate(w, axis, a)
    assert abs(np.linalg.norm(rv) - 1) <= 1e-12
    assert abs(rv @ rw - v @ w) <= 1e-12


def test_coherence_at_start_and_aligned_half_period():
    for alpha in (0.2, np.pi / 5, 1.3):
        f = FieldPair(alpha)
        assert coherence_at(Y, f, 0.0) == pytest.approx(1.0)
        assert coherence_at(f.m0, f, np.pi) == pytest.approx(np.cos(aligned_max_angle(alpha) / 2), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(v=unit_vectors, alpha=alphas, t=st.floats(0, 30))
def test_bloch_matches_spinor(v, alpha, t):
    f = FieldPair(alpha)
    assert abs(coherence_at(v, f, t) - spinor_coherence(v, f, t)) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(v=unit_vectors, alpha=alphas, t=st.floats(0, 10))
def test_coherence_periodic(v, alpha, t):
    f = FieldPair(alpha, omega=1.7)
    assert abs(coherence_at(v, f, t) - coherence_at(v, f, t + f.period)) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(v=unit_vectors, alpha=alphas)
def test_mirror_symmetry(v, alpha):
    f = FieldPair(alpha)
    mirrored = v * np.array([1, -1, 1])
    assert abs(min_coherence(v, f)[0] - min_coherence(mirrored, f)[0]) <= 1e-10


def test_min_coherence_examples():
    tiny = FieldPair(1e-6)
    for v in fibonacci_sphere(50):
        assert min_coherence(v, tiny)[0] >= 1 - 1e-5
    r, t = min_coherence(Y, FieldPair(np.pi / 6))
    assert r == pytest.approx(np.cos(np.pi / 6), abs=1e-9)
    assert min(abs(t - np.pi / 2), abs(t - 3 * np.pi / 2)) <= 1e-4
    f = FieldPair(5 * np.pi / 12)
    r, t = min_coherence(f.m0, f)
    assert r == pytest.approx(np.cos(np.pi / 6), abs=1e-9)
    assert t == pytest.approx(np.pi, abs=1e-4)
    with pytest.raises(ValidationError):
        min_coherence(Y, f, time_samples=10)


def test_min_coherence_against_dense_scan(rng):
    f = FieldPair(0.9)
    ts = np.linspace(0, 2 * np.pi, 20001)
    for _ in range(5):
        v = spherical(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
        dense = min(coherence_at(v, f, t) for t in ts[::10])
        r, _ = min_coherence(v, f)
        assert r <= dense + 1e-12 and r >= dense - 1e-4


def test_theoretical_rmin():
    assert theoretical_rmin(np.pi / 3) == pytest.approx(0.5)
    assert np.cos(np.pi - 2 * np.pi / 3) == pytest.approx(0.5)
    assert theoretical_rmin(np.pi / 6) == pytest.approx(np.sqrt(3) / 2)
    assert theoretical_rmin(np.pi / 2 - 1e-9) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValidationError):
        theoretical_rmin(0.0)


def test_aligned_max_angle():
    assert aligned_max_angle(np.pi / 8) == pytest.approx(np.pi / 2)
    assert aligned_max_angle(3 * np.pi / 8) == pytest.approx(np.pi / 2)
    f = FieldPair(0.4)
    ts = np.linspace(0, 2 * np.pi, 40001)
    v0 = np.array([rotate(f.m0, f.m0, t) for t in ts[::40]])
    v1 = np.array([rotate(f.m0, f.m1, t) for t in ts[::40]])
    gamma = np.arccos(np.clip(np.sum(v0 * v1, axis=1), -1, 1))
    assert gamma.max() == pytest.approx(aligned_max_angle(0.4), abs=1e-3)


def test_eigenstate_candidate_rmin_examples():
    dec = spectral_decompose(SIGMA_X)
    assert eigenstate_candidate_rmin(np.array([1, 0]), dec) == pytest.approx(0.0, abs=1e-15)
    assert eigenstate_candidate_rmin(np.array([1, 1]) / np.sqrt(2), dec) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        eigenstate_candidate_rmin(np.ones(3) / np.sqrt(3), spectral_decompose(np.diag([1.0, 2.0, 3.0])))


@pytest.mark.parametrize("alpha", [0.1, 0.5, np.pi / 4 - 0.01, 0.9, 1.2, 1.5])
def test_eigenstate_candidate_spin_case(alpha):
    f = FieldPair(alpha)
    h0 = field_hamiltonian(f.m0)
    h1 = field_hamiltonian(f.m1)
    w, v = np.linalg.eigh(h0)
    psi = v[:, 1]  # spin along m0
    value = eigenstate_candidate_rmin(psi, spectral_decompose(h1))
    assert value == pytest.approx(abs(np.cos(2 * alpha)), abs=1e-12)
    assert value == pytest.approx(np.cos(aligned_max_angle(alpha) / 2), abs=1e-12)
    assert value == pytest.approx(min_coherence(f.m0, f)[0], abs=1e-9)


def _angle_to(v, targets):
    return min(np.degrees(np.arccos(np.clip(v @ u, -1, 1))) for u in targets)


def test_optimize_perpendicular_regime():
    opt = optimize_initial_state(FieldPair(np.pi / 6))
    assert opt.r_min == pytest.approx(np.cos(np.pi / 6), abs=2e-3)
    assert _angle_to(opt.v_star, [Y, -Y]) <= 5
    assert opt.regime == PERPENDICULAR


def test_optimize_aligned_regime():
    f = FieldPair(5 * np.pi / 12)
    opt = optimize_initial_state(f)
    assert opt.r_min == pytest.approx(np.cos(np.pi / 6), abs=2e-3)
    assert _angle_to(opt.v_star, [f.m0, -f.m0, f.m1, -f.m1]) <= 5
    assert opt.regime == ALIGNED
    # the optimum is an arc in the x-z plane, so other optimal directions exist
    assert len(opt.ties) >= 1


def test_optimize_boundary():
    f = FieldPair(np.pi / 3)
    opt = optimize_initial_state(f)
    assert opt.r_min == pytest.approx(0.5, abs=2e-3)
    assert opt.regime == BOUNDARY
    assert min_coherence(Y, f)[0] == pytest.approx(0.5, abs=2e-3)
    assert min_coherence(f.m0, f)[0] == pytest.approx(0.5, abs=2e-3)


@pytest.mark.parametrize("alpha", [0.15, 0.7, 1.0, 1.1, 1.45])
def test_optimize_not_worse_than_analytic(alpha):
    f = FieldPair(alpha)
    best = max(min_coherence(v, f)[0] for v in analytic_candidates(f))
    assert optimize_initial_state(f).r_min >= best - 1e-6


def test_pure_search_reaches_theory():
    for alpha in (0.4, 1.25):
        opt = optimize_initial_state(FieldPair(alpha), include_analytic=False)
        assert opt.r_min == pytest.approx(theoretical_rmin(alpha), abs=2e-3)


def test_optimize_rejects_small_budgets():
    with pytest.raises(ValidationError):
        optimize_initial_state(FieldPair(0.5), sphere_samples=100)


def test_sweep_small():
    grid = [k * (np.pi / 2) / 7 for k in range(1, 7)]
    res = alpha_sweep(grid, sphere_samples=600, time_samples=128, threads=1)
    assert [r.alpha for r in res] == grid
    assert max(abs(r.r_min - theoretical_rmin(r.alpha)) for r in res) <= 5e-3
    labels = [r.regime for r in res]
    flips = sum(a != b for a, b in zip(labels, labels[1:]))
    assert flips == 1
    below = [r.r_min for r in res if r.alpha <= np.pi / 3]
    assert all(a >= b for a, b in zip(below, below[1:]))
    threaded = alpha_sweep(grid, sphere_samples=600, time_samples=128, threads=3)
    assert [r.r_min for r in threaded] == [r.r_min for r in res]
