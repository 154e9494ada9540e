import numpy as np
import pytest

from dephasing_lab.coherence import (
    common_eigenvectors,
    decoherence_free_states,
    fragility_probe,
    min_coherence_modulus,
    planted_model,
    random_model,
    verify_coherence,
)
from dephasing_lab.dephasing import DephasingModel, decoherence_factors
from dephasing_lab.exceptions import NumericalPreconditionError
from dephasing_lab.quantum_core import SIGMA_X, SIGMA_Z, normalize, random_hermitian, random_state
from dephasing_lab.spin_bath import ZurekConfig, build_zurek, ground_state


def test_commuting_diagonals_share_everything():
    m = DephasingModel(np.diag([1.0, 2.0]), np.diag([3.0, 4.0]))
    vecs = common_eigenvectors(m)
    assert len(vecs) == 2
    report = decoherence_free_states(m)
    assert report.exists and report.block_dim == 2


def test_anticommuting_paulis_share_nothing():
    m = DephasingModel(SIGMA_Z, SIGMA_X)
    assert common_eigenvectors(m) == []
    report = decoherence_free_states(m)
    assert not report.exists and report.block_dim == 0


@pytest.mark.parametrize("seed", range(8))
def test_planted_vector_recovered(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(3, 33))
    m, planted = planted_model(dim, 1, rng)
    vecs = common_eigenvectors(m)
    assert len(vecs) == 1
    assert abs(np.vdot(planted[:, 0], vecs[0].vector)) ** 2 >= 1 - 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_soundness_and_completeness_planted_block(seed):
    rng = np.random.default_rng(100 + seed)
    dim = int(rng.integers(5, 17))
    block = int(rng.integers(1, 4))
    m, planted = planted_model(dim, block, rng)
    vecs = common_eigenvectors(m)
    scale = max(np.linalg.norm(m.h0, 2), np.linalg.norm(m.h1, 2))
    for v in vecs:
        assert np.linalg.norm(m.h0 @ v.vector - v.lambda0 * v.vector) <= 1e-9 * scale
        assert np.linalg.norm(m.h1 @ v.vector - v.lambda1 * v.vector) <= 1e-9 * scale
    span = np.column_stack([v.vector for v in vecs])
    # every planted vector lies in the recovered span
    resid = planted - span @ (span.conj().T @ planted)
    assert np.linalg.norm(resid) <= 1e-8
    report = decoherence_free_states(m)
    assert len(report.groups) == 1 and report.block_dim == block


def test_scalar_interaction_gives_single_full_group(rng):
    m = DephasingModel(0.7 * np.eye(4), random_hermitian(4, rng))
    report = decoherence_free_states(m)
    assert report.exists and report.block_dim == 4 and len(report.groups) == 1
    assert report.groups[0].delta == pytest.approx(1.4)
    for _ in range(5):
        assert verify_coherence(m, report.groups[0].random_state(rng), horizon=200.0)


def test_static_spin_bath_groups_are_basis_states():
    m = build_zurek(ZurekConfig((0.95, 0.61, 0.37), 0.0))
    report = decoherence_free_states(m)
    assert len(report.groups) == 8
    for g in report.groups:
        assert g.dim == 1
        assert np.max(np.abs(g.basis[:, 0])) == pytest.approx(1.0, abs=1e-12)


def test_spin_bath_with_self_evolution_has_none():
    m = build_zurek(ZurekConfig((0.95, 0.61, 0.37), 1e-3))
    assert not decoherence_free_states(m).exists
    assert not verify_coherence(m, ground_state(3), horizon=1e4, samples=4000)


def test_group_basis_orthonormal_and_deltas_consistent(rng):
    m, _ = planted_model(10, 3, rng)
    for g in decoherence_free_states(m).groups:
        assert np.allclose(g.basis.conj().T @ g.basis, np.eye(g.dim), atol=1e-10)


def test_two_group_mixture_beats():
    """Mixing two groups with different delta gives |r|^2 = |c1 + c2 e^{i D t}|^2."""
    h_int = np.diag([1.0, -0.5, 0.25])
    h_env = np.diag([0.2, 0.9, -0.3])
    m = DephasingModel(h_int, h_env)
    report = decoherence_free_states(m)
    g1, g2 = report.groups[0], report.groups[1]
    psi = normalize(g1.basis[:, 0] + g2.basis[:, 0])
    ts = np.linspace(0, 40, 400)
    beat = np.abs(0.5 + 0.5 * np.exp(1j * (g2.delta - g1.delta) * ts))
    assert np.allclose(np.abs(decoherence_factors(m, psi, ts)), beat, atol=1e-12)
    assert not verify_coherence(m, psi)
    assert verify_coherence(m, g1.basis[:, 0], tol=1e-9)


def test_generic_model_states_decohere(rng):
    m = random_model(5, rng)
    assert not decoherence_free_states(m).exists
    for _ in range(10):
        assert min_coherence_modulus(m, random_state(5, rng)) < 1 - 1e-4


def test_fragility_probe(rng):
    m, _ = planted_model(5, 1, rng)
    assert fragility_probe(m, 1e-2, 50, seed=1) == 0.0
    assert fragility_probe(m, 1e-2, 50, seed=1, structured=True) == 1.0
    assert fragility_probe(m, 1e-2, 20, seed=9) == fragility_probe(m, 1e-2, 20, seed=9)
    with pytest.raises(NumericalPreconditionError):
        fragility_probe(random_model(4, rng), 1e-2, 5, seed=0)
