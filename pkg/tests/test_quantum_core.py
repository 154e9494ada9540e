import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dephasing_lab.exceptions import ValidationError
from dephasing_lab.quantum_core import (
    SIGMA_X,
    SIGMA_Z,
    IDENTITY_2,
    as_hermitian,
    evolve,
    random_hermitian,
    random_state,
    range_intersection,
    spectral_decompose,
    tensor_product,
    tensor_state,
)


def rk4_evolve(h, psi, t, steps=4000):
    """Fixed-step RK4 for i dpsi/dt = H psi; independent of any eigensolver."""
    dt = t / steps
    f = lambda y: -1j * (h @ y)
    y = psi.astype(complex)
    for _ in range(steps):
        k1 = f(y)
        k2 = f(y + dt / 2 * k1)
        k3 = f(y + dt / 2 * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def test_decompose_diagonal():
    dec = spectral_decompose(np.diag([1.0, 2.0, 3.0]), 1e-9)
    assert np.allclose(dec.eigenvalues, [1, 2, 3])
    assert list(dec.multiplicities) == [1, 1, 1]
    for k in range(3):
        expected = np.zeros((3, 3))
        expected[k, k] = 1
        assert np.allclose(dec.projectors[k], expected, atol=1e-14)


def test_decompose_pauli_x():
    dec = spectral_decompose(SIGMA_X, 1e-9)
    assert np.allclose(dec.eigenvalues, [-1, 1])
    assert np.allclose(dec.projectors[0], 0.5 * (IDENTITY_2 - SIGMA_X))
    assert np.allclose(dec.projectors[1], 0.5 * (IDENTITY_2 + SIGMA_X))


def test_decompose_merges_degenerate_levels():
    dec = spectral_decompose(np.diag([0.0, 1.0, 1.0 + 1e-13, 5.0]))
    assert list(dec.multiplicities) == [1, 2, 1]


def test_decompose_rejects_non_hermitian():
    with pytest.raises(ValidationError, match="not Hermitian"):
        spectral_decompose(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValidationError):
        spectral_decompose(np.eye(2), cluster_tol=0.0)


@pytest.mark.parametrize("seed", range(5))
def test_decompose_invariants_random(seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(6, rng)
    dec = spectral_decompose(h)
    norm = np.linalg.norm(h)
    assert np.linalg.norm(dec.reconstruct() - h) <= 1e-10 * norm
    assert np.allclose(dec.projectors.sum(axis=0), np.eye(6), atol=1e-10)
    for i, p in enumerate(dec.projectors):
        assert np.linalg.norm(p @ p - p) <= 1e-10
        assert np.allclose(p, p.conj().T)
        for q in dec.projectors[i + 1:]:
            assert np.linalg.norm(p @ q) <= 1e-10


def test_evolve_identity_and_eigenstate(rng):
    h = random_hermitian(4, rng)
    psi = random_state(4, rng)
    assert np.allclose(evolve(h, psi, 0.0), psi, atol=1e-14)
    t = 0.83
    out = evolve(SIGMA_Z, np.array([1, 0]), t)
    assert np.allclose(out, [np.exp(-1j * t), 0], atol=1e-15)


def test_evolve_matches_rk4(rng):
    h = random_hermitian(5, rng)
    psi = random_state(5, rng)
    assert np.max(np.abs(evolve(h, psi, 0.7) - rk4_evolve(h, psi, 0.7))) <= 1e-8


def test_evolve_dimension_mismatch(rng):
    with pytest.raises(ValidationError):
        evolve(random_hermitian(3, rng), np.ones(2) / np.sqrt(2), 1.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t1=st.floats(-20, 20), t2=st.floats(-20, 20), dim=st.integers(1, 8))
def test_evolve_unitary_and_group_law(seed, t1, t2, dim):
    rng = np.random.default_rng(seed)
    h = random_hermitian(dim, rng)
    psi = random_state(dim, rng)
    assert abs(np.linalg.norm(evolve(h, psi, t1)) - 1) <= 1e-12
    two_step = evolve(h, evolve(h, psi, t1), t2)
    assert np.max(np.abs(two_step - evolve(h, psi, t1 + t2))) <= 1e-10


def test_tensor_product_examples():
    assert np.allclose(tensor_product([SIGMA_Z, IDENTITY_2]), np.diag([1, 1, -1, -1]))
    assert np.allclose(tensor_state([[1, 0], [0, 1]]), [0, 1, 0, 0])
    plus = np.array([1, 1]) / np.sqrt(2)
    assert np.allclose(tensor_state([plus] * 3), np.full(8, 1 / np.sqrt(8)))
    with pytest.raises(ValidationError):
        tensor_product([])
    with pytest.raises(ValidationError):
        tensor_state([])


def test_range_intersection_basic():
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    out = range_intersection(p0, p0)
    assert out.shape == (2, 1) and abs(abs(out[0, 0]) - 1) < 1e-14
    assert range_intersection(p0, p1).shape == (2, 0)
    with pytest.raises(ValidationError):
        range_intersection(np.array([[2.0, 0], [0, 0]]), p0)


def _projector(cols):
    q, _ = np.linalg.qr(cols)
    return q @ q.conj().T, q


@pytest.mark.parametrize("dim", [3, 4])
@pytest.mark.parametrize("seed", range(10))
def test_range_intersection_rank_oracle(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, 2)) + 1j * rng.normal(size=(dim, 2))
    # half of the cases share a direction by construction
    b = rng.normal(size=(dim, 2)) + 1j * rng.normal(size=(dim, 2))
    if seed % 2:
        b[:, 0] = a[:, 0]
    p, qa = _projector(a)
    q, qb = _projector(b)
    expected = 2 + 2 - np.linalg.matrix_rank(np.hstack([qa, qb]), tol=1e-8)
    out = range_intersection(p, q)
    assert out.shape[1] == expected
    for v in out.T:
        assert np.linalg.norm(p @ v - v) <= 1e-9
        assert np.linalg.norm(q @ v - v) <= 1e-9
