import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nmrsqueeze.spin_algebra import (
    SpinQuantum,
    commutator,
    eig_hermitian,
    expectation,
    propagator,
    rotation,
    spin_operators,
)

from conftest import SPINS, random_hermitian, random_unitary


def test_spin_quantum_dim():
    assert SpinQuantum(3).dim == 4
    assert SpinQuantum.from_I(2.5).two_I == 5
    np.testing.assert_array_equal(SpinQuantum(3).m_values, [1.5, 0.5, -0.5, -1.5])
    with pytest.raises(ValueError):
        SpinQuantum(0)
    with pytest.raises(ValueError):
        SpinQuantum.from_I(0.7)


def test_spin_half_is_half_pauli():
    Ix, Iy, Iz, _, _ = spin_operators(SpinQuantum(1))
    np.testing.assert_allclose(Ix, [[0, 0.5], [0.5, 0]])
    np.testing.assert_allclose(Iy, [[0, -0.5j], [0.5j, 0]])
    np.testing.assert_allclose(Iz, [[0.5, 0], [0, -0.5]])


def test_iz_spin32_diagonal(spin32):
    np.testing.assert_array_equal(spin_operators(spin32).Iz, np.diag([1.5, 0.5, -0.5, -1.5]))


def test_raising_matrix_elements(spin32):
    ops = spin_operators(spin32)
    I = spin32.I
    m = spin32.m_values
    for k in range(1, 4):
        ket = np.zeros(4)
        ket[k] = 1
        out = ops.Iplus @ ket
        expected = np.zeros(4)
        expected[k - 1] = np.sqrt(I * (I + 1) - m[k] * (m[k] + 1))
        np.testing.assert_allclose(out, expected, atol=1e-15)
    np.testing.assert_allclose(ops.Iplus @ np.eye(4)[0], 0)


@pytest.mark.parametrize("spin", SPINS, ids=lambda s: f"2I={s.two_I}")
def test_su2_relations_and_casimir(spin):
    Ix, Iy, Iz, _, _ = spin_operators(spin)
    np.testing.assert_allclose(commutator(Ix, Iy), 1j * Iz, atol=1e-12, rtol=0)
    np.testing.assert_allclose(commutator(Iy, Iz), 1j * Ix, atol=1e-12, rtol=0)
    np.testing.assert_allclose(commutator(Iz, Ix), 1j * Iy, atol=1e-12, rtol=0)
    casimir = Ix @ Ix + Iy @ Iy + Iz @ Iz
    np.testing.assert_allclose(casimir, spin.I * (spin.I + 1) * np.eye(spin.dim), atol=1e-12, rtol=0)


def test_commutator_examples(spin32):
    ops = spin_operators(spin32)
    np.testing.assert_allclose(commutator(ops.Iz, ops.Iz), 0)
    np.testing.assert_allclose(commutator(ops.Iz, ops.Iplus), ops.Iplus, atol=1e-14)
    with pytest.raises(ValueError):
        commutator(ops.Iz, np.eye(3))


def test_eig_examples(spin32):
    ops = spin_operators(spin32)
    np.testing.assert_allclose(eig_hermitian(ops.Iz).eigenvalues, [-1.5, -0.5, 0.5, 1.5])
    np.testing.assert_allclose(eig_hermitian(spin_operators(SpinQuantum(1)).Ix).eigenvalues, [-0.5, 0.5])
    # 3Iz^2 - I(I+1) with omegaQ = 1: (1/2)(3 m^2 - 15/4) -> -3/2 (m=+-1/2), +3/2 (m=+-3/2)
    HQ = 0.5 * (3 * ops.Iz @ ops.Iz - 15 / 4 * np.eye(4))
    np.testing.assert_allclose(eig_hermitian(HQ).eigenvalues, [-1.5, -1.5, 1.5, 1.5], atol=1e-14)


def test_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValueError):
        propagator(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


def test_eig_reconstruction(rng):
    H = random_hermitian(rng, 6)
    w, V = eig_hermitian(H)
    assert np.all(np.diff(w) >= 0)
    np.testing.assert_allclose(V @ np.diag(w) @ V.conj().T, H, atol=1e-11)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(6), atol=1e-11)


def test_propagator_examples():
    np.testing.assert_allclose(propagator(np.zeros((4, 4)), 3.7), np.eye(4))
    Iz1 = spin_operators(SpinQuantum(2)).Iz
    np.testing.assert_allclose(propagator(Iz1, 2 * np.pi), np.eye(3), atol=1e-14)
    Izh = spin_operators(SpinQuantum(1)).Iz
    np.testing.assert_allclose(propagator(Izh, np.pi), np.diag([np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)]), atol=1e-15)


def test_propagator_unitary_large_scale(rng):
    H = random_hermitian(rng, 4, scale=1e8)
    U = propagator(H, 1e-7)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(4), atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    t=st.floats(-3, 3, allow_nan=False),
    s=st.floats(-3, 3, allow_nan=False),
    dim=st.integers(2, 7),
)
def test_propagator_group_law(seed, t, s, dim):
    rng = np.random.default_rng(seed)
    H = random_hermitian(rng, dim)
    np.testing.assert_allclose(propagator(H, t) @ propagator(H, s), propagator(H, t + s), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(-5, 5, allow_nan=False))
def test_propagation_preserves_trace_and_spectrum(seed, t):
    rng = np.random.default_rng(seed)
    H = random_hermitian(rng, 4)
    U = random_unitary(rng, 4)
    rho = U @ np.diag(rng.dirichlet(np.ones(4))) @ U.conj().T
    Ut = propagator(H, t)
    out = Ut @ rho @ Ut.conj().T
    assert abs(np.trace(out) - np.trace(rho)) < 1e-10
    np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-10)


def test_rotation_examples(spin32):
    ops = spin_operators(spin32)
    np.testing.assert_allclose(rotation(spin32, 0.0, (0.3, 1.1)), np.eye(4), atol=1e-15)
    R = rotation(spin32, np.pi / 2, (np.pi / 2, np.pi / 2))
    # active rotation about +y carries z onto +x
    np.testing.assert_allclose(R @ ops.Iz @ R.conj().T, ops.Ix, atol=1e-12)
    np.testing.assert_allclose(rotation(spin32, 2 * np.pi, (0.7, 2.0)), -np.eye(4), atol=1e-12)


@pytest.mark.parametrize("spin", SPINS, ids=lambda s: f"2I={s.two_I}")
@pytest.mark.parametrize("axis", [(0.0, 0.0), (np.pi / 2, 0.0), (1.1, 4.0)])
def test_rotation_4pi_identity(spin, axis):
    np.testing.assert_allclose(rotation(spin, 4 * np.pi, axis), np.eye(spin.dim), atol=1e-10)


def test_expectation_examples(spin32):
    ops = spin_operators(spin32)
    top = np.zeros((4, 4))
    top[0, 0] = 1
    assert expectation(top, ops.Iz) == pytest.approx(1.5)
    assert abs(expectation(np.eye(4) / 4, ops.Iz)) < 1e-15
    # Tr(Iy^2) = (1/3) I(I+1)(2I+1) = 5 -> 5/4
    assert expectation(np.eye(4) / 4, ops.Iy @ ops.Iy) == pytest.approx(1.25, abs=1e-12)
    with pytest.raises(ValueError):
        expectation(np.eye(3), ops.Iz)
